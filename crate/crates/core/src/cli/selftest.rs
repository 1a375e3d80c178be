//! Invariant checks bundled into the binary.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cartan::{build_cartan, CartanData, Family, FusionInput, KrCounts};
use crate::evaluation::{a1_dual_in_power_basis, a1_power_in_dual_basis, build_moments, vacuum_pair};
use crate::qsystem::{
    check_classical_specialization, check_linear_recursion_a1, check_qqone, check_residual,
    check_same_seed_commutation, check_translation_a1, solve, CheckReport,
};
use crate::qtorus::TorusElement;
use crate::scalars::{Int, TPoly};

use super::{applicable_methods, decompose};

const SEED: u64 = 0x5eed_f00d;

fn algebras() -> Vec<Arc<CartanData>> {
    [(Family::A, 1), (Family::A, 2), (Family::D, 4)]
        .into_iter()
        .map(|(f, r)| Arc::new(build_cartan(f, r).expect("valid algebra")))
        .collect()
}

fn failed(name: &str, e: impl std::fmt::Display) -> CheckReport {
    let mut rep = CheckReport::new(name);
    rep.record(false, || e.to_string());
    rep
}

/// A random element with small exponents and coefficients.
pub(crate) fn random_element(c: &Arc<CartanData>, rng: &mut ChaCha8Rng, terms: usize) -> TorusElement {
    TorusElement::from_terms(
        c,
        (0..terms).map(|_| {
            let e = (0..2 * c.rank).map(|_| rng.gen_range(-3i32..=3)).collect();
            let coeff = TPoly::from_half_terms(
                (0..rng.gen_range(1..3)).map(|_| (rng.gen_range(-4i64..4), Int::from(rng.gen_range(-3i64..4)))),
            );
            (e, coeff)
        }),
    )
}

fn qsystem_checks(out: &mut Vec<CheckReport>) {
    for c in algebras() {
        let n_max = if c.rank == 1 { 5 } else { 3 };
        let table = match solve(&c, n_max) {
            Ok(t) => t,
            Err(e) => {
                out.push(failed(&format!("{} solve", c.name()), e));
                continue;
            }
        };
        for mut rep in [
            check_residual(&table),
            check_same_seed_commutation(&table),
            check_qqone(&table),
            check_classical_specialization(&table),
        ] {
            rep.name = format!("{} {}", c.name(), rep.name);
            out.push(rep);
        }
        if c.rank == 1 {
            let extra = [
                check_linear_recursion_a1(&table),
                check_translation_a1(&table, 1),
                check_translation_a1(&table, 2),
            ];
            for r in extra {
                out.push(r.unwrap_or_else(|e| failed("A1 recursion", e)));
            }
        }
    }
}

fn change_of_basis() -> CheckReport {
    let mut rep = CheckReport::new("A1 change of basis is involutive");
    for m in 0..=8i64 {
        let mut back: BTreeMap<i64, TPoly> = BTreeMap::new();
        let ok = (|| -> crate::Result<bool> {
            for (j, c) in a1_dual_in_power_basis(m)? {
                for (l, d) in a1_power_in_dual_basis(j)? {
                    *back.entry(l).or_insert_with(TPoly::zero) += &(&c * &d);
                }
            }
            back.retain(|_, c| !c.is_zero());
            Ok(back == [(m, TPoly::one())].into())
        })();
        rep.record(matches!(ok, Ok(true)), || format!("m={m}"));
    }
    rep
}

/// `⟨0|Q̂_{-1} g|ℓ⟩ = 0` for `g` a random polynomial in `Q̂_0^{±1}` and `Q̂_1`.
fn annihilation(rng: &mut ChaCha8Rng) -> CheckReport {
    let name = "A1 vacuum annihilated by Q[-1]";
    let c = Arc::new(build_cartan(Family::A, 1).expect("A1"));
    let (table, moments) = match (solve(&c, 1), build_moments(&c, 8, 8)) {
        (Ok(t), Ok(m)) => (t, m),
        (Err(e), _) | (_, Err(e)) => return failed(name, e),
    };
    let mut rep = CheckReport::new(name);
    for _ in 0..20 {
        let g = TorusElement::from_terms(
            &c,
            (0..3).map(|_| {
                let e = vec![rng.gen_range(-2i32..=2), rng.gen_range(0i32..=3)].into_iter().collect();
                (e, TPoly::t_pow(rng.gen_range(-3..=3)))
            }),
        );
        let p = table.q(1, -1) * &g;
        for l in 0..=4 {
            let v = vacuum_pair(&p, &[l], &moments);
            rep.record(matches!(&v, Ok(x) if x.is_zero()), || format!("g={} l={l}", g.render()));
        }
    }
    rep
}

fn division_round_trip(rng: &mut ChaCha8Rng) -> CheckReport {
    let mut rep = CheckReport::new("exact division round trip");
    for c in algebras().into_iter().take(2) {
        for _ in 0..20 {
            let a = random_element(&c, rng, 3);
            let d = random_element(&c, rng, 2);
            if d.is_zero() {
                continue;
            }
            let p = &a * &d;
            let right = p.right_divide_exact(&d);
            rep.record(matches!(&right, Ok(x) if *x == a), || format!("{}: right division", c.name()));
            let p = &d * &a;
            let left = p.left_divide_exact(&d);
            rep.record(matches!(&left, Ok(x) if *x == a), || format!("{}: left division", c.name()));
        }
    }
    rep
}

fn route_agreement() -> CheckReport {
    let mut rep = CheckReport::new("decomposition routes agree");
    type Case = (Family, usize, &'static [((usize, usize), u64)]);
    let cases: [Case; 5] = [
        (Family::A, 1, &[((1, 1), 3), ((1, 2), 1)]),
        (Family::A, 1, &[((1, 3), 2)]),
        (Family::A, 2, &[((1, 1), 2), ((2, 2), 1)]),
        (Family::A, 3, &[((2, 1), 2)]),
        (Family::D, 4, &[((1, 1), 1), ((3, 3), 1)]),
    ];
    for (f, r, n) in cases {
        let label = format!("{f}{r} {n:?}");
        let input = build_cartan(f, r)
            .and_then(|c| FusionInput::new(Arc::new(c), n.iter().cloned().collect::<KrCounts>(), None, None));
        let input = match input {
            Ok(i) => i,
            Err(e) => {
                rep.record(false, || format!("{label}: {e}"));
                continue;
            }
        };
        let results: Vec<_> = applicable_methods(&input.cartan)
            .into_iter()
            .map(|m| decompose(&input, m))
            .collect();
        let ok = match results.split_first() {
            Some((Ok(first), rest)) => rest.iter().all(|r| matches!(r, Ok(x) if x.same_entries(first))),
            _ => false,
        };
        rep.record(ok, || label.clone());
    }
    rep
}

/// Runs every built-in check with a fixed seed.
pub fn run_selftest() -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    qsystem_checks(&mut out);
    out.push(change_of_basis());
    out.push(annihilation(&mut rng));
    out.push(division_round_trip(&mut rng));
    out.push(route_agreement());
    out
}
