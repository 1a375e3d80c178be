//! Acceptance checks, one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance`. Each check is exact; the time
//! limit is measured on the build profile the harness runs under.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qqfusion::cartan::{build_cartan, CartanData, Family, FusionInput, KrCounts};
use qqfusion::evaluation::{
    a1_dual_in_power_basis, a1_power_in_dual_basis, build_moments, decompose_matrix, fusion_decompose_ctz,
    vacuum_pair,
};
use qqfusion::fermionic::{fusion_decompose_fermionic, m_sum, Method, MultiplicityResult};
use qqfusion::qsystem::{
    check_linear_recursion_a1, check_residual, check_same_seed_commutation, check_translation_a1, solve,
};
use qqfusion::qtorus::TorusElement;
use qqfusion::scalars::{Int, QPoly, TPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Counts = Vec<((usize, usize), u64)>;

fn algebra(f: Family, r: usize) -> Arc<CartanData> {
    Arc::new(build_cartan(f, r).unwrap())
}

fn input(c: &Arc<CartanData>, n: &[((usize, usize), u64)]) -> FusionInput {
    FusionInput::new(c.clone(), n.iter().cloned().collect::<KrCounts>(), None, None).unwrap()
}

fn v(terms: &[(i64, i64)]) -> QPoly {
    QPoly::from_terms(terms.iter().cloned())
}

fn expect(entries: &[(&[i64], QPoly)]) -> BTreeMap<Vec<i64>, QPoly> {
    entries.iter().map(|(l, p)| (l.to_vec(), p.clone())).collect()
}

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, u64, Box<dyn Fn() -> Check + 'a>);

fn same(r: &MultiplicityResult, want: &BTreeMap<Vec<i64>, QPoly>) -> Result<(), String> {
    if &r.entries == want {
        Ok(())
    } else {
        Err(format!("{}: got {:?}", r.method, r.entries))
    }
}

fn all_routes(inp: &FusionInput, with_ctz: bool) -> Result<Vec<MultiplicityResult>, String> {
    let mut out = Vec::new();
    for m in [Method::MSum, Method::NSum] {
        out.push(fusion_decompose_fermionic(inp, m).map_err(|e| e.to_string())?);
    }
    out.push(decompose_matrix(inp).map_err(|e| e.to_string())?);
    if with_ctz {
        out.push(fusion_decompose_ctz(inp, None).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn example(inp: FusionInput, want: BTreeMap<Vec<i64>, QPoly>, with_ctz: bool) -> Check {
    let results = all_routes(&inp, with_ctz)?;
    for r in &results {
        same(r, &want)?;
    }
    let names: Vec<_> = results.iter().map(|r| r.method.as_str()).collect();
    Ok(format!("{} routes exact ({})", results.len(), names.join(", ")))
}

fn criterion1() -> Check {
    let c = algebra(Family::A, 1);
    let want = expect(&[(&[4], v(&[(0, 1)])), (&[2], v(&[(1, 1)])), (&[0], v(&[(2, 1)]))]);
    example(input(&c, &[((1, 2), 2)]), want, true)
}

/// Polynomial in q as coefficient vector, low degree first.
fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division by a polynomial with constant term 1.
fn poly_div(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut rem = a.to_vec();
    let n = a.len() + 1 - b.len();
    let mut quot = vec![0; n];
    for i in 0..n {
        let c = rem[i];
        quot[i] = c;
        for (j, y) in b.iter().enumerate() {
            rem[i + j] -= c * y;
        }
    }
    assert!(rem.iter().all(|x| *x == 0), "inexact division");
    quot
}

fn one_minus_q(k: usize) -> Vec<i128> {
    let mut p = vec![0; k + 1];
    p[0] = 1;
    p[k] = -1;
    p
}

/// `q^{-j(n-j)} ∏_{i≤n}(1 − q^i) / ∏_{boxes}(1 − q^{hook})` for the two-row
/// diagram `(n−j, j)`, as a polynomial in `v = q^{-1}`.
fn hook_oracle(n: usize, j: usize) -> QPoly {
    let rows = [n - j, j];
    let mut num = vec![1i128];
    for i in 1..=n {
        num = poly_mul(&num, &one_minus_q(i));
    }
    let mut den = vec![1i128];
    for (r, &len) in rows.iter().enumerate() {
        for col in 0..len {
            let below = rows[r + 1..].iter().filter(|&&l| l > col).count();
            let hook = (len - col - 1) + below + 1;
            den = poly_mul(&den, &one_minus_q(hook));
        }
    }
    let f = poly_div(&num, &den);
    let shift = (j * (n - j)) as i64;
    QPoly::from_terms(
        f.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(e, c)| (shift - e as i64, *c as i64)),
    )
}

fn criterion2() -> Check {
    let c = algebra(Family::A, 1);
    let mut checked = 0;
    for n in 0..=8usize {
        let inp = input(&c, &[((1, 1), n as u64)]);
        for ell in 0..=n as i64 + 1 {
            let got = m_sum(&inp, &[ell]).map_err(|e| e.to_string())?;
            let want = if (n as i64 - ell) % 2 == 0 && ell <= n as i64 {
                hook_oracle(n, (n - ell as usize) / 2)
            } else {
                QPoly::zero()
            };
            if got != want {
                return Err(format!("n={n} l={ell}: got {got}, hook gives {want}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} multiplicities match the hook product"))
}

fn criterion3() -> Check {
    let c = algebra(Family::A, 2);
    let want = expect(&[
        (&[2, 2], v(&[(0, 1)])),
        (&[0, 3], v(&[(1, 1)])),
        (&[1, 1], v(&[(1, 1), (2, 1)])),
        (&[0, 0], v(&[(2, 1)])),
    ]);
    example(input(&c, &[((1, 1), 2), ((2, 2), 1)]), want, false)
}

fn criterion4() -> Check {
    let c = algebra(Family::D, 4);
    let want = expect(&[(&[1, 0, 3, 0], v(&[(0, 1)])), (&[0, 0, 2, 1], v(&[(1, 1)]))]);
    example(input(&c, &[((1, 1), 1), ((3, 3), 1)]), want, false)
}

/// Random KR content with `Σ i·n ≤ budget`, at least one module.
fn random_counts(rng: &mut ChaCha8Rng, rank: usize, budget: usize) -> Counts {
    let mut n: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut left = rng.gen_range(1..=budget);
    while left > 0 {
        let i = rng.gen_range(1..=left);
        let a = rng.gen_range(1..=rank);
        *n.entry((a, i)).or_insert(0) += 1;
        left -= i;
    }
    n.into_iter().collect()
}

struct Suite {
    cases: Vec<(Arc<CartanData>, Counts)>,
}

fn suite() -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    let mut cases = Vec::new();
    let plan = [
        (Family::A, 1, 8, 50),
        (Family::A, 2, 6, 15),
        (Family::A, 3, 6, 15),
        (Family::D, 4, 4, 10),
    ];
    for (f, r, budget, count) in plan {
        let c = algebra(f, r);
        for _ in 0..count {
            cases.push((c.clone(), random_counts(&mut rng, r, budget)));
        }
    }
    Suite { cases }
}

fn criterion5(s: &Suite) -> Check {
    for (c, n) in &s.cases {
        let inp = input(c, n);
        let m = fusion_decompose_fermionic(&inp, Method::MSum).map_err(|e| e.to_string())?;
        let nn = fusion_decompose_fermionic(&inp, Method::NSum).map_err(|e| e.to_string())?;
        if m.entries != nn.entries {
            return Err(format!("{} {n:?}: msum {:?} nsum {:?}", c.name(), m.entries, nn.entries));
        }
    }
    Ok(format!("{} inputs, msum = nsum", s.cases.len()))
}

fn criterion6(s: &Suite) -> Check {
    let mut ctz = 0;
    for (c, n) in &s.cases {
        let inp = input(c, n);
        let f = fusion_decompose_fermionic(&inp, Method::MSum).map_err(|e| e.to_string())?;
        let m = decompose_matrix(&inp).map_err(|e| e.to_string())?;
        if f.entries != m.entries {
            return Err(format!("{} {n:?}: fermionic {:?} matrix {:?}", c.name(), f.entries, m.entries));
        }
        if c.rank == 1 {
            let z = fusion_decompose_ctz(&inp, None).map_err(|e| e.to_string())?;
            if z.entries != f.entries {
                return Err(format!("A1 {n:?}: fermionic {:?} ctz {:?}", f.entries, z.entries));
            }
            ctz += 1;
        }
    }
    Ok(format!("{} inputs, fermionic = matrix ({ctz} also = ctz)", s.cases.len()))
}

/// Classical multiplicities of `⊗ V_{i}` for A1 by repeated Clebsch-Gordan.
fn clebsch_gordan(n: &Counts) -> BTreeMap<i64, i64> {
    let mut cur: BTreeMap<i64, i64> = [(0, 1)].into();
    for &((_, i), count) in n {
        for _ in 0..count {
            let mut next = BTreeMap::new();
            for (&a, &mult) in &cur {
                let b = i as i64;
                let mut c = (a - b).abs();
                while c <= a + b {
                    *next.entry(c).or_insert(0) += mult;
                    c += 2;
                }
            }
            cur = next;
        }
    }
    cur
}

fn criterion7(s: &Suite) -> Check {
    let mut count = 0;
    for (c, n) in s.cases.iter().filter(|(c, _)| c.rank == 1 && c.label == Family::A) {
        let inp = input(c, n);
        let r = fusion_decompose_fermionic(&inp, Method::MSum).map_err(|e| e.to_string())?;
        let got: BTreeMap<i64, i64> = r
            .entries
            .iter()
            .map(|(l, p)| (l[0], p.eval_one().to_i64().unwrap()))
            .collect();
        let want = clebsch_gordan(n);
        if got != want {
            return Err(format!("{n:?}: v=1 gives {got:?}, Clebsch-Gordan {want:?}"));
        }
        count += 1;
    }
    Ok(format!("{count} A1 inputs match Clebsch-Gordan"))
}

/// Weyl dimension of the A_r irreducible with highest weight `l`.
fn weyl_dim_a(l: &[i64]) -> Int {
    let r = l.len();
    let mut num = Int::from(1i64);
    let mut den = Int::from(1i64);
    for i in 0..r {
        for j in i + 1..=r {
            let s: i64 = l[i..j].iter().sum::<i64>() + (j - i) as i64;
            num = num * Int::from(s);
            den = den * Int::from((j - i) as i64);
        }
    }
    num.div_exact(&den).expect("integral dimension")
}

fn criterion8(s: &Suite) -> Check {
    let mut count = 0;
    for (c, n) in s.cases.iter().filter(|(c, _)| c.label == Family::A && c.rank <= 3) {
        let r = c.rank;
        let inp = input(c, n);
        let res = fusion_decompose_fermionic(&inp, Method::MSum).map_err(|e| e.to_string())?;
        let mut total = Int::from(0i64);
        for (l, p) in &res.entries {
            total += &(p.eval_one() * weyl_dim_a(l));
        }
        let mut want = Int::from(1i64);
        for &((a, i), k) in n {
            let mut w = vec![0i64; r];
            w[a - 1] = i as i64;
            want = want * weyl_dim_a(&w).pow(k as u32);
        }
        if total != want {
            return Err(format!("{} {n:?}: Σ M(1) dim = {total}, product of dims = {want}", c.name()));
        }
        count += 1;
    }
    Ok(format!("{count} A_r inputs satisfy the dimension sum rule"))
}

fn random_element(c: &Arc<CartanData>, rng: &mut ChaCha8Rng, terms: usize) -> TorusElement {
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

fn criterion9() -> Check {
    let mut fails = Vec::new();
    let mut checked = 0;
    let mut absorb = |rep: qqfusion::qsystem::CheckReport| {
        checked += rep.checked;
        if !rep.passed() {
            fails.push(format!("{}: {:?}", rep.name, rep.failures));
        }
    };
    let mut tables = Vec::new();
    for (f, r, n) in [
        (Family::A, 1, 6),
        (Family::A, 2, 6),
        (Family::A, 3, 6),
        (Family::A, 4, 6),
        (Family::D, 4, 4),
    ] {
        let t = solve(&algebra(f, r), n).map_err(|e| e.to_string())?;
        absorb(check_residual(&t));
        absorb(check_same_seed_commutation(&t));
        tables.push(t);
    }
    let a1 = &tables[0];
    absorb(check_linear_recursion_a1(a1).map_err(|e| e.to_string())?);
    for j in [1, 2] {
        absorb(check_translation_a1(a1, j).map_err(|e| e.to_string())?);
    }

    for m in 0..=8i64 {
        let mut back: BTreeMap<i64, TPoly> = BTreeMap::new();
        for (j, c) in a1_dual_in_power_basis(m).map_err(|e| e.to_string())? {
            for (l, d) in a1_power_in_dual_basis(j).map_err(|e| e.to_string())? {
                *back.entry(l).or_insert_with(TPoly::zero) += &(&c * &d);
            }
        }
        back.retain(|_, c| !c.is_zero());
        if back != [(m, TPoly::one())].into() {
            fails.push(format!("change of basis m={m}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (table, per) in [(&tables[0], 30), (&tables[1], 20)] {
        let c = table.cartan().clone();
        let r = c.rank;
        let moments = build_moments(&c, 4, 8).map_err(|e| e.to_string())?;
        for _ in 0..per {
            let g = TorusElement::from_terms(
                &c,
                (0..3).map(|_| {
                    let mut e: Vec<i32> = (0..r).map(|_| rng.gen_range(-2..=2)).collect();
                    e.extend((0..r).map(|_| rng.gen_range(0..=2)));
                    (e.into_iter().collect(), TPoly::t_pow(rng.gen_range(-3..=3)))
                }),
            );
            let alpha = rng.gen_range(1..=r);
            let p = table.q(alpha, -1) * &g;
            for ell in moments_weights(r, 3) {
                let val = vacuum_pair(&p, &ell, &moments).map_err(|e| e.to_string())?;
                if !val.is_zero() {
                    fails.push(format!("{}: annihilation fails for alpha={alpha} l={ell:?}", c.name()));
                }
            }
        }
    }

    let mut pairs = 0;
    while pairs < 100 {
        let c = tables[pairs % 3].cartan().clone();
        let a = random_element(&c, &mut rng, 3);
        let d = random_element(&c, &mut rng, 2);
        if d.is_zero() {
            continue;
        }
        let right = (&a * &d).right_divide_exact(&d).map_err(|e| e.to_string())?;
        let left = (&d * &a).left_divide_exact(&d).map_err(|e| e.to_string())?;
        if right != a || left != a {
            fails.push(format!("{} division round trip", c.name()));
        }
        pairs += 1;
    }

    if fails.is_empty() {
        Ok(format!(
            "{checked} Q-system identities, change of basis m<=8, 50 annihilations, {pairs} division pairs"
        ))
    } else {
        Err(fails.join("; "))
    }
}

/// Dominant weights with entries in `0..=max`.
fn moments_weights(r: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|w| (0..=max).map(move |x| [w.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn main() {
    let suite = suite();
    let criteria: Vec<Criterion> = vec![
        ("A1 V(2w1)*V(2w1) by msum, nsum, matrix, ctz", 1, Box::new(criterion1)),
        ("A1 n-fold V(w1) against the hook product, n <= 8", 5, Box::new(criterion2)),
        ("A2 KR(1,1)^2*KR(2,2) by msum, nsum, matrix", 5, Box::new(criterion3)),
        ("D4 KR(1,1)*KR(3,3) by msum, nsum, matrix", 60, Box::new(criterion4)),
        ("randomized msum = nsum", 300, Box::new(|| criterion5(&suite))),
        ("randomized fermionic = matrix", 600, Box::new(|| criterion6(&suite))),
        ("A1 classical limit = Clebsch-Gordan", 60, Box::new(|| criterion7(&suite))),
        ("A_r (r <= 3) dimension sum rule", 60, Box::new(|| criterion8(&suite))),
        ("quantum Q-system and vacuum invariants", 120, Box::new(criterion9)),
    ];
    let mut failed = 0;
    for (idx, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (tag, detail) = match (&res, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}, but over the time limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {} {tag} [{:.3} s / limit {limit} s] {name}: {detail}",
            idx + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
