//! A1 constant-term route.
//!
//! The multiplicity is the `Q̂_1`-constant term of
//! `Q̂_1 Q̂_0^{-1} ∏_i Q̂_i^{n_i} z^{ℓ+1}` evaluated at `Q̂_0 = 1`, where
//! `z = Q̂_0 Q̂_1^{-1} ∏_{j≥1} (1 − Q̂_j^{-2})^{-1}` is expanded in descending
//! powers of `Q̂_1`. Every factor is kept as a truncated series that is exact
//! for `Q̂_1`-degree `≥ −prec`, so a result with `prec ≥ 0` has an exact
//! constant term.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cartan::{Family, FusionInput};
use crate::error::{Error, Result};
use crate::fermionic::{weight_polytope, Method, MultiplicityResult};
use crate::qsystem::{solve, QSolutionTable};
use crate::qtorus::{ExpVec, TorusElement};
use crate::scalars::{extract_v, QPoly, TPoly};

/// Depth past which the expansion is abandoned.
const MAX_DEPTH: i64 = 512;

/// Stands for "no truncation".
const EXACT: i64 = i64::MAX / 4;

/// Degree of a term in `Q̂_1` (A1 layout `(a, b)`).
fn deg(e: &ExpVec) -> i64 {
    e[1] as i64
}

/// An element known exactly in `Q̂_1`-degrees `≥ −prec`.
#[derive(Clone)]
struct Series {
    elem: TorusElement,
    prec: i64,
}

impl Series {
    fn exact(elem: TorusElement) -> Self {
        Series { elem, prec: EXACT }
    }

    fn truncated(elem: &TorusElement, prec: i64) -> Self {
        let prec = prec.min(EXACT);
        let elem = TorusElement::from_terms(
            elem.cartan(),
            elem.terms()
                .iter()
                .filter(|(e, _)| deg(e) >= -prec)
                .map(|(e, c)| (e.clone(), c.clone())),
        );
        Series { elem, prec }
    }

    /// Largest `Q̂_1`-degree present, or `−EXACT` for zero.
    fn top(&self) -> i64 {
        self.elem.terms().keys().map(deg).max().unwrap_or(-EXACT)
    }

    fn mul(&self, other: &Series) -> Series {
        let prec = (self.prec - other.top()).min(other.prec - self.top()).min(EXACT);
        // Terms that cannot reach degree −prec are dropped before multiplying.
        let x = Series::truncated(&self.elem, prec + other.top().max(-EXACT / 2));
        let y = Series::truncated(&other.elem, prec + self.top().max(-EXACT / 2));
        Series::truncated(&(&x.elem * &y.elem), prec)
    }

    fn add(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        Series::truncated(&(&self.elem + &other.elem), prec)
    }
}

/// `f^{-1}` to precision `prec` for an exact `f` with a single top-degree monomial `L`,
/// as `(1 + L^{-1}R)^{-1} L^{-1}` with `R = f − L`.
fn inverse(f: &TorusElement, prec: i64) -> Result<Series> {
    let top = f.terms().keys().map(deg).max().ok_or_else(|| {
        Error::InvalidInput("cannot invert zero".into())
    })?;
    let lead: Vec<_> = f.terms().iter().filter(|(e, _)| deg(e) == top).collect();
    if lead.len() != 1 {
        return Err(Error::TheoremViolation(format!(
            "top Q[1,1]-degree of {f} is not a single monomial"
        )));
    }
    let l = TorusElement::monomial(f.cartan(), lead[0].0.clone(), lead[0].1.clone());
    let l_inv = l.monomial_inverse()?;
    let u = &l_inv * &(f - &l);
    // (1+u)^{-1} is needed to precision prec − top so that the product with L^{-1} reaches prec.
    let inner = prec - top;
    let minus_u = Series::exact(-&u);
    let mut term = Series::truncated(&TorusElement::one(f.cartan()), inner);
    let mut acc = term.clone();
    loop {
        term = term.mul(&minus_u);
        term = Series::truncated(&term.elem, inner);
        if term.elem.is_zero() {
            break;
        }
        acc = acc.add(&term);
    }
    acc.prec = inner;
    Ok(acc.mul(&Series::exact(l_inv)))
}

/// `(1 − Q̂_j^{-2})^{-1} = Σ_s Q̂_j^{-2s}` to precision `prec`.
fn geometric_factor(qj: &TorusElement, prec: i64) -> Result<Series> {
    let g_inv = inverse(&qj.pow(2), prec)?;
    let mut term = Series::truncated(&TorusElement::one(qj.cartan()), prec);
    let mut acc = term.clone();
    loop {
        term = term.mul(&g_inv);
        term = Series::truncated(&term.elem, prec);
        if term.elem.is_zero() {
            break;
        }
        acc = acc.add(&term);
    }
    acc.prec = prec;
    Ok(acc)
}

/// Constant term at working precision `depth`, before the prefactor.
/// `None` when the depth is too small to determine it.
fn constant_term(input: &FusionInput, ell: i64, table: &QSolutionTable, depth: i64) -> Result<Option<TPoly>> {
    let c = table.cartan();
    let q0 = TorusElement::generator(c, 1, 0);
    let q1 = TorusElement::generator(c, 1, 1);
    let q0_inv = q0.monomial_inverse()?;
    let q1_inv = q1.monomial_inverse()?;

    // Factors with 2j > depth equal 1 to this precision.
    let mut z = Series::exact(&q0 * &q1_inv);
    for j in 1..=(depth / 2) {
        z = z.mul(&geometric_factor(table.q(1, j), depth)?);
    }

    let mut w = Series::exact(&q1 * &q0_inv);
    for i in 1..=input.max_level() {
        if let Some(&n) = input.n.get(&(1, i)) {
            w = w.mul(&Series::exact(table.q(1, i as i64).pow(n as u32)));
        }
    }
    for _ in 0..=ell {
        w = w.mul(&z);
    }
    if w.prec < 0 {
        return Ok(None);
    }
    let mut ct = TPoly::zero();
    for (e, coeff) in w.elem.terms() {
        if deg(e) == 0 {
            ct += coeff;
        }
    }
    Ok(Some(ct))
}

/// Doubled exponent of `t^{Σ n_i + ½(ℓ + n·A·n)}`.
fn prefactor_doubled(input: &FusionInput, ell: i64) -> i64 {
    let mut s = ell;
    for (&(_, i), &c) in &input.n {
        s += 2 * c as i64;
        for (&(_, j), &d) in &input.n {
            s += c as i64 * i.min(j) as i64 * d as i64;
        }
    }
    s
}

/// Graded multiplicity of `V_ℓ` for A1 from the constant term of the
/// `z`-series, deepening the truncation until two depths agree.
pub fn ct_z_multiplicity_a1(input: &FusionInput, ell: &[i64], table: &QSolutionTable) -> Result<QPoly> {
    let c = &input.cartan;
    if c.label != Family::A || c.rank != 1 {
        return Err(Error::UnsupportedAlgebra {
            label: c.label.to_string(),
            rank: c.rank,
            reason: "the constant-term route is implemented for A1 only".into(),
        });
    }
    if table.cartan().name() != c.name() {
        return Err(Error::AlgebraMismatch(c.name(), table.cartan().name()));
    }
    if ell.len() != 1 || ell[0] < 0 {
        return Err(Error::InvalidInput(format!("weight {ell:?} is not a dominant A1 weight")));
    }
    let l = ell[0];
    // With precision tracked per factor, z to precision D gives the product
    // precision D + ℓ − Σ i·n_i, so this is the smallest depth that can
    // determine the constant term.
    let weight: i64 = input.total_weight()[0];
    let mut depth = (weight - l).max(1);
    let mut table = table.clone();
    let mut prev: Option<TPoly> = None;
    while depth <= MAX_DEPTH {
        table.extend_to((depth / 2).max(input.max_level() as i64))?;
        let cur = constant_term(input, l, &table, depth)?;
        if let (Some(a), Some(b)) = (&prev, &cur) {
            if a == b {
                let v = extract_v(&a.shift_half(prefactor_doubled(input, l)), c.delta)?;
                if !v.is_positive_polynomial() {
                    return Err(Error::TheoremViolation(format!(
                        "constant-term multiplicity at ℓ = {l} is not a positive polynomial in v: {v}"
                    )));
                }
                return Ok(v);
            }
        }
        prev = cur;
        depth *= 2;
    }
    Err(Error::NoStabilization(MAX_DEPTH as usize))
}

/// All nonzero constant-term multiplicities over the weight polytope.
pub fn fusion_decompose_ctz(input: &FusionInput, table: Option<&QSolutionTable>) -> Result<MultiplicityResult> {
    let owned;
    let table = match table {
        Some(t) => t,
        None => {
            owned = solve(&input.cartan, input.max_level().max(1) as i64)?;
            &owned
        }
    };
    let values: Vec<Result<(Vec<i64>, QPoly)>> = weight_polytope(input)
        .into_par_iter()
        .map(|ell| {
            let v = ct_z_multiplicity_a1(input, &ell, table)?;
            Ok((ell, v))
        })
        .collect();
    let mut entries = BTreeMap::new();
    for v in values {
        let (ell, poly) = v?;
        if !poly.is_zero() {
            entries.insert(ell, poly);
        }
    }
    Ok(MultiplicityResult {
        algebra: input.cartan.name(),
        entries,
        method: Method::CtZ,
        k_used: input.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::build_cartan;
    use crate::fermionic::m_sum;
    use std::sync::Arc;

    fn a1_input(n: &[((usize, usize), u64)]) -> FusionInput {
        let c = Arc::new(build_cartan(Family::A, 1).unwrap());
        FusionInput::new(c, n.iter().cloned().collect(), None, None).unwrap()
    }

    #[test]
    fn examples() {
        let inp = a1_input(&[((1, 2), 2)]);
        let t = solve(&inp.cartan, 2).unwrap();
        assert_eq!(ct_z_multiplicity_a1(&inp, &[2], &t).unwrap(), QPoly::from_terms([(1, 1)]));
        let empty = a1_input(&[]);
        assert_eq!(ct_z_multiplicity_a1(&empty, &[0], &t).unwrap(), QPoly::one());
        let two = a1_input(&[((1, 1), 2)]);
        assert_eq!(ct_z_multiplicity_a1(&two, &[0], &t).unwrap(), QPoly::from_terms([(1, 1)]));
    }

    #[test]
    fn agrees_with_msum() {
        for n in [
            vec![((1, 1), 3)],
            vec![((1, 1), 1), ((1, 2), 1)],
            vec![((1, 3), 1), ((1, 1), 2)],
            vec![((1, 2), 2)],
        ] {
            let inp = a1_input(&n);
            let t = solve(&inp.cartan, 3).unwrap();
            for ell in weight_polytope(&inp) {
                assert_eq!(
                    ct_z_multiplicity_a1(&inp, &ell, &t).unwrap(),
                    m_sum(&inp, &ell).unwrap(),
                    "n={n:?} ell={ell:?}"
                );
            }
        }
    }

    #[test]
    fn series_inverse() {
        let c = Arc::new(build_cartan(Family::A, 1).unwrap());
        let t = solve(&c, 3).unwrap();
        let f = t.q(1, 3);
        let inv = inverse(f, 10).unwrap();
        let prod = Series::exact(f.clone()).mul(&inv);
        assert!(prod.prec >= 7);
        assert_eq!(prod.elem, TorusElement::one(&c));
    }

    #[test]
    fn rejects_other_algebras() {
        let c = Arc::new(build_cartan(Family::A, 2).unwrap());
        let inp = FusionInput::new(c.clone(), Default::default(), None, None).unwrap();
        let t = solve(&c, 1).unwrap();
        assert!(matches!(
            ct_z_multiplicity_a1(&inp, &[0, 0], &t),
            Err(Error::UnsupportedAlgebra { .. })
        ));
    }
}
