//! Restricted (M) and unrestricted (N) fermionic sums at finite truncation `k`.
//!
//! Both sums run over `m ∈ ℤ_{≥0}^{r×k}` with `q_0 = 0`. Row `k` of
//! `p = (I⊗A)n − (C⊗A)m` gives `p_{α,k} = N_α − Σ_β C_{αβ} M_β` with
//! `N_α = Σ_i i·n_{α,i}` and `M_β = Σ_i i·m_{β,i}`, so `q_0 = 0` holds exactly
//! when `M = C^{-1}(N − ℓ)`. Each root then contributes the partitions of
//! `M_β` into parts of size at most `k`, and the domain is finite.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::cartan::{p_vector, quadratic_form_doubled, CartanData, FusionInput};
use crate::error::{Error, Result};
use crate::scalars::{q_to_v, Laurent, QBinomialCache, QPoly};

/// Which route produced a [`MultiplicityResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MSum,
    NSum,
    Matrix,
    CtZ,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MSum => "msum",
            Method::NSum => "nsum",
            Method::Matrix => "matrix",
            Method::CtZ => "ctz",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "msum" => Some(Method::MSum),
            "nsum" => Some(Method::NSum),
            "matrix" => Some(Method::Matrix),
            "ctz" => Some(Method::CtZ),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Graded multiplicities `ℓ ↦ M_{ℓ,n}(v)`, zero entries omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityResult {
    pub algebra: String,
    pub entries: BTreeMap<Vec<i64>, QPoly>,
    pub method: Method,
    pub k_used: usize,
}

impl MultiplicityResult {
    /// Same entries, ignoring method and `k`.
    pub fn same_entries(&self, other: &MultiplicityResult) -> bool {
        self.algebra == other.algebra && self.entries == other.entries
    }
}

/// Truncation level `max(max level, ⌈Σ i·n_{α,i} / 2⌉) + 1`, raised to at
/// least `max_β (C^{-1}N)_β`. Past that bound no part of any summation
/// variable can exceed `k` and the extra levels contribute `[p, 0] = 1`, so
/// the sums no longer depend on `k`.
pub fn auto_k(input: &FusionInput) -> usize {
    let total: u64 = input.n.iter().map(|(&(_, i), &c)| i as u64 * c).sum();
    let half = total.div_ceil(2) as usize;
    let cartan = &input.cartan;
    let stable = cartan
        .lambda_apply(&input.total_weight())
        .into_iter()
        .map(|x| (x / cartan.delta) as usize)
        .max()
        .unwrap_or(0);
    (input.max_level().max(half) + 1).max(stable)
}

/// `K = C^{-1}(N − ℓ)`, or `None` when some entry is not a nonnegative integer.
pub fn root_targets(cartan: &CartanData, total_weight: &[i64], ell: &[i64]) -> Option<Vec<i64>> {
    let diff: Vec<i64> = total_weight.iter().zip(ell).map(|(a, b)| a - b).collect();
    let scaled = cartan.lambda_apply(&diff);
    let mut k = Vec::with_capacity(scaled.len());
    for x in scaled {
        if x < 0 || x % cartan.delta != 0 {
            return None;
        }
        k.push(x / cartan.delta);
    }
    Some(k)
}

/// All `m ∈ ℤ_{≥0}^k` with `Σ_i i·m_i = target`.
fn weighted_compositions(target: i64, k: usize) -> Vec<Vec<i64>> {
    fn rec(level: usize, remaining: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if level == 0 {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let max = remaining / level as i64;
        for c in 0..=max {
            cur[level - 1] = c;
            rec(level - 1, remaining - c * level as i64, cur, out);
        }
        cur[level - 1] = 0;
    }
    let mut out = Vec::new();
    rec(k, target, &mut vec![0; k], &mut out);
    out
}

/// The summation domain as a product of per-root choices.
struct MSpace {
    per_root: Vec<Vec<Vec<i64>>>,
}

impl MSpace {
    fn new(targets: &[i64], k: usize) -> Self {
        MSpace {
            per_root: targets.iter().map(|&t| weighted_compositions(t, k)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.per_root.iter().map(|v| v.len()).product()
    }

    /// The `idx`-th element in mixed-radix order (last root fastest).
    fn get(&self, mut idx: usize) -> Vec<Vec<i64>> {
        let mut m = vec![Vec::new(); self.per_root.len()];
        for (b, choices) in self.per_root.iter().enumerate().rev() {
            m[b] = choices[idx % choices.len()].clone();
            idx /= choices.len();
        }
        m
    }
}

fn weight_or_zero(input: &FusionInput, ell: &[i64]) -> Result<()> {
    if ell.len() != input.rank() {
        return Err(Error::Shape(format!(
            "weight has {} entries, algebra has rank {}",
            ell.len(),
            input.rank()
        )));
    }
    Ok(())
}

/// All `m` (shape `r × k`) with `q_0 = 0`.
pub fn enumerate_m(input: &FusionInput, ell: &[i64], k: usize) -> Result<Vec<Vec<Vec<i64>>>> {
    weight_or_zero(input, ell)?;
    let Some(targets) = root_targets(&input.cartan, &input.total_weight(), ell) else {
        return Ok(Vec::new());
    };
    let space = MSpace::new(&targets, k);
    Ok((0..space.len()).map(|i| space.get(i)).collect())
}

/// Work (summation terms) above which a single sum is split across threads.
const PAR_TERMS: usize = 256;

fn fermionic_sum(input: &FusionInput, ell: &[i64], restricted: bool) -> Result<QPoly> {
    weight_or_zero(input, ell)?;
    let k = input.k;
    let Some(targets) = root_targets(&input.cartan, &input.total_weight(), ell) else {
        return Ok(QPoly::zero());
    };
    let space = MSpace::new(&targets, k);
    let n = input.n_matrix(k);
    let cartan = &input.cartan;

    let term = |m: &[Vec<i64>], cache: &mut QBinomialCache| -> Result<Option<Laurent>> {
        let p = p_vector(cartan, &n, m, k);
        if restricted && p.iter().flatten().any(|x| *x < 0) {
            return Ok(None);
        }
        let mut prod = Laurent::one();
        for (mrow, prow) in m.iter().zip(&p) {
            for (&mi, &pi) in mrow.iter().zip(prow) {
                if mi == 0 {
                    continue;
                }
                let b = cache.get(mi, pi)?;
                if b.is_zero() {
                    return Ok(None);
                }
                prod = &prod * b;
            }
        }
        let q2 = quadratic_form_doubled(&n, m, &p, k);
        if q2 % 2 != 0 {
            return Err(Error::TheoremViolation(format!(
                "quadratic form {q2}/2 is not an integer at m = {m:?}"
            )));
        }
        Ok(Some(prod.shift(q2 / 2)))
    };

    let total = if space.len() >= PAR_TERMS {
        let chunk = 64;
        let parts: Vec<Result<Laurent>> = (0..space.len().div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut cache = QBinomialCache::new();
                let mut acc = Laurent::zero();
                for idx in (c * chunk)..((c + 1) * chunk).min(space.len()) {
                    if let Some(t) = term(&space.get(idx), &mut cache)? {
                        acc += &t;
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut acc = Laurent::zero();
        for p in parts {
            acc += &p?;
        }
        acc
    } else {
        let mut cache = QBinomialCache::new();
        let mut acc = Laurent::zero();
        for idx in 0..space.len() {
            if let Some(t) = term(&space.get(idx), &mut cache)? {
                acc += &t;
            }
        }
        acc
    };

    let v = q_to_v(&total);
    if v.terms().iter().any(|(e, _)| *e < 0) {
        return Err(Error::TheoremViolation(format!(
            "fermionic sum at weight {ell:?} has negative powers of v: {v}"
        )));
    }
    if restricted && v.terms().iter().any(|(_, c)| c.is_negative()) {
        return Err(Error::TheoremViolation(format!(
            "restricted sum at weight {ell:?} has a negative coefficient: {v}"
        )));
    }
    Ok(v)
}

/// Restricted sum over `m` with `q_0 = 0` and all `p_{α,i} ≥ 0` of
/// `q^{Q(m,n)} ∏ [m_{α,i} + p_{α,i}, m_{α,i}]_q`, returned in `v = q^{-1}`.
pub fn m_sum(input: &FusionInput, ell: &[i64]) -> Result<QPoly> {
    fermionic_sum(input, ell, true)
}

/// Same sum without the restriction `p ≥ 0`.
pub fn n_sum(input: &FusionInput, ell: &[i64]) -> Result<QPoly> {
    fermionic_sum(input, ell, false)
}

/// Dominant weights `ℓ = N − C·K` with `K ∈ ℤ_{≥0}^r`, in ascending lex order.
pub fn weight_polytope(input: &FusionInput) -> Vec<Vec<i64>> {
    let cartan = &input.cartan;
    let total = input.total_weight();
    let bounds: Vec<i64> = cartan
        .lambda_apply(&total)
        .into_iter()
        .map(|x| x / cartan.delta)
        .collect();
    let mut out = Vec::new();
    let mut kvec = vec![0i64; cartan.rank];
    loop {
        let ck = cartan.c_apply(&kvec);
        let ell: Vec<i64> = total.iter().zip(&ck).map(|(a, b)| a - b).collect();
        if ell.iter().all(|x| *x >= 0) {
            out.push(ell);
        }
        // Odometer over the box 0..=bounds.
        let mut i = 0;
        loop {
            if i == kvec.len() {
                out.sort();
                return out;
            }
            if kvec[i] < bounds[i] {
                kvec[i] += 1;
                break;
            }
            kvec[i] = 0;
            i += 1;
        }
    }
}

/// Collects all nonzero multiplicities of one fermionic route.
pub fn fusion_decompose_fermionic(input: &FusionInput, method: Method) -> Result<MultiplicityResult> {
    let restricted = match method {
        Method::MSum => true,
        Method::NSum => false,
        other => {
            return Err(Error::InvalidInput(format!(
                "{other} is not a fermionic method"
            )))
        }
    };
    let weights = weight_polytope(input);
    let values: Vec<Result<(Vec<i64>, QPoly)>> = weights
        .into_par_iter()
        .map(|ell| {
            let v = fermionic_sum(input, &ell, restricted)?;
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
        method,
        k_used: input.k,
    })
}
