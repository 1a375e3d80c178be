//! Matrix-element route to the graded multiplicities.
//!
//! A product of Q-system solutions is first mapped to a polynomial in the
//! `Q̂_{α,1}` by [`phi`]: monomials carrying a negative power of some `Q̂_{α,1}`
//! are dropped and each `Q̂_{α,0}` (leftmost in normal order) is evaluated to
//! `t^{−Σ_β λ_{αβ}}`. Pairing that polynomial with a weight `ℓ` uses the
//! moments `μ_{ℓ,j} = ⟨0| ∏_α Q̂_{α,1}^{j_α} |ℓ⟩`, which are seeded from the
//! fermionic sum with `n_{α,1} = j_α` and, for A1, checked against the closed
//! change of basis between `⟨m|` and `⟨0|Q̂_1^j`.
//!
//! The map is only meaningful on the subalgebra generated by the
//! `Q̂_{α,0}^{±1}` and the `Q̂_{α,i}` with `i ≥ 1`; products of KR solutions
//! are the only inputs used here.

mod ctz;

pub use ctz::{ct_z_multiplicity_a1, fusion_decompose_ctz};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::cartan::{CartanData, Family, FusionInput, KrCounts};
use crate::error::{Error, Result};
use crate::fermionic::{n_sum, weight_polytope, Method, MultiplicityResult};
use crate::qsystem::{solve, QSolutionTable};
use crate::qtorus::{zero_exp, TorusElement};
use crate::scalars::{embed_q, extract_v, qbinomial, v_to_t, QPoly, TPoly};

/// `Σ_j c_j(t) ∏_α Q̂_{α,1}^{j_α}` with `j ≥ 0`.
#[derive(Clone, Debug)]
pub struct Q1Polynomial {
    cartan: Arc<CartanData>,
    terms: BTreeMap<Vec<i64>, TPoly>,
}

impl PartialEq for Q1Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.cartan.name() == other.cartan.name() && self.terms == other.terms
    }
}

impl Eq for Q1Polynomial {}

impl Q1Polynomial {
    pub fn zero(cartan: &Arc<CartanData>) -> Self {
        Q1Polynomial {
            cartan: cartan.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Collects terms, merging repeated exponents and dropping zeros.
    pub fn from_terms<I>(cartan: &Arc<CartanData>, it: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, TPoly)>,
    {
        let mut p = Self::zero(cartan);
        for (j, c) in it {
            if j.len() != cartan.rank || j.iter().any(|x| *x < 0) {
                return Err(Error::Shape(format!(
                    "exponent {j:?} is not a nonnegative vector of length {}",
                    cartan.rank
                )));
            }
            p.add_term(j, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, j: Vec<i64>, c: TPoly) {
        let slot = self.terms.entry(j).or_insert_with(TPoly::zero);
        *slot += &c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn cartan(&self) -> &Arc<CartanData> {
        &self.cartan
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, TPoly> {
        &self.terms
    }

    pub fn coeff(&self, j: &[i64]) -> TPoly {
        self.terms.get(j).cloned().unwrap_or_else(TPoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exponents `j` with a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.terms.keys()
    }

    /// The same polynomial as a torus element (no `Q̂_{α,0}` factors).
    pub fn to_torus(&self) -> TorusElement {
        let r = self.cartan.rank;
        TorusElement::from_terms(
            &self.cartan,
            self.terms.iter().map(|(j, c)| {
                let mut e = zero_exp(r);
                for (a, x) in j.iter().enumerate() {
                    e[r + a] = *x as i32;
                }
                (e, c.clone())
            }),
        )
    }
}

/// The polynomial `P(Q̂_1)` with `⟨0|p = ⟨0|P(Q̂_1)`.
pub fn phi(p: &TorusElement) -> Q1Polynomial {
    let cartan = p.cartan();
    let r = cartan.rank;
    let shifts = cartan.lambda_row_sums();
    let mut out = Q1Polynomial::zero(cartan);
    for (e, c) in p.terms() {
        if e[r..].iter().any(|b| *b < 0) {
            continue;
        }
        let s: i64 = (0..r).map(|a| -(e[a] as i64) * shifts[a]).sum();
        let j = e[r..].iter().map(|b| *b as i64).collect();
        out.add_term(j, c.shift_half(2 * s));
    }
    out
}

/// `⟨0|Q̂_1^n` in the dual basis for A1: `m ↦` coefficient of `⟨m|`.
pub fn a1_power_in_dual_basis(n: i64) -> Result<BTreeMap<i64, TPoly>> {
    if n < 0 {
        return Err(Error::InvalidInput(format!("negative power {n}")));
    }
    let mut out = BTreeMap::new();
    for j in 0..=n / 2 {
        let m = n - 2 * j;
        let mut b = qbinomial(j, n - j)?;
        if j > 0 {
            b = &b - &qbinomial(j - 1, n - j + 1)?;
        }
        let c = embed_q(&b, 2).shift_half(-m * (m + 3));
        if !c.is_zero() {
            out.insert(m, c);
        }
    }
    Ok(out)
}

/// `⟨m|` in the basis `⟨0|Q̂_1^j` for A1: `j ↦` coefficient.
pub fn a1_dual_in_power_basis(m: i64) -> Result<BTreeMap<i64, TPoly>> {
    if m < 0 {
        return Err(Error::InvalidInput(format!("negative weight {m}")));
    }
    let mut out = BTreeMap::new();
    for j in 0..=m / 2 {
        let mut b = qbinomial(m - 2 * j, j)?;
        if j % 2 == 1 {
            b = -&b;
        }
        let c = embed_q(&b, 2).shift_half(m * (m + 3) - 2 * j * (j + 1));
        if !c.is_zero() {
            out.insert(m - 2 * j, c);
        }
    }
    Ok(out)
}

/// Doubled t-exponent relating `μ_{ℓ,j}` to the fermionic sum with `n_{α,1} = j_α`.
fn moment_shift_doubled(cartan: &CartanData, ell: &[i64], j: &[i64]) -> i64 {
    let r = cartan.rank;
    let mut s = 0;
    for a in 0..r {
        s += ell[a] * cartan.lambda[a][a];
        for b in 0..r {
            s += (j[a] + 1) * cartan.lambda[a][b] * (j[b] + 1) - cartan.lambda[a][b];
        }
    }
    -s
}

fn check_weight(cartan: &CartanData, w: &[i64], what: &str) -> Result<()> {
    if w.len() != cartan.rank {
        return Err(Error::Shape(format!(
            "{what} has {} entries, algebra has rank {}",
            w.len(),
            cartan.rank
        )));
    }
    if w.iter().any(|x| *x < 0) {
        return Err(Error::InvalidInput(format!("{what} {w:?} has a negative entry")));
    }
    Ok(())
}

/// `μ_{ℓ,j}` from the unrestricted fermionic sum.
pub fn moment_from_fermionic(cartan: &Arc<CartanData>, ell: &[i64], j: &[i64]) -> Result<TPoly> {
    check_weight(cartan, ell, "weight")?;
    check_weight(cartan, j, "moment exponent")?;
    let n: KrCounts = j
        .iter()
        .enumerate()
        .filter(|(_, x)| **x > 0)
        .map(|(a, x)| ((a + 1, 1), *x as u64))
        .collect();
    let input = FusionInput::new(cartan.clone(), n, None, None)?;
    let v = n_sum(&input, ell)?;
    Ok(v_to_t(&v, cartan.delta).shift_half(moment_shift_doubled(cartan, ell, j)))
}

fn compute_moment(cartan: &Arc<CartanData>, ell: &[i64], j: &[i64]) -> Result<TPoly> {
    let mu = moment_from_fermionic(cartan, ell, j)?;
    if cartan.label == Family::A && cartan.rank == 1 {
        let closed = a1_power_in_dual_basis(j[0])?
            .remove(&ell[0])
            .unwrap_or_else(TPoly::zero);
        if closed != mu {
            return Err(Error::TheoremViolation(format!(
                "moment ({}, {}): fermionic value {mu} differs from the change of basis {closed}",
                ell[0], j[0]
            )));
        }
    }
    Ok(mu)
}

/// `(ℓ, j)` index of a moment.
type MomentKey = (Vec<i64>, Vec<i64>);

/// Moments `μ_{ℓ,j}` for a fixed set of pairs. Missing pairs are an error on
/// lookup; pairs known to vanish are stored as explicit zeros.
#[derive(Clone, Debug)]
pub struct MomentTable {
    cartan: Arc<CartanData>,
    moments: HashMap<(Vec<i64>, Vec<i64>), TPoly>,
    bounds: Option<(i64, i64)>,
}

impl MomentTable {
    pub fn cartan(&self) -> &Arc<CartanData> {
        &self.cartan
    }

    /// `(max ℓ, max j)` when the table was built over a full box.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn get(&self, ell: &[i64], j: &[i64]) -> Result<&TPoly> {
        self.moments
            .get(&(ell.to_vec(), j.to_vec()))
            .ok_or_else(|| Error::MomentOutOfRange(format!("ℓ = {ell:?}, j = {j:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Vec<i64>, Vec<i64>), &TPoly)> {
        self.moments.iter()
    }
}

fn box_points(r: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn fill(cartan: &Arc<CartanData>, pairs: Vec<MomentKey>) -> Result<HashMap<MomentKey, TPoly>> {
    pairs
        .into_par_iter()
        .map(|(ell, j)| {
            let mu = compute_moment(cartan, &ell, &j)?;
            Ok(((ell, j), mu))
        })
        .collect()
}

/// All moments with every `ℓ_α ≤ max_l` and every `j_α ≤ max_j`.
pub fn build_moments(cartan: &Arc<CartanData>, max_l: i64, max_j: i64) -> Result<MomentTable> {
    if max_l < 0 || max_j < 0 {
        return Err(Error::InvalidInput("moment bounds must be nonnegative".into()));
    }
    let r = cartan.rank;
    let js = box_points(r, max_j);
    let pairs = box_points(r, max_l)
        .into_iter()
        .flat_map(|l| js.iter().map(move |j| (l.clone(), j.clone())))
        .collect();
    Ok(MomentTable {
        cartan: cartan.clone(),
        moments: fill(cartan, pairs)?,
        bounds: Some((max_l, max_j)),
    })
}

/// Moments for every `(ℓ, j)` with `ℓ` in `ells` and `j` in `js`.
pub fn build_moments_for(cartan: &Arc<CartanData>, ells: &[Vec<i64>], js: &[Vec<i64>]) -> Result<MomentTable> {
    let ells: BTreeSet<&Vec<i64>> = ells.iter().collect();
    let js: BTreeSet<&Vec<i64>> = js.iter().collect();
    let pairs = ells
        .iter()
        .flat_map(|l| js.iter().map(move |j| ((*l).clone(), (*j).clone())))
        .collect();
    Ok(MomentTable {
        cartan: cartan.clone(),
        moments: fill(cartan, pairs)?,
        bounds: None,
    })
}

/// `Σ_j c_j μ_{ℓ,j}`.
pub fn pair_q1(poly: &Q1Polynomial, ell: &[i64], moments: &MomentTable) -> Result<TPoly> {
    let mut acc = TPoly::zero();
    for (j, c) in poly.terms() {
        let mu = moments.get(ell, j)?;
        if !mu.is_zero() {
            acc += &(c * mu);
        }
    }
    Ok(acc)
}

/// `⟨0|p|ℓ⟩`.
pub fn vacuum_pair(p: &TorusElement, ell: &[i64], moments: &MomentTable) -> Result<TPoly> {
    pair_q1(&phi(p), ell, moments)
}

/// `∏_i ∏_α Q̂_{α,i}^{n_{α,i}}`, lower levels to the left.
pub fn kr_product(input: &FusionInput, table: &QSolutionTable) -> Result<TorusElement> {
    let max = input.max_level();
    if (max as i64) > table.n_max() {
        return Err(Error::InvalidInput(format!(
            "solution table reaches level {}, input needs {max}",
            table.n_max()
        )));
    }
    let mut acc = TorusElement::one(table.cartan());
    for i in 1..=max {
        for a in 1..=input.rank() {
            if let Some(&c) = input.n.get(&(a, i)) {
                acc = &acc * &table.q(a, i as i64).pow(c as u32);
            }
        }
    }
    Ok(acc)
}

/// Doubled exponent of `t^{Σ n_{α,i}λ_{αβ} + ½(Σ_α ℓ_α λ_{αα} + n·(λ⊗A)n)}`.
fn matrix_prefactor_doubled(input: &FusionInput, ell: &[i64]) -> i64 {
    let cartan = &input.cartan;
    let lam = &cartan.lambda;
    let mut s = 0;
    for (a, l) in ell.iter().enumerate() {
        s += l * lam[a][a];
    }
    for (&(a, i), &c) in &input.n {
        let c = c as i64;
        s += 2 * c * lam[a - 1].iter().sum::<i64>();
        for (&(b, j), &d) in &input.n {
            s += c * lam[a - 1][b - 1] * i.min(j) as i64 * d as i64;
        }
    }
    s
}

fn multiplicity_from_q1(input: &FusionInput, ell: &[i64], poly: &Q1Polynomial, moments: &MomentTable) -> Result<QPoly> {
    let pair = pair_q1(poly, ell, moments)?;
    let v = extract_v(&pair.shift_half(matrix_prefactor_doubled(input, ell)), input.cartan.delta)?;
    if !v.is_positive_polynomial() {
        return Err(Error::TheoremViolation(format!(
            "matrix-element multiplicity at ℓ = {ell:?} is not a positive polynomial in v: {v}"
        )));
    }
    Ok(v)
}

/// Graded multiplicity of `V_ℓ` from the vacuum matrix element of the KR product.
pub fn matrix_multiplicity(
    input: &FusionInput,
    ell: &[i64],
    table: &QSolutionTable,
    moments: &MomentTable,
) -> Result<QPoly> {
    check_weight(&input.cartan, ell, "weight")?;
    let poly = phi(&kr_product(input, table)?);
    multiplicity_from_q1(input, ell, &poly, moments)
}

fn decompose_from_q1(input: &FusionInput, poly: &Q1Polynomial, moments: &MomentTable) -> Result<MultiplicityResult> {
    let values: Vec<Result<(Vec<i64>, QPoly)>> = weight_polytope(input)
        .into_par_iter()
        .map(|ell| {
            let v = multiplicity_from_q1(input, &ell, poly, moments)?;
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
        method: Method::Matrix,
        k_used: input.k,
    })
}

/// All nonzero matrix-element multiplicities over the weight polytope.
pub fn fusion_decompose_matrix(
    input: &FusionInput,
    table: &QSolutionTable,
    moments: &MomentTable,
) -> Result<MultiplicityResult> {
    let poly = phi(&kr_product(input, table)?);
    decompose_from_q1(input, &poly, moments)
}

/// [`fusion_decompose_matrix`] with the solution table and exactly the
/// moments it needs computed on the spot.
pub fn decompose_matrix(input: &FusionInput) -> Result<MultiplicityResult> {
    let table = solve(&input.cartan, input.max_level().max(1) as i64)?;
    let poly = phi(&kr_product(input, &table)?);
    let js: Vec<Vec<i64>> = poly.support().cloned().collect();
    let moments = build_moments_for(&input.cartan, &weight_polytope(input), &js)?;
    decompose_from_q1(input, &poly, &moments)
}

/// Multiplicity of a single weight with only the needed moments.
pub fn multiplicity_matrix(input: &FusionInput, ell: &[i64]) -> Result<QPoly> {
    check_weight(&input.cartan, ell, "weight")?;
    let table = solve(&input.cartan, input.max_level().max(1) as i64)?;
    let poly = phi(&kr_product(input, &table)?);
    let js: Vec<Vec<i64>> = poly.support().cloned().collect();
    let moments = build_moments_for(&input.cartan, &[ell.to_vec()], &js)?;
    multiplicity_from_q1(input, ell, &poly, &moments)
}
