//! Solutions `Q̂_{α,n}` of the quantum Q-system
//!
//! `t^{λ_{αα}} Q̂_{α,n+1} Q̂_{α,n-1} = Q̂_{α,n}^2 − ∏_{β≠α} Q̂_{β,n}^{−C_{αβ}}`
//!
//! expressed over the fundamental seed `{Q̂_{α,0}, Q̂_{α,1}}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::qtorus::{ExpVec, TorusElement};
use crate::scalars::Int;

/// Memoized table of `Q̂_{α,n}` for `n ∈ [−1, n_max]`.
#[derive(Clone, Debug)]
pub struct QSolutionTable {
    cartan: Arc<CartanData>,
    entries: BTreeMap<(usize, i64), TorusElement>,
    n_max: i64,
}

impl QSolutionTable {
    pub fn cartan(&self) -> &Arc<CartanData> {
        &self.cartan
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// `Q̂_{α,n}` (1-based α).
    pub fn get(&self, alpha: usize, n: i64) -> Option<&TorusElement> {
        self.entries.get(&(alpha, n))
    }

    /// Like [`get`](Self::get) but panics when the entry is missing.
    pub fn q(&self, alpha: usize, n: i64) -> &TorusElement {
        self.get(alpha, n)
            .unwrap_or_else(|| panic!("Q[{alpha},{n}] not in table (n_max = {})", self.n_max))
    }

    pub fn entries(&self) -> &BTreeMap<(usize, i64), TorusElement> {
        &self.entries
    }

    /// `∏_{β≠α} Q̂_{β,n}^{−C_{αβ}}`.
    fn neighbor_product(&self, alpha: usize, n: i64) -> TorusElement {
        let mut acc = TorusElement::one(&self.cartan);
        for b in self.cartan.neighbors(alpha - 1) {
            let e = -self.cartan.c[alpha - 1][b];
            acc = &acc * &self.q(b + 1, n).pow(e as u32);
        }
        acc
    }

    /// Right-hand side `Q̂_{α,n}^2 − ∏_{β≠α} Q̂_{β,n}^{−C_{αβ}}`.
    pub fn relation_rhs(&self, alpha: usize, n: i64) -> TorusElement {
        let x = self.q(alpha, n);
        &(x * x) - &self.neighbor_product(alpha, n)
    }

    /// Computes levels up to `n_max` (no-op if already present).
    pub fn extend_to(&mut self, n_max: i64) -> Result<()> {
        let r = self.cartan.rank;
        while self.n_max < n_max {
            let n = self.n_max;
            let next: Vec<Result<TorusElement>> = (1..=r)
                .into_par_iter()
                .map(|a| {
                    let lam = self.cartan.lambda[a - 1][a - 1];
                    let rhs = self.relation_rhs(a, n);
                    let q = rhs.right_divide_exact(self.q(a, n - 1)).map_err(|e| {
                        Error::TheoremViolation(format!("Laurent property failed for Q[{a},{}]: {e}", n + 1))
                    })?;
                    Ok(q.shift_half(-2 * lam))
                })
                .collect();
            for (a, q) in (1..=r).zip(next) {
                self.entries.insert((a, n + 1), q?);
            }
            self.n_max = n + 1;
        }
        Ok(())
    }

    /// The classical images of all entries, scalars evaluated at `t = 1`.
    pub fn classical_specialization(&self) -> BTreeMap<(usize, i64), CommPoly> {
        self.entries
            .iter()
            .map(|(k, v)| (*k, CommPoly(v.eval_t_one())))
            .collect()
    }
}

/// Solves the quantum Q-system for `n ∈ [−1, n_max]`.
pub fn solve(cartan: &Arc<CartanData>, n_max: i64) -> Result<QSolutionTable> {
    if n_max < 1 {
        return Err(Error::InvalidInput(format!("n_max must be at least 1, got {n_max}")));
    }
    let r = cartan.rank;
    let mut entries = BTreeMap::new();
    for a in 1..=r {
        entries.insert((a, 0), TorusElement::generator(cartan, a, 0));
        entries.insert((a, 1), TorusElement::generator(cartan, a, 1));
    }
    let mut table = QSolutionTable {
        cartan: cartan.clone(),
        entries,
        n_max: 1,
    };
    // Q̂_{α,−1} = t^{−λ_{αα}} Q̂_{α,1}^{−1} (Q̂_{α,0}^2 − ∏_{η∼α} Q̂_{η,0}).
    for a in 1..=r {
        let lam = cartan.lambda[a - 1][a - 1];
        let inv = table.q(a, 1).monomial_inverse()?;
        let q = (&inv * &table.relation_rhs(a, 0)).shift_half(-2 * lam);
        table.entries.insert((a, -1), q);
    }
    table.extend_to(n_max)?;
    Ok(table)
}

/// Outcome of a structural check: empty `failures` means it passed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the defining relation at every `n ∈ [0, n_max − 1]`.
pub fn check_residual(table: &QSolutionTable) -> CheckReport {
    let mut rep = CheckReport::new("Q-system residual");
    for a in 1..=table.cartan.rank {
        let lam = table.cartan.lambda[a - 1][a - 1];
        for n in 0..table.n_max {
            let lhs = (table.q(a, n + 1) * table.q(a, n - 1)).shift_half(2 * lam);
            rep.record(lhs == table.relation_rhs(a, n), || format!("alpha={a} n={n}"));
        }
    }
    rep
}

/// Checks `Q̂_{α,n} Q̂_{β,n} = Q̂_{β,n} Q̂_{α,n}` and
/// `Q̂_{α,n} Q̂_{β,n+1} = t^{λ_{αβ}} Q̂_{β,n+1} Q̂_{α,n}` for `0 ≤ n < n_max`.
pub fn check_same_seed_commutation(table: &QSolutionTable) -> CheckReport {
    let r = table.cartan.rank;
    let cases: Vec<(usize, usize, i64)> = (1..=r)
        .flat_map(|a| (1..=r).flat_map(move |b| (0..table.n_max).map(move |n| (a, b, n))))
        .collect();
    let results: Vec<(usize, usize, i64, bool)> = cases
        .into_par_iter()
        .map(|(a, b, n)| {
            let (x, y, z) = (table.q(a, n), table.q(b, n), table.q(b, n + 1));
            let same = x * y == y * x;
            let lam = table.cartan.lambda[a - 1][b - 1];
            let cross = x * z == (z * x).shift_half(2 * lam);
            (a, b, n, same && cross)
        })
        .collect();
    let mut rep = CheckReport::new("same-seed commutation");
    for (a, b, n, ok) in results {
        rep.record(ok, || format!("alpha={a} beta={b} n={n}"));
    }
    rep
}

/// Checks `Q̂_{β,1} Q̂_{β,−1} = t^{−λ_{ββ}} (Q̂_{β,0}^2 − ∏_{η∼β} Q̂_{η,0})`.
pub fn check_qqone(table: &QSolutionTable) -> CheckReport {
    let mut rep = CheckReport::new("Q[1]Q[-1] identity");
    for b in 1..=table.cartan.rank {
        let lam = table.cartan.lambda[b - 1][b - 1];
        let lhs = table.q(b, 1) * table.q(b, -1);
        let rhs = table.relation_rhs(b, 0).shift_half(-2 * lam);
        rep.record(lhs == rhs, || format!("beta={b}"));
    }
    rep
}

fn require_a1(table: &QSolutionTable) -> Result<()> {
    if table.cartan.rank != 1 {
        return Err(Error::InvalidInput(format!(
            "check only defined for A1, got {}",
            table.cartan.name()
        )));
    }
    Ok(())
}

/// Checks `Q̂_{n+1} + t Q̂_{n−1} = (Q̂_1 Q̂_0^{−1} + t Q̂_{−1} Q̂_0^{−1}) Q̂_n`
/// for `0 ≤ n < n_max` (A1 only).
pub fn check_linear_recursion_a1(table: &QSolutionTable) -> Result<CheckReport> {
    require_a1(table)?;
    let q0_inv = table.q(1, 0).monomial_inverse()?;
    let coeff = &(table.q(1, 1) * &q0_inv) + &(table.q(1, -1) * &q0_inv).shift_half(2);
    let mut rep = CheckReport::new("A1 linear recursion");
    for n in 0..table.n_max {
        let lhs = table.q(1, n + 1) + &table.q(1, n - 1).shift_half(2);
        rep.record(lhs == &coeff * table.q(1, n), || format!("n={n}"));
    }
    Ok(rep)
}

/// Checks `Q̂_n(Q̂_j, Q̂_{j+1}) = Q̂_{n+j}` for every `n ∈ [−1, n_max − j]`
/// (A1 only), substituting the seed by the shifted pair.
pub fn check_translation_a1(table: &QSolutionTable, j: i64) -> Result<CheckReport> {
    require_a1(table)?;
    let img0 = [table.q(1, j).clone()];
    let img1 = [table.q(1, j + 1).clone()];
    let mut rep = CheckReport::new(&format!("A1 translation by {j}"));
    for n in -1..=(table.n_max - j) {
        if n + j < -1 {
            continue;
        }
        let got = table.q(1, n).substitute_laurent(&img0, &img1);
        rep.record(
            matches!(&got, Ok(x) if x == table.q(1, n + j)),
            || format!("n={n}"),
        );
    }
    Ok(rep)
}

/// Checks that each `Q̂_{α,n}` (`n ≤ n_max`) is a combination of
/// `∏_β Q̂_{β,−1}^{m_β} ∏_β Q̂_{β,1}^{k_β}` with Laurent coefficients in
/// `Q̂_{·,0}`: every group of monomials sharing a level-1 exponent `b` must
/// be left divisible by `∏_β Q̂_{β,−1}^{max(0,−b_β)}`.
pub fn check_minus_one_structure(table: &QSolutionTable, n_max: i64) -> CheckReport {
    let cartan = &table.cartan;
    let r = cartan.rank;
    let mut rep = CheckReport::new("negative level-1 powers come from Q[-1]");
    for a in 1..=r {
        for n in -1..=n_max.min(table.n_max) {
            let mut groups: BTreeMap<Vec<i32>, TorusElement> = BTreeMap::new();
            for (e, c) in table.q(a, n).terms() {
                groups
                    .entry(e[r..].to_vec())
                    .or_insert_with(|| TorusElement::zero(cartan))
                    .add_term(e.clone(), c);
            }
            let mut ok = true;
            for (b, g) in &groups {
                if b.iter().all(|x| *x >= 0) {
                    continue;
                }
                let mut d = TorusElement::one(cartan);
                for (beta, &x) in b.iter().enumerate() {
                    if x < 0 {
                        d = &d * &table.q(beta + 1, -1).pow((-x) as u32);
                    }
                }
                ok &= g.left_divide_exact(&d).is_ok();
            }
            rep.record(ok, || format!("alpha={a} n={n}"));
        }
    }
    rep
}

/// Commutative Laurent polynomial in the seed variables (the `t = 1` image).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommPoly(pub BTreeMap<ExpVec, Int>);

impl CommPoly {
    pub fn one(r: usize) -> Self {
        CommPoly([(crate::qtorus::zero_exp(r), Int::ONE)].into_iter().collect())
    }

    pub fn mul(&self, other: &CommPoly) -> CommPoly {
        let mut out: BTreeMap<ExpVec, Int> = BTreeMap::new();
        for (ex, cx) in &self.0 {
            for (ey, cy) in &other.0 {
                let e: ExpVec = ex.iter().zip(ey.iter()).map(|(a, b)| a + b).collect();
                *out.entry(e).or_insert(Int::ZERO) += &(cx * cy);
            }
        }
        out.retain(|_, c| !c.is_zero());
        CommPoly(out)
    }

    pub fn sub(&self, other: &CommPoly) -> CommPoly {
        let mut out = self.0.clone();
        for (e, c) in &other.0 {
            *out.entry(e.clone()).or_insert(Int::ZERO) -= c;
        }
        out.retain(|_, c| !c.is_zero());
        CommPoly(out)
    }
}

/// Checks that the `t = 1` images satisfy the classical Q-system
/// `Q_{α,n+1} Q_{α,n−1} = Q_{α,n}^2 − ∏_{β≠α} Q_{β,n}^{−C_{αβ}}`.
pub fn check_classical_specialization(table: &QSolutionTable) -> CheckReport {
    let cartan = &table.cartan;
    let r = cartan.rank;
    let cl = table.classical_specialization();
    let mut rep = CheckReport::new("classical Q-system at t=1");
    for a in 1..=r {
        for n in 0..table.n_max {
            let lhs = cl[&(a, n + 1)].mul(&cl[&(a, n - 1)]);
            let mut prod = CommPoly::one(r);
            for b in cartan.neighbors(a - 1) {
                for _ in 0..(-cartan.c[a - 1][b]) {
                    prod = prod.mul(&cl[&(b + 1, n)]);
                }
            }
            let rhs = cl[&(a, n)].mul(&cl[&(a, n)]).sub(&prod);
            rep.record(lhs == rhs, || format!("alpha={a} n={n}"));
        }
    }
    rep
}
