//! Simply-laced Cartan data and the index bookkeeping of the fermionic sums.
//!
//! Nodes are numbered from 1 in the Bourbaki convention:
//!
//! * `A_r`: chain `1 - 2 - ... - r`.
//! * `D_r`: chain `1 - ... - (r-2)`, with `r-1` and `r` both attached to `r-2`.
//! * `E_n`: chain `1 - 3 - 4 - 5 - ... - n`, with `2` attached to `4`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    D,
    E,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::D => "D",
            Family::E => "E",
        };
        f.write_str(s)
    }
}

/// Cartan matrix `C`, `δ = det C`, and `λ = δ C^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanData {
    pub label: Family,
    pub rank: usize,
    pub c: Vec<Vec<i64>>,
    pub delta: i64,
    pub lambda: Vec<Vec<i64>>,
    pub cinv: Vec<Vec<Ratio<i64>>>,
}

impl CartanData {
    /// `"A1"`, `"D4"`, ...
    pub fn name(&self) -> String {
        format!("{}{}", self.label, self.rank)
    }

    /// Nodes adjacent to `a` (0-based).
    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rank).filter(move |&b| b != a && self.c[a][b] != 0)
    }

    /// `Σ_β λ_{αβ}` for each α.
    pub fn lambda_row_sums(&self) -> Vec<i64> {
        self.lambda.iter().map(|r| r.iter().sum()).collect()
    }

    /// `C·v`.
    pub fn c_apply(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(&self.c, v)
    }

    /// `λ·v`.
    pub fn lambda_apply(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(&self.lambda, v)
    }

    /// `u·λ·w`.
    pub fn lambda_form(&self, u: &[i64], w: &[i64]) -> i64 {
        let mut s = 0;
        for (a, ua) in u.iter().enumerate() {
            if *ua == 0 {
                continue;
            }
            for (b, wb) in w.iter().enumerate() {
                s += ua * self.lambda[a][b] * wb;
            }
        }
        s
    }
}

impl fmt::Display for CartanData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label, self.rank)
    }
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn edges(label: Family, rank: usize) -> Vec<(usize, usize)> {
    match label {
        Family::A => (1..rank).map(|i| (i, i + 1)).collect(),
        Family::D => {
            let mut e: Vec<_> = (1..rank - 2).map(|i| (i, i + 1)).collect();
            e.push((rank - 2, rank - 1));
            e.push((rank - 2, rank));
            e
        }
        Family::E => {
            let mut e = vec![(1, 3), (2, 4)];
            e.extend((3..rank).map(|i| (i, i + 1)));
            e
        }
    }
}

/// Exact inverse by Gauss-Jordan elimination over the rationals.
fn rational_inverse(c: &[Vec<i64>]) -> Vec<Vec<Ratio<i64>>> {
    let n = c.len();
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    let mut m: Vec<Vec<Ratio<i64>>> = c
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<_> = row.iter().map(|&x| Ratio::from_integer(x)).collect();
            r.extend((0..n).map(|j| if i == j { one } else { zero }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| m[r][col] != zero).expect("singular Cartan matrix");
        m.swap(col, piv);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && m[r][col] != zero {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Builds Cartan data for `A_r (r ≥ 1)`, `D_r (r ≥ 4)` or `E_6, E_7, E_8`.
pub fn build_cartan(label: Family, rank: usize) -> Result<CartanData> {
    let ok = match label {
        Family::A => rank >= 1,
        Family::D => rank >= 4,
        Family::E => (6..=8).contains(&rank),
    };
    if !ok {
        let reason = match label {
            Family::A => "rank must be at least 1",
            Family::D => "rank must be at least 4",
            Family::E => "rank must be 6, 7 or 8",
        };
        return Err(Error::UnsupportedAlgebra {
            label: label.to_string(),
            rank,
            reason: reason.to_string(),
        });
    }
    let mut c = vec![vec![0i64; rank]; rank];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (a, b) in edges(label, rank) {
        c[a - 1][b - 1] = -1;
        c[b - 1][a - 1] = -1;
    }
    let delta = match label {
        Family::A => rank as i64 + 1,
        Family::D => 4,
        Family::E => 9 - rank as i64,
    };
    let cinv = rational_inverse(&c);
    let lambda: Vec<Vec<i64>> = cinv
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let y = *x * Ratio::from_integer(delta);
                    assert!(y.is_integer(), "δ·C^-1 must be integral");
                    y.to_integer()
                })
                .collect()
        })
        .collect();
    Ok(CartanData {
        label,
        rank,
        c,
        delta,
        lambda,
        cinv,
    })
}

/// Parses labels like `A1`, `d4`, `E8`.
pub fn parse_algebra(s: &str) -> Result<CartanData> {
    let s = s.trim();
    let mut chars = s.chars();
    let label = match chars.next().map(|c| c.to_ascii_uppercase()) {
        Some('A') => Family::A,
        Some('D') => Family::D,
        Some('E') => Family::E,
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown algebra '{s}' (expected A<r>, D<r> or E<r>)"
            )))
        }
    };
    let rank: usize = chars
        .as_str()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad rank in algebra '{s}'")))?;
    build_cartan(label, rank)
}

/// `k × k` matrix with entries `min(i, j)` (1-based levels).
pub fn min_matrix(k: usize) -> Vec<Vec<i64>> {
    (1..=k)
        .map(|i| (1..=k).map(|j| i.min(j) as i64).collect())
        .collect()
}

/// Counts `n_{α,i}` of KR modules, keyed by 1-based `(α, i)`.
pub type KrCounts = BTreeMap<(usize, usize), u64>;

/// Input to the multiplicity computations.
#[derive(Clone, Debug)]
pub struct FusionInput {
    pub cartan: Arc<CartanData>,
    pub n: KrCounts,
    pub lambda_weight: Option<Vec<i64>>,
    pub k: usize,
}

impl FusionInput {
    /// Validates the counts and fixes `k` (pass `None` to derive it).
    pub fn new(
        cartan: Arc<CartanData>,
        n: KrCounts,
        lambda_weight: Option<Vec<i64>>,
        k: Option<usize>,
    ) -> Result<Self> {
        let r = cartan.rank;
        for &(a, i) in n.keys() {
            if a < 1 || a > r || i < 1 {
                return Err(Error::InvalidInput(format!(
                    "KR index ({a},{i}) out of range for {}",
                    cartan.name()
                )));
            }
        }
        let n: KrCounts = n.into_iter().filter(|(_, c)| *c > 0).collect();
        if let Some(l) = &lambda_weight {
            if l.len() != r {
                return Err(Error::Shape(format!(
                    "weight has {} entries, algebra has rank {r}",
                    l.len()
                )));
            }
            if l.iter().any(|x| *x < 0) {
                return Err(Error::InvalidInput("weight must be dominant".into()));
            }
        }
        let mut input = FusionInput {
            cartan,
            n,
            lambda_weight,
            k: 1,
        };
        let max_level = input.max_level();
        input.k = match k {
            Some(k) if k == 0 || k < max_level => {
                return Err(Error::InvalidInput(format!(
                    "k = {k} below the largest KR level {max_level}"
                )))
            }
            Some(k) => k,
            None => crate::fermionic::auto_k(&input),
        };
        Ok(input)
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank
    }

    /// Largest level `i` with `n_{α,i} > 0` (0 when empty).
    pub fn max_level(&self) -> usize {
        self.n.keys().map(|&(_, i)| i).max().unwrap_or(0)
    }

    /// `n` as an `r × k` matrix (row α, column i-1).
    pub fn n_matrix(&self, k: usize) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; k]; self.rank()];
        for (&(a, i), &c) in &self.n {
            if i <= k {
                m[a - 1][i - 1] = c as i64;
            }
        }
        m
    }

    /// `N_α = Σ_i i·n_{α,i}`, the total highest weight.
    pub fn total_weight(&self) -> Vec<i64> {
        let mut w = vec![0i64; self.rank()];
        for (&(a, i), &c) in &self.n {
            w[a - 1] += i as i64 * c as i64;
        }
        w
    }

    /// Same input with a different truncation level.
    pub fn with_k(&self, k: usize) -> Self {
        FusionInput {
            k,
            ..self.clone()
        }
    }
}

/// Vectors `q_0`, `q` and `p` of the fermionic sums at truncation `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QVectors {
    pub q0: Vec<i64>,
    /// `q[α][j-1] = q_{α,j}`.
    pub q: Vec<Vec<i64>>,
    /// `p[α][j-1] = p_{α,j}`.
    pub p: Vec<Vec<i64>>,
}

fn check_shape(input: &FusionInput, m: &[Vec<i64>]) -> Result<()> {
    if m.len() != input.rank() || m.iter().any(|row| row.len() != input.k) {
        return Err(Error::Shape(format!(
            "summation vector must be {} x {}",
            input.rank(),
            input.k
        )));
    }
    if m.iter().flatten().any(|x| *x < 0) {
        return Err(Error::InvalidInput("summation vector must be nonnegative".into()));
    }
    Ok(())
}

/// `p = (I⊗A)n − (C⊗A)m` as an `r × k` matrix.
pub(crate) fn p_vector(cartan: &CartanData, n: &[Vec<i64>], m: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let r = cartan.rank;
    // d_{α,i} = n_{α,i} − Σ_β C_{αβ} m_{β,i}, then p_{α,j} = Σ_i min(i,j) d_{α,i}.
    let mut p = vec![vec![0i64; k]; r];
    for a in 0..r {
        let d: Vec<i64> = (0..k)
            .map(|i| n[a][i] - (0..r).map(|b| cartan.c[a][b] * m[b][i]).sum::<i64>())
            .collect();
        // Σ_i min(i,j) d_i = Σ_{s ≤ j} (Σ_{i ≥ s} d_i).
        let mut tail = vec![0i64; k + 1];
        for i in (0..k).rev() {
            tail[i] = tail[i + 1] + d[i];
        }
        let mut acc = 0;
        for j in 0..k {
            acc += tail[j];
            p[a][j] = acc;
        }
    }
    p
}

/// Computes `(q_0, q, p)` for summation vector `m` (shape `r × k`).
/// The weight `ℓ` defaults to zero when the input carries none.
pub fn q_vectors(input: &FusionInput, m: &[Vec<i64>]) -> Result<QVectors> {
    check_shape(input, m)?;
    let k = input.k;
    let r = input.rank();
    let zero = vec![0i64; r];
    let ell = input.lambda_weight.as_deref().unwrap_or(&zero);
    let p = p_vector(&input.cartan, &input.n_matrix(k), m, k);
    let q0: Vec<i64> = (0..r).map(|a| ell[a] - p[a][k - 1]).collect();
    let q = (0..r)
        .map(|a| p[a].iter().map(|x| q0[a] + x).collect())
        .collect();
    Ok(QVectors { q0, q, p })
}

/// `2·Q(m, n)` where `Q(m, n) = −½ m·(p + (I⊗A)n)`.
pub(crate) fn quadratic_form_doubled(
    n: &[Vec<i64>],
    m: &[Vec<i64>],
    p: &[Vec<i64>],
    k: usize,
) -> i64 {
    let mut s = 0i64;
    for (a, row) in m.iter().enumerate() {
        for (j, &mj) in row.iter().enumerate() {
            if mj == 0 {
                continue;
            }
            let an: i64 = (0..k).map(|i| (i.min(j) as i64 + 1) * n[a][i]).sum();
            s += mj * (p[a][j] + an);
        }
    }
    -s
}

/// A value in `½ℤ`, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn to_integer(self) -> Option<i64> {
        (self.0 % 2 == 0).then_some(self.0 / 2)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_integer() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}/2", self.0),
        }
    }
}

/// The quadratic form `Q(m, n) = −½ m·(p + (I⊗A)n)` of the fermionic sums.
pub fn quadratic_form(input: &FusionInput, m: &[Vec<i64>]) -> Result<HalfInt> {
    check_shape(input, m)?;
    let k = input.k;
    let n = input.n_matrix(k);
    let p = p_vector(&input.cartan, &n, m, k);
    Ok(HalfInt(quadratic_form_doubled(&n, m, &p, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn input(alg: (Family, usize), n: &[((usize, usize), u64)], ell: Vec<i64>, k: usize) -> FusionInput {
        let c = Arc::new(build_cartan(alg.0, alg.1).unwrap());
        FusionInput::new(c, n.iter().cloned().collect(), Some(ell), Some(k)).unwrap()
    }

    fn all_supported() -> Vec<CartanData> {
        let mut v = Vec::new();
        for r in 1..=8 {
            v.push(build_cartan(Family::A, r).unwrap());
        }
        for r in 4..=8 {
            v.push(build_cartan(Family::D, r).unwrap());
        }
        for r in 6..=8 {
            v.push(build_cartan(Family::E, r).unwrap());
        }
        v
    }

    #[test]
    fn known_lambda_matrices() {
        let a1 = build_cartan(Family::A, 1).unwrap();
        assert_eq!((a1.delta, a1.lambda.clone()), (2, vec![vec![1]]));
        let a2 = build_cartan(Family::A, 2).unwrap();
        assert_eq!((a2.delta, a2.lambda.clone()), (3, vec![vec![2, 1], vec![1, 2]]));
        let d4 = build_cartan(Family::D, 4).unwrap();
        assert_eq!(d4.delta, 4);
        assert_eq!(
            d4.lambda,
            vec![vec![4, 4, 2, 2], vec![4, 8, 4, 4], vec![2, 4, 4, 2], vec![2, 4, 2, 4]]
        );
    }

    #[test]
    fn unsupported_algebras_rejected() {
        assert!(build_cartan(Family::A, 0).is_err());
        assert!(build_cartan(Family::D, 3).is_err());
        assert!(build_cartan(Family::E, 5).is_err());
        assert!(build_cartan(Family::E, 9).is_err());
        assert!(parse_algebra("B2").is_err());
        assert_eq!(parse_algebra("e7").unwrap().delta, 2);
    }

    /// Determinant by cofactor expansion, independent of the elimination
    /// used for the inverse.
    fn det(m: &[Vec<i64>]) -> i64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum()
    }

    #[test]
    fn cartan_invariants() {
        for cd in all_supported() {
            let r = cd.rank;
            assert_eq!(det(&cd.c), cd.delta, "{cd}");
            for a in 0..r {
                assert_eq!(cd.c[a][a], 2);
                for b in 0..r {
                    assert_eq!(cd.c[a][b], cd.c[b][a]);
                    assert_eq!(cd.lambda[a][b], cd.lambda[b][a]);
                    assert!(cd.lambda[a][b] > 0, "{cd}");
                    if a != b {
                        assert!(cd.c[a][b] == 0 || cd.c[a][b] == -1);
                    }
                    let cl: i64 = (0..r).map(|g| cd.c[a][g] * cd.lambda[g][b]).sum();
                    assert_eq!(cl, if a == b { cd.delta } else { 0 });
                }
            }
            // A Dynkin tree has r-1 edges.
            let e: usize = (0..r).map(|a| cd.neighbors(a).count()).sum();
            assert_eq!(e, 2 * (r - 1));
        }
    }

    #[test]
    fn min_matrix_values() {
        assert_eq!(min_matrix(1), vec![vec![1]]);
        assert_eq!(min_matrix(2), vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(min_matrix(3), vec![vec![1, 1, 1], vec![1, 2, 2], vec![1, 2, 3]]);
    }

    #[test]
    fn q_vectors_examples() {
        let inp = input((Family::A, 1), &[((1, 2), 2)], vec![2], 2);
        let qv = q_vectors(&inp, &[vec![1, 0]]).unwrap();
        assert_eq!(qv.q0, vec![0]);
        assert_eq!(qv.p, vec![vec![0, 2]]);
        assert_eq!(quadratic_form(&inp, &[vec![1, 0]]).unwrap(), HalfInt(-2));

        let inp = input((Family::A, 2), &[], vec![0, 0], 3);
        let zero = vec![vec![0; 3]; 2];
        let qv = q_vectors(&inp, &zero).unwrap();
        assert_eq!(qv.q0, vec![0, 0]);
        assert!(qv.p.iter().flatten().all(|x| *x == 0));
        assert_eq!(quadratic_form(&inp, &zero).unwrap(), HalfInt(0));

        for (n1, ell, m1) in [(3u64, 1i64, 1i64), (4, 2, 0), (2, 5, 3)] {
            let inp = input((Family::A, 1), &[((1, 1), n1)], vec![ell], 1);
            let qv = q_vectors(&inp, &[vec![m1]]).unwrap();
            assert_eq!(qv.q0, vec![ell + 2 * m1 - n1 as i64]);
            assert_eq!(qv.q[0][0], ell);
        }
        assert!(q_vectors(&inp_shape_err(), &[vec![0, 0]]).is_err());
    }

    fn inp_shape_err() -> FusionInput {
        input((Family::A, 1), &[], vec![0], 1)
    }

    #[test]
    fn a1_quadratic_form_identity() {
        // Q(m,n) = m·A(m−n) for A1.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = rng.gen_range(1..=4);
            let n: Vec<i64> = (0..k).map(|_| rng.gen_range(0..4)).collect();
            let m: Vec<i64> = (0..k).map(|_| rng.gen_range(0..4)).collect();
            let counts: KrCounts = n
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(i, c)| ((1, i + 1), *c as u64))
                .collect();
            let c = Arc::new(build_cartan(Family::A, 1).unwrap());
            let inp = FusionInput::new(c, counts, Some(vec![0]), Some(k)).unwrap();
            let a = min_matrix(k);
            let expect: i64 = (0..k)
                .map(|i| m[i] * (0..k).map(|j| a[i][j] * (m[j] - n[j])).sum::<i64>())
                .sum();
            let got = quadratic_form(&inp, std::slice::from_ref(&m)).unwrap();
            assert_eq!(got, HalfInt(2 * expect));
        }
    }

    #[test]
    fn second_difference_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cd in [(Family::A, 2), (Family::A, 3), (Family::D, 4)] {
            for _ in 0..20 {
                let c = Arc::new(build_cartan(cd.0, cd.1).unwrap());
                let r = c.rank;
                let k = rng.gen_range(1..=4);
                let mut counts = KrCounts::new();
                for a in 1..=r {
                    for i in 1..=k {
                        let v = rng.gen_range(0..3);
                        if v > 0 {
                            counts.insert((a, i), v);
                        }
                    }
                }
                let ell: Vec<i64> = (0..r).map(|_| rng.gen_range(0..4)).collect();
                let inp = FusionInput::new(c.clone(), counts, Some(ell.clone()), Some(k)).unwrap();
                let m: Vec<Vec<i64>> = (0..r).map(|_| (0..k).map(|_| rng.gen_range(0..3)).collect()).collect();
                let qv = q_vectors(&inp, &m).unwrap();
                let n = inp.n_matrix(k);
                let qat = |a: usize, j: usize| -> i64 {
                    if j == 0 {
                        qv.q0[a]
                    } else {
                        qv.q[a][(j - 1).min(k - 1)]
                    }
                };
                for a in 0..r {
                    for j in 1..=k {
                        let lhs = qat(a, j - 1) + qat(a, j + 1) - 2 * qat(a, j);
                        let rhs: i64 = (0..r).map(|b| c.c[a][b] * m[b][j - 1]).sum::<i64>() - n[a][j - 1];
                        assert_eq!(lhs, rhs);
                    }
                    if qv.q0.iter().all(|x| *x == 0) {
                        assert_eq!(qv.q[a][k - 1], ell[a]);
                    }
                }
            }
        }
    }
}
