//! Coefficient ring: Laurent polynomials in `t^{1/2}` over big integers,
//! polynomials in `v = q^{-1}`, q-binomials and the `q = t^{-δ}` embedding.

mod int;
mod laurent;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub use int::Int;
pub use laurent::Laurent;

use crate::error::{Error, Result};

/// Laurent polynomial in `t^{1/2}`. Exponents are stored doubled, so the
/// term `c t^{e/2}` is kept as `(e, c)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TPoly(Laurent);

impl TPoly {
    pub fn zero() -> Self {
        TPoly(Laurent::zero())
    }

    pub fn one() -> Self {
        TPoly(Laurent::one())
    }

    /// `t^e`.
    pub fn t_pow(e: i64) -> Self {
        TPoly(Laurent::monomial(2 * e, Int::ONE))
    }

    /// `t^{e2/2}`.
    pub fn t_pow_half(e2: i64) -> Self {
        TPoly(Laurent::monomial(e2, Int::ONE))
    }

    pub fn constant(c: Int) -> Self {
        TPoly(Laurent::constant(c))
    }

    pub fn from_i64(c: i64) -> Self {
        Self::constant(Int::from(c))
    }

    /// `c t^{e2/2}`.
    pub fn monomial_half(e2: i64, c: Int) -> Self {
        TPoly(Laurent::monomial(e2, c))
    }

    /// Builds from `(doubled exponent, coefficient)` pairs.
    pub fn from_half_terms<I: IntoIterator<Item = (i64, Int)>>(it: I) -> Self {
        TPoly(Laurent::from_terms(it))
    }

    /// Builds from integer `t`-exponents.
    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        TPoly(Laurent::from_terms(
            it.into_iter().map(|(e, c)| (2 * e, Int::from(c))),
        ))
    }

    /// Terms as `(doubled exponent, coefficient)`, ascending.
    pub fn half_terms(&self) -> &[(i64, Int)] {
        self.0.terms()
    }

    pub fn as_laurent_half(&self) -> &Laurent {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiplies by `t^{e2/2}`.
    pub fn shift_half(&self, e2: i64) -> Self {
        if e2 == 0 {
            return self.clone();
        }
        TPoly(self.0.shift(e2))
    }

    pub fn scale(&self, k: &Int) -> Self {
        TPoly(self.0.scale(k))
    }

    /// `c t^{e2/2}` when the polynomial is a single term.
    pub fn as_monomial_half(&self) -> Option<(i64, &Int)> {
        self.0.as_monomial()
    }

    pub fn div_exact(&self, d: &TPoly) -> Option<TPoly> {
        self.0.div_exact(&d.0).map(TPoly)
    }

    /// Value at `t = 1`.
    pub fn eval_one(&self) -> Int {
        self.0.eval_one()
    }

    pub fn pow(&self, n: u32) -> Self {
        TPoly(self.0.pow(n))
    }
}

/// Polynomial in `v = q^{-1}`; the reporting type for graded multiplicities.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Laurent);

impl QPoly {
    pub fn zero() -> Self {
        QPoly(Laurent::zero())
    }

    pub fn one() -> Self {
        QPoly(Laurent::one())
    }

    pub fn from_laurent(l: Laurent) -> Self {
        QPoly(l)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        QPoly(Laurent::from_terms(
            it.into_iter().map(|(e, c)| (e, Int::from(c))),
        ))
    }

    pub fn as_laurent(&self) -> &Laurent {
        &self.0
    }

    pub fn terms(&self) -> &[(i64, Int)] {
        self.0.terms()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn eval_one(&self) -> Int {
        self.0.eval_one()
    }

    /// True when all exponents and coefficients are nonnegative.
    pub fn is_positive_polynomial(&self) -> bool {
        self.0
            .terms()
            .iter()
            .all(|(e, c)| *e >= 0 && !c.is_negative())
    }
}

macro_rules! ring_ops {
    ($ty:ident) => {
        impl<'a> Add<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn add(self, rhs: &'a $ty) -> $ty {
                $ty(&self.0 + &rhs.0)
            }
        }
        impl<'a> Sub<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn sub(self, rhs: &'a $ty) -> $ty {
                $ty(&self.0 - &rhs.0)
            }
        }
        impl<'a> Mul<&'a $ty> for &'a $ty {
            type Output = $ty;
            fn mul(self, rhs: &'a $ty) -> $ty {
                $ty(&self.0 * &rhs.0)
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-&self.0)
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                $ty(-&self.0)
            }
        }
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                $ty(&self.0 + &rhs.0)
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                $ty(&self.0 - &rhs.0)
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                $ty(&self.0 * &rhs.0)
            }
        }
        impl AddAssign<&$ty> for $ty {
            fn add_assign(&mut self, rhs: &$ty) {
                self.0 += &rhs.0;
            }
        }
        impl SubAssign<&$ty> for $ty {
            fn sub_assign(&mut self, rhs: &$ty) {
                self.0 -= &rhs.0;
            }
        }
        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }
    };
}

ring_ops!(TPoly);
ring_ops!(QPoly);

fn fmt_half(e2: i64) -> String {
    if e2 % 2 == 0 {
        (e2 / 2).to_string()
    } else {
        format!("{e2}/2")
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&laurent::render(
            self.0.terms(),
            "t",
            |e| e == 0,
            |e| e == 2,
            fmt_half,
        ))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&laurent::render(
            self.0.terms(),
            "v",
            |e| e == 0,
            |e| e == 1,
            |e| e.to_string(),
        ))
    }
}

/// Coefficient of `x^m` in `(q^{p+1} x; q)_∞ / (x; q)_∞`, as a Laurent
/// polynomial in `q`. That is `∏_{i=0}^{p} (1 - q^i x)^{-1}` for `p ≥ 0` and
/// `∏_{i=0}^{-p-2} (1 - q^{i+p+1} x)` for `p < 0`; in both cases it equals
/// `∏_{i=1}^{m} (1 - q^{p+i}) / (1 - q^i)`, so it vanishes for `-m ≤ p < 0`.
pub fn qbinomial(m: i64, p: i64) -> Result<Laurent> {
    if m < 0 {
        return Err(Error::InvalidInput(format!(
            "q-binomial with negative m = {m}"
        )));
    }
    let m = m as usize;
    if m == 0 {
        return Ok(Laurent::one());
    }
    if p < 0 && m as i64 >= -p {
        return Ok(Laurent::zero());
    }
    let mut c = vec![Laurent::zero(); m + 1];
    c[0] = Laurent::one();
    if p >= 0 {
        // Multiply by 1/(1 - q^i x) = Σ_s q^{is} x^s: c[j] += q^i c[j-1], ascending j.
        for i in 0..=p {
            for j in 1..=m {
                let add = c[j - 1].shift(i);
                c[j] += &add;
            }
        }
    } else {
        for i in 0..(-p - 1) {
            let e = i + p + 1;
            for j in (1..=m).rev() {
                let sub = c[j - 1].shift(e);
                c[j] -= &sub;
            }
        }
    }
    Ok(c.swap_remove(m))
}

/// Memo table for [`qbinomial`] keyed by `(m, p)`.
#[derive(Default)]
pub struct QBinomialCache {
    map: HashMap<(i64, i64), Laurent>,
}

impl QBinomialCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, m: i64, p: i64) -> Result<&Laurent> {
        match self.map.entry((m, p)) {
            std::collections::hash_map::Entry::Occupied(e) => Ok(e.into_mut()),
            std::collections::hash_map::Entry::Vacant(e) => Ok(e.insert(qbinomial(m, p)?)),
        }
    }
}

/// Rewrites a polynomial in `q` as a polynomial in `t` via `q = t^{-δ}`.
pub fn embed_q(qp: &Laurent, delta: i64) -> TPoly {
    TPoly(qp.map_exponents(|e| -2 * delta * e))
}

/// Rewrites a polynomial in `t` as a polynomial in `v = q^{-1} = t^{δ}`.
/// Fails with a theorem violation if some exponent is not a multiple of δ.
pub fn extract_v(tp: &TPoly, delta: i64) -> Result<QPoly> {
    let mut out = Vec::with_capacity(tp.len());
    for (e2, c) in tp.half_terms() {
        if e2 % (2 * delta) != 0 {
            return Err(Error::TheoremViolation(format!(
                "t-exponent {} of {} is not a multiple of {}",
                fmt_half(*e2),
                tp,
                delta
            )));
        }
        out.push((e2 / (2 * delta), c.clone()));
    }
    Ok(QPoly(Laurent::from_terms(out)))
}

/// Rewrites a polynomial in `v = t^{δ}` as a polynomial in `t`.
pub fn v_to_t(vp: &QPoly, delta: i64) -> TPoly {
    TPoly(vp.0.map_exponents(|e| 2 * delta * e))
}

/// Converts a polynomial in `q` to a polynomial in `v = q^{-1}`.
pub fn q_to_v(qp: &Laurent) -> QPoly {
    QPoly(qp.map_exponents(|e| -e))
}
