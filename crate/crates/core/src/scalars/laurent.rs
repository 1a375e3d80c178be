//! Sparse univariate Laurent polynomials with [`Int`] coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::int::Int;

/// `Σ c_e x^e` stored as `(e, c)` pairs sorted by `e`, no zero `c`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Laurent {
    terms: Vec<(i64, Int)>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, Int::ONE)
    }

    pub fn monomial(e: i64, c: Int) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Laurent {
                terms: vec![(e, c)],
            }
        }
    }

    pub fn constant(c: Int) -> Self {
        Self::monomial(0, c)
    }

    /// Builds from arbitrary `(exponent, coefficient)` pairs, merging repeats.
    pub fn from_terms<I: IntoIterator<Item = (i64, Int)>>(it: I) -> Self {
        let mut v: Vec<(i64, Int)> = it.into_iter().collect();
        v.sort_by_key(|(e, _)| *e);
        Laurent {
            terms: merge_sorted(v),
        }
    }

    pub fn terms(&self) -> &[(i64, Int)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(i64, Int)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Int {
        match self.terms.binary_search_by_key(&e, |(x, _)| *x) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|(e, _)| *e)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|(e, _)| *e)
    }

    /// Single term `c x^e`, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(i64, &Int)> {
        match self.terms.as_slice() {
            [(e, c)] => Some((*e, c)),
            _ => None,
        }
    }

    /// Multiplies by `x^s`.
    pub fn shift(&self, s: i64) -> Self {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (e + s, c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &Int) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    /// Applies `e ↦ f(e)` to every exponent. `f` must be injective.
    pub fn map_exponents<F: Fn(i64) -> i64>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (f(*e), c.clone())))
    }

    /// Value at `x = 1`.
    pub fn eval_one(&self) -> Int {
        let mut s = Int::ZERO;
        for (_, c) in &self.terms {
            s += c;
        }
        s
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`
    /// in the Laurent ring.
    pub fn div_exact(&self, d: &Laurent) -> Option<Laurent> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if let Some((de, dc)) = d.as_monomial() {
            let mut out = Vec::with_capacity(self.terms.len());
            for (e, c) in &self.terms {
                out.push((e - de, c.div_exact(dc)?));
            }
            return Some(Laurent { terms: out });
        }
        // Top-down long division; a valid quotient has exponents in
        // [min(P) - min(D), max(P) - max(D)].
        let (dmax, dlead) = d.terms.last().cloned().unwrap();
        let dmin = d.terms[0].0;
        let floor = self.terms[0].0 - dmin;
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((rmax, rlead)) = rem.terms.last().cloned() {
            let qe = rmax - dmax;
            if qe < floor {
                return None;
            }
            let qc = rlead.div_exact(&dlead)?;
            let sub = Laurent {
                terms: d.terms.iter().map(|(e, c)| (e + qe, c * &qc)).collect(),
            };
            rem -= &sub;
            quot.push((qe, qc));
        }
        quot.reverse();
        Some(Laurent { terms: quot })
    }
}

fn merge_sorted(v: Vec<(i64, Int)>) -> Vec<(i64, Int)> {
    let mut out: Vec<(i64, Int)> = Vec::with_capacity(v.len());
    for (e, c) in v {
        match out.last_mut() {
            Some((le, lc)) if *le == e => *lc += &c,
            _ => {
                if let Some((_, lc)) = out.last() {
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                out.push((e, c));
            }
        }
    }
    if let Some((_, lc)) = out.last() {
        if lc.is_zero() {
            out.pop();
        }
    }
    out
}

fn add_impl(a: &[(i64, Int)], b: &[(i64, Int)], negate_b: bool) -> Vec<(i64, Int)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
            out.push((b[j].0, c));
            j += 1;
        } else {
            let c = if negate_b {
                &a[i].1 - &b[j].1
            } else {
                &a[i].1 + &b[j].1
            };
            if !c.is_zero() {
                out.push((a[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl<'a> Add<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn add(self, rhs: &'a Laurent) -> Laurent {
        Laurent {
            terms: add_impl(&self.terms, &rhs.terms, false),
        }
    }
}

impl<'a> Sub<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &'a Laurent) -> Laurent {
        Laurent {
            terms: add_impl(&self.terms, &rhs.terms, true),
        }
    }
}

impl<'a> Mul<&'a Laurent> for &'a Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &'a Laurent) -> Laurent {
        if self.is_zero() || rhs.is_zero() {
            return Laurent::zero();
        }
        if let Some((e, c)) = rhs.as_monomial() {
            return Laurent {
                terms: self.terms.iter().map(|(x, y)| (x + e, y * c)).collect(),
            };
        }
        if let Some((e, c)) = self.as_monomial() {
            return Laurent {
                terms: rhs.terms.iter().map(|(x, y)| (x + e, c * y)).collect(),
            };
        }
        let lo = self.terms[0].0 + rhs.terms[0].0;
        let hi = self.terms[self.terms.len() - 1].0 + rhs.terms[rhs.terms.len() - 1].0;
        let span = (hi - lo + 1) as usize;
        if span <= 2 * self.terms.len() * rhs.terms.len() + 64 {
            // Dense convolution when the result is not too sparse.
            let mut dense = vec![Int::ZERO; span];
            for (ea, ca) in &self.terms {
                for (eb, cb) in &rhs.terms {
                    dense[(ea + eb - lo) as usize] += &(ca * cb);
                }
            }
            return Laurent {
                terms: dense
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (lo + i as i64, c))
                    .collect(),
            };
        }
        let mut v = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                v.push((ea + eb, ca * cb));
            }
        }
        v.sort_by_key(|(e, _)| *e);
        Laurent {
            terms: merge_sorted(v),
        }
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(self, rhs: Laurent) -> Laurent {
        &self + &rhs
    }
}

impl Sub for Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Laurent) -> Laurent {
        &self - &rhs
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}

impl Neg for Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        -&self
    }
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        if rhs.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = rhs.clone();
            return;
        }
        self.terms = add_impl(&self.terms, &rhs.terms, false);
    }
}

impl SubAssign<&Laurent> for Laurent {
    fn sub_assign(&mut self, rhs: &Laurent) {
        if rhs.is_zero() {
            return;
        }
        self.terms = add_impl(&self.terms, &rhs.terms, true);
    }
}

/// Renders in ascending exponent order with the given variable name and
/// exponent formatter, e.g. `"1 + v + v^2"` or `"-t^-1 + 2*t^3/2"`.
pub(crate) fn render<F: Fn(i64) -> String>(
    terms: &[(i64, Int)],
    var: &str,
    is_const: impl Fn(i64) -> bool,
    is_unit_exp: impl Fn(i64) -> bool,
    fmt_exp: F,
) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (idx, (e, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if idx == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if is_const(*e) {
            s.push_str(&mag.to_string());
            continue;
        }
        if !mag.is_one() {
            s.push_str(&mag.to_string());
            s.push('*');
        }
        s.push_str(var);
        if !is_unit_exp(*e) {
            s.push('^');
            s.push_str(&fmt_exp(*e));
        }
    }
    s
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(
            &self.terms,
            "q",
            |e| e == 0,
            |e| e == 1,
            |e| e.to_string(),
        ))
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
