//! Quantum torus on the seed `{Q̂_{α,0}, Q̂_{α,1}}`.
//!
//! Generators satisfy `Q̂_{α,0} Q̂_{β,1} = t^{λ_{αβ}} Q̂_{β,1} Q̂_{α,0}`, and
//! generators of the same level commute. Elements are kept in normal order:
//! a monomial with exponent vector `(a, b)` and scalar `c` stands for
//! `c · ∏_α Q̂_{α,0}^{a_α} · ∏_α Q̂_{α,1}^{b_α}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::cartan::CartanData;
use crate::error::{Error, Result};
use crate::scalars::{Int, TPoly};

/// Exponents `(a_1..a_r, b_1..b_r)`: level-0 block first, then level-1.
/// Ordered lexicographically, which is a group order on `ℤ^{2r}`.
pub type ExpVec = SmallVec<[i32; 16]>;

/// Product work (term pairs) above which multiplication is split across threads.
const PAR_THRESHOLD: usize = 1 << 14;

pub fn zero_exp(r: usize) -> ExpVec {
    SmallVec::from_elem(0, 2 * r)
}

/// Exponent vector of the generator `Q̂_{α,level}` (1-based α, level 0 or 1).
pub fn generator_exp(r: usize, alpha: usize, level: usize) -> ExpVec {
    assert!(level <= 1 && (1..=r).contains(&alpha));
    let mut e = zero_exp(r);
    e[level * r + alpha - 1] = 1;
    e
}

fn exp_add(x: &ExpVec, y: &ExpVec) -> ExpVec {
    x.iter().zip(y.iter()).map(|(a, b)| a + b).collect()
}

fn exp_sub(x: &ExpVec, y: &ExpVec) -> ExpVec {
    x.iter().zip(y.iter()).map(|(a, b)| a - b).collect()
}

/// `λ·a` for the level-0 block of `e`.
fn lambda_a(cartan: &CartanData, e: &ExpVec) -> SmallVec<[i64; 8]> {
    let r = cartan.rank;
    (0..r)
        .map(|x| (0..r).map(|y| cartan.lambda[x][y] * e[y] as i64).sum())
        .collect()
}

fn dot_b(e: &ExpVec, r: usize, v: &[i64]) -> i64 {
    (0..r).map(|x| e[r + x] as i64 * v[x]).sum()
}

/// Reorder exponent `−b_u·λ·a_w` picked up by the product `u · w`.
pub fn reorder_exponent(cartan: &CartanData, u: &ExpVec, w: &ExpVec) -> i64 {
    let r = cartan.rank;
    let mut s = 0i64;
    for x in 0..r {
        let bx = u[r + x] as i64;
        if bx == 0 {
            continue;
        }
        for y in 0..r {
            s += bx * cartan.lambda[x][y] * w[y] as i64;
        }
    }
    -s
}

/// Product of two normal-ordered monomials.
pub fn mono_product(
    cartan: &CartanData,
    u: (&ExpVec, &TPoly),
    w: (&ExpVec, &TPoly),
) -> (ExpVec, TPoly) {
    let s = reorder_exponent(cartan, u.0, w.0);
    (exp_add(u.0, w.0), (u.1 * w.1).shift_half(2 * s))
}

/// Normal-ordered non-commutative Laurent polynomial over the seed.
#[derive(Clone)]
pub struct TorusElement {
    cartan: Arc<CartanData>,
    terms: BTreeMap<ExpVec, TPoly>,
}

impl PartialEq for TorusElement {
    fn eq(&self, other: &Self) -> bool {
        same_algebra(&self.cartan, &other.cartan) && self.terms == other.terms
    }
}

impl Eq for TorusElement {}

fn same_algebra(x: &Arc<CartanData>, y: &Arc<CartanData>) -> bool {
    Arc::ptr_eq(x, y) || x == y
}

impl TorusElement {
    pub fn zero(cartan: &Arc<CartanData>) -> Self {
        TorusElement {
            cartan: cartan.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(cartan: &Arc<CartanData>) -> Self {
        Self::scalar(cartan, TPoly::one())
    }

    pub fn scalar(cartan: &Arc<CartanData>, c: TPoly) -> Self {
        Self::monomial(cartan, zero_exp(cartan.rank), c)
    }

    pub fn monomial(cartan: &Arc<CartanData>, e: ExpVec, c: TPoly) -> Self {
        assert_eq!(e.len(), 2 * cartan.rank, "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        TorusElement {
            cartan: cartan.clone(),
            terms,
        }
    }

    /// The generator `Q̂_{α,level}` (1-based α, level 0 or 1).
    pub fn generator(cartan: &Arc<CartanData>, alpha: usize, level: usize) -> Self {
        Self::monomial(cartan, generator_exp(cartan.rank, alpha, level), TPoly::one())
    }

    /// Builds from `(a, b, scalar)` triples, summing repeated monomials.
    pub fn from_terms<I>(cartan: &Arc<CartanData>, it: I) -> Self
    where
        I: IntoIterator<Item = (ExpVec, TPoly)>,
    {
        let mut out = Self::zero(cartan);
        for (e, c) in it {
            assert_eq!(e.len(), 2 * cartan.rank, "exponent vector length");
            out.add_term(e, &c);
        }
        out
    }

    pub fn cartan(&self) -> &Arc<CartanData> {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank
    }

    pub fn terms(&self) -> &BTreeMap<ExpVec, TPoly> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<ExpVec, TPoly> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &ExpVec) -> TPoly {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// Adds `c` times the monomial `e`, keeping the map canonical.
    pub fn add_term(&mut self, e: ExpVec, c: &TPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The single monomial, if the element has exactly one term.
    pub fn as_monomial(&self) -> Option<(&ExpVec, &TPoly)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Lexicographically largest monomial.
    pub fn leading(&self) -> Option<(&ExpVec, &TPoly)> {
        self.terms.iter().next_back()
    }

    /// Lexicographically smallest monomial.
    pub fn trailing(&self) -> Option<(&ExpVec, &TPoly)> {
        self.terms.iter().next()
    }

    /// Componentwise minimum and maximum exponents over the support.
    pub fn exponent_box(&self) -> Option<(ExpVec, ExpVec)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for e in it {
            for i in 0..e.len() {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        Some((lo, hi))
    }

    pub fn scale(&self, c: &TPoly) -> Self {
        if c.is_zero() {
            return Self::zero(&self.cartan);
        }
        TorusElement {
            cartan: self.cartan.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiplies every scalar by `t^{e2/2}`.
    pub fn shift_half(&self, e2: i64) -> Self {
        TorusElement {
            cartan: self.cartan.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x.shift_half(e2)))
                .collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_algebra(&self.cartan, &other.cartan) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(self.cartan.name(), other.cartan.name()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), &-c);
        }
        Ok(out)
    }

    /// Product `self · other`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let cartan = &self.cartan;
        let r = cartan.rank;
        if self.is_zero() || other.is_zero() {
            return Self::zero(cartan);
        }
        // Reorder factor only involves λ·a of the right factor.
        let right: Vec<(&ExpVec, &TPoly, SmallVec<[i64; 8]>)> = other
            .terms
            .iter()
            .map(|(e, c)| (e, c, lambda_a(cartan, e)))
            .collect();
        let accumulate = |chunk: &[(&ExpVec, &TPoly)]| {
            let mut acc: HashMap<ExpVec, TPoly> = HashMap::with_capacity(chunk.len() * right.len());
            for (eu, cu) in chunk {
                for (ew, cw, la) in &right {
                    let s = -dot_b(eu, r, la);
                    let c = (*cu * *cw).shift_half(2 * s);
                    let e = exp_add(eu, ew);
                    match acc.entry(e) {
                        std::collections::hash_map::Entry::Vacant(v) => {
                            v.insert(c);
                        }
                        std::collections::hash_map::Entry::Occupied(mut o) => {
                            *o.get_mut() += &c;
                        }
                    }
                }
            }
            acc
        };
        let left: Vec<(&ExpVec, &TPoly)> = self.terms.iter().collect();
        let work = left.len() * right.len();
        let mut terms = BTreeMap::new();
        if work >= PAR_THRESHOLD && left.len() > 1 {
            let chunk = (left.len() / (4 * rayon::current_num_threads())).max(1);
            let parts: Vec<HashMap<ExpVec, TPoly>> = left.par_chunks(chunk).map(accumulate).collect();
            for part in parts {
                for (e, c) in part {
                    match terms.entry(e) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            v.insert(c);
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            let x: &mut TPoly = o.get_mut();
                            *x += &c;
                        }
                    }
                }
            }
        } else {
            terms.extend(accumulate(&left));
        }
        terms.retain(|_, c: &mut TPoly| !c.is_zero());
        TorusElement {
            cartan: cartan.clone(),
            terms,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.cartan);
        for _ in 0..n {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Two-sided inverse of a single monomial: `(a, b; c)^{-1} = (−a, −b; t^{−b·λ·a} c^{-1})`.
    /// Fails unless the scalar is a unit `±t^{e/2}`.
    pub fn monomial_inverse(&self) -> Result<Self> {
        let (e, c) = self
            .as_monomial()
            .ok_or_else(|| Error::NonMonomialInverse(format!("{self}")))?;
        let (ce, cc) = c
            .as_monomial_half()
            .filter(|(_, cc)| cc.abs().is_one())
            .ok_or_else(|| Error::InexactDivision(format!("scalar {c} is not a unit")))?;
        let neg: ExpVec = e.iter().map(|x| -x).collect();
        let s = reorder_exponent(&self.cartan, e, e);
        let scalar = TPoly::monomial_half(-ce + 2 * s, cc.clone());
        Ok(Self::monomial(&self.cartan, neg, scalar))
    }

    /// Integer power, negative exponents allowed for monomials.
    pub fn pow_i(&self, n: i32) -> Result<Self> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.monomial_inverse()?.pow((-n) as u32))
        }
    }

    /// `R` with `R · D = self`, or an inexact-division error.
    pub fn right_divide_exact(&self, d: &Self) -> Result<Self> {
        self.check_same(d)?;
        self.divide_exact(d, Side::Right)
    }

    /// `X` with `D · X = self`, or an inexact-division error.
    pub fn left_divide_exact(&self, d: &Self) -> Result<Self> {
        self.check_same(d)?;
        self.divide_exact(d, Side::Left)
    }

    fn divide_exact(&self, d: &Self, side: Side) -> Result<Self> {
        let cartan = &self.cartan;
        if d.is_zero() {
            return Err(Error::InexactDivision("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero(cartan));
        }
        if d.as_monomial().is_some() {
            if let Ok(inv) = d.monomial_inverse() {
                return Ok(match side {
                    Side::Right => self.mul_unchecked(&inv),
                    Side::Left => inv.mul_unchecked(self),
                });
            }
        }
        let (p_lo, p_hi) = self.exponent_box().unwrap();
        let (d_lo, d_hi) = d.exponent_box().unwrap();
        let lo = exp_sub(&p_lo, &d_lo);
        let hi = exp_sub(&p_hi, &d_hi);
        let floor = exp_sub(self.trailing().unwrap().0, d.trailing().unwrap().0);
        let (d_lead, d_coeff) = d.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();

        let fail = |why: &str| {
            Err(Error::InexactDivision(format!(
                "{} is not {} divisible by {} ({why})",
                self,
                match side {
                    Side::Right => "right",
                    Side::Left => "left",
                },
                d
            )))
        };

        let mut rem = self.terms.clone();
        let mut quot = Self::zero(cartan);
        while let Some((r_lead, r_coeff)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let qe = exp_sub(&r_lead, &d_lead);
            if qe < floor {
                return fail("remainder below the lexicographic bound");
            }
            if (0..qe.len()).any(|i| qe[i] < lo[i] || qe[i] > hi[i]) {
                return fail("quotient monomial outside the Newton box");
            }
            let s = match side {
                Side::Right => reorder_exponent(cartan, &qe, &d_lead),
                Side::Left => reorder_exponent(cartan, &d_lead, &qe),
            };
            let denom = d_coeff.shift_half(2 * s);
            let qc = match r_coeff.div_exact(&denom) {
                Some(c) => c,
                None => return fail("scalar coefficient not divisible"),
            };
            let qm = Self::monomial(cartan, qe.clone(), qc.clone());
            let prod = match side {
                Side::Right => qm.mul_unchecked(d),
                Side::Left => d.mul_unchecked(&qm),
            };
            for (e, c) in prod.terms {
                match rem.entry(e) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(-c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= &c;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                }
            }
            quot.add_term(qe, &qc);
        }
        Ok(quot)
    }

    /// Applies the ring map sending `Q̂_{α,0} ↦ images0[α]` and
    /// `Q̂_{α,1} ↦ images1[α]`. Negative powers require monomial images.
    pub fn substitute(&self, images0: &[TorusElement], images1: &[TorusElement]) -> Result<Self> {
        let r = self.rank();
        check_images(self, images0, images1)?;
        let target = images0[0].cartan.clone();
        let mut cache = PowerCache::new(images0, images1);
        let mut out = Self::zero(&target);
        for (e, c) in &self.terms {
            let mut m = Self::scalar(&target, c.clone());
            for (idx, &x) in e.iter().enumerate() {
                if x != 0 {
                    let (level, alpha) = (idx / r, idx % r);
                    let p = cache.power(level, alpha, x)?;
                    m = m.mul_unchecked(p);
                }
            }
            for (me, mc) in m.terms {
                out.add_term(me, &mc);
            }
        }
        Ok(out)
    }

    /// Like [`substitute`](Self::substitute), but also accepts negative powers
    /// of non-monomial images provided the image of `self` is a Laurent
    /// polynomial. Writes `self = M·y` with `M` a monomial carrying every
    /// negative exponent and `y` a polynomial, then solves `φ(M^{-1})·Z = φ(y)`
    /// by exact left division.
    pub fn substitute_laurent(&self, images0: &[TorusElement], images1: &[TorusElement]) -> Result<Self> {
        check_images(self, images0, images1)?;
        let Some((lo, _)) = self.exponent_box() else {
            return Ok(Self::zero(images0[0].cartan()));
        };
        let shift: ExpVec = lo.iter().map(|x| (*x).min(0)).collect();
        if shift.iter().all(|x| *x == 0) {
            return self.substitute(images0, images1);
        }
        let m = Self::monomial(&self.cartan, shift, TPoly::one());
        let m_inv = m.monomial_inverse()?;
        let y = m_inv.mul_unchecked(self);
        let img_y = y.substitute(images0, images1)?;
        let img_m_inv = m_inv.substitute(images0, images1)?;
        img_y.left_divide_exact(&img_m_inv)
    }

    /// Scalars evaluated at `t = 1`: the commutative image.
    pub fn eval_t_one(&self) -> BTreeMap<ExpVec, Int> {
        self.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.eval_one()))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Normal-ordered rendering, leading monomial first, e.g.
    /// `t*Q[1,0]^-1*Q[1,1]^2 - t^-1*Q[1,0]^-1`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let r = self.rank();
        let mut s = String::new();
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let mut factors: Vec<String> = Vec::new();
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let g = format!("Q[{},{}]", i % r + 1, i / r);
                factors.push(if x == 1 { g } else { format!("{g}^{x}") });
            }
            let (neg, scalar) = match c.as_monomial_half() {
                Some((_, cc)) if cc.is_negative() => (true, (-c).to_string()),
                Some(_) => (false, c.to_string()),
                None => (false, format!("({c})")),
            };
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if scalar != "1" || factors.is_empty() {
                factors.insert(0, scalar);
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

fn check_images(x: &TorusElement, images0: &[TorusElement], images1: &[TorusElement]) -> Result<()> {
    let r = x.rank();
    if images0.len() != r || images1.len() != r {
        return Err(Error::Shape(format!("substitution needs {r} images per level")));
    }
    let target = &images0[0].cartan;
    for im in images0.iter().chain(images1) {
        if !same_algebra(target, &im.cartan) {
            return Err(Error::AlgebraMismatch(target.name(), im.cartan.name()));
        }
    }
    Ok(())
}

struct PowerCache<'a> {
    images: [&'a [TorusElement]; 2],
    cache: HashMap<(usize, usize, i32), TorusElement>,
}

impl<'a> PowerCache<'a> {
    fn new(images0: &'a [TorusElement], images1: &'a [TorusElement]) -> Self {
        PowerCache {
            images: [images0, images1],
            cache: HashMap::new(),
        }
    }

    fn power(&mut self, level: usize, alpha: usize, n: i32) -> Result<&TorusElement> {
        let key = (level, alpha, n);
        if !self.cache.contains_key(&key) {
            let img = &self.images[level][alpha];
            let p = if n >= 0 {
                img.pow(n as u32)
            } else {
                match img.monomial_inverse() {
                    Ok(inv) => inv.pow((-n) as u32),
                    Err(_) => {
                        return Err(Error::NonMonomialInverse(format!("Q[{},{level}]", alpha + 1)))
                    }
                }
            };
            self.cache.insert(key, p);
        }
        Ok(&self.cache[&key])
    }
}

/// Checks that candidate images obey the seed commutation relations:
/// same-level images commute and `X_{α,0} X_{β,1} = t^{λ_{αβ}} X_{β,1} X_{α,0}`.
pub fn images_commute_like_seed(images0: &[TorusElement], images1: &[TorusElement]) -> Result<bool> {
    let r = images0.len();
    if images1.len() != r || r == 0 {
        return Err(Error::Shape("image lists must have equal nonzero length".into()));
    }
    let cartan = images0[0].cartan.clone();
    for a in 0..r {
        for b in 0..r {
            for imgs in [images0, images1] {
                if imgs[a].try_mul(&imgs[b])? != imgs[b].try_mul(&imgs[a])? {
                    return Ok(false);
                }
            }
            let lhs = images0[a].try_mul(&images1[b])?;
            let rhs = images1[b]
                .try_mul(&images0[a])?
                .shift_half(2 * cartan.lambda[a][b]);
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.cartan.name(), self.render())
    }
}

impl<'a> Mul<&'a TorusElement> for &'a TorusElement {
    type Output = TorusElement;
    /// Panics on operands from different algebras; use `try_mul` to handle that case.
    fn mul(self, rhs: &'a TorusElement) -> TorusElement {
        self.try_mul(rhs).expect("torus product")
    }
}

impl<'a> Add<&'a TorusElement> for &'a TorusElement {
    type Output = TorusElement;
    fn add(self, rhs: &'a TorusElement) -> TorusElement {
        self.try_add(rhs).expect("torus sum")
    }
}

impl<'a> Sub<&'a TorusElement> for &'a TorusElement {
    type Output = TorusElement;
    fn sub(self, rhs: &'a TorusElement) -> TorusElement {
        self.try_sub(rhs).expect("torus difference")
    }
}

impl Neg for &TorusElement {
    type Output = TorusElement;
    fn neg(self) -> TorusElement {
        self.scale(&TPoly::from_i64(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{build_cartan, Family};
    use proptest::prelude::*;

    fn alg(f: Family, r: usize) -> Arc<CartanData> {
        Arc::new(build_cartan(f, r).unwrap())
    }

    fn ev(v: &[i32]) -> ExpVec {
        v.iter().copied().collect()
    }

    #[test]
    fn a1_generators_t_commute() {
        let c = alg(Family::A, 1);
        let q0 = TorusElement::generator(&c, 1, 0);
        let q1 = TorusElement::generator(&c, 1, 1);
        let prod = &q1 * &q0;
        assert_eq!(prod, TorusElement::monomial(&c, ev(&[1, 1]), TPoly::t_pow(-1)));
        assert_eq!(prod.render(), "t^-1*Q[1,0]*Q[1,1]");
        assert_eq!(&q1 * &q1, TorusElement::monomial(&c, ev(&[0, 2]), TPoly::one()));
    }

    /// Reorders a word of generators by adjacent swaps, tracking the t-power.
    fn reorder_word(cartan: &CartanData, word: &[(usize, usize)]) -> (Vec<(usize, usize)>, i64) {
        let mut w = word.to_vec();
        let mut tpow = 0;
        let key = |g: &(usize, usize)| (g.1, g.0);
        for i in 0..w.len() {
            for j in (i + 1..w.len()).rev() {
                if key(&w[j]) < key(&w[j - 1]) {
                    // X Y -> Y X with X = w[j-1] (level 1), Y = w[j] (level 0):
                    // Q_{β,1} Q_{α,0} = t^{-λ_{αβ}} Q_{α,0} Q_{β,1}.
                    let (x, y) = (w[j - 1], w[j]);
                    if x.1 == 1 && y.1 == 0 {
                        tpow -= cartan.lambda[y.0 - 1][x.0 - 1];
                    }
                    w.swap(j - 1, j);
                }
            }
        }
        (w, tpow)
    }

    #[test]
    fn mono_product_matches_adjacent_swaps() {
        let c = alg(Family::A, 2);
        let (e, s) = mono_product(
            &c,
            (&generator_exp(2, 1, 1), &TPoly::one()),
            (&generator_exp(2, 2, 0), &TPoly::one()),
        );
        assert_eq!(e, ev(&[0, 1, 1, 0]));
        assert_eq!(s, TPoly::t_pow(-1));

        let d4 = alg(Family::D, 4);
        let word = [(2, 1), (3, 0), (1, 1), (1, 0), (4, 1), (2, 0)];
        let (_, tpow) = reorder_word(&d4, &word);
        let mut x = TorusElement::one(&d4);
        for (a, l) in word {
            x = &x * &TorusElement::generator(&d4, a, l);
        }
        let (_, coeff) = x.as_monomial().unwrap();
        assert_eq!(coeff, &TPoly::t_pow(tpow));
    }

    #[test]
    fn generator_commutation_relations() {
        for c in [alg(Family::A, 1), alg(Family::A, 3), alg(Family::D, 4)] {
            let r = c.rank;
            for a in 1..=r {
                for b in 1..=r {
                    for n in 0..2 {
                        for m in 0..2 {
                            let x = TorusElement::generator(&c, a, n);
                            let y = TorusElement::generator(&c, b, m);
                            let e = c.lambda[a - 1][b - 1] * (m as i64 - n as i64);
                            assert_eq!(&x * &y, (&y * &x).shift_half(2 * e));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn a1_division_example() {
        let c = alg(Family::A, 1);
        let q0 = TorusElement::generator(&c, 1, 0);
        let q1 = TorusElement::generator(&c, 1, 1);
        let p = &(&q1 * &q1) - &TorusElement::one(&c);
        let r = p.right_divide_exact(&q0).unwrap();
        // (Q1^2 - 1) Q0^{-1} = t·Q̂_2 in normal order.
        assert_eq!(r.render(), "t^2*Q[1,0]^-1*Q[1,1]^2 - Q[1,0]^-1");
        assert_eq!(&r * &q0, p);
        assert_eq!(p.right_divide_exact(&TorusElement::one(&c)).unwrap(), p);
        let d = &q1 + &TorusElement::one(&c);
        assert_eq!(p.right_divide_exact(&d).unwrap(), &q1 - &TorusElement::one(&c));
        let bad = &q1 + &q0;
        assert!(p.right_divide_exact(&bad).unwrap_err().is_internal());
    }

    #[test]
    fn monomial_inverse_and_mismatch() {
        let c = alg(Family::A, 2);
        let m = TorusElement::monomial(&c, ev(&[2, -1, 3, 1]), TPoly::t_pow_half(-3));
        let inv = m.monomial_inverse().unwrap();
        assert_eq!(&m * &inv, TorusElement::one(&c));
        assert_eq!(&inv * &m, TorusElement::one(&c));
        let other = alg(Family::A, 3);
        assert!(matches!(
            m.try_mul(&TorusElement::one(&other)),
            Err(Error::AlgebraMismatch(_, _))
        ));
    }

    #[test]
    fn substitute_identity_and_scalar() {
        let c = alg(Family::A, 2);
        let g0: Vec<_> = (1..=2).map(|a| TorusElement::generator(&c, a, 0)).collect();
        let g1: Vec<_> = (1..=2).map(|a| TorusElement::generator(&c, a, 1)).collect();
        assert!(images_commute_like_seed(&g0, &g1).unwrap());
        let x = TorusElement::from_terms(
            &c,
            [
                (ev(&[1, -2, 0, 3]), TPoly::t_pow(2)),
                (ev(&[0, 0, -1, 1]), TPoly::from_terms([(0, 1), (1, -1)])),
            ],
        );
        assert_eq!(x.substitute(&g0, &g1).unwrap(), x);
        let s = TorusElement::scalar(&c, TPoly::from_i64(5));
        assert_eq!(s.substitute(&g0, &g1).unwrap(), s);
        let poly = vec![&g0[0] + &g0[1], g0[1].clone()];
        let neg = TorusElement::monomial(&c, ev(&[-1, 0, 0, 0]), TPoly::one());
        assert!(matches!(
            neg.substitute(&poly, &g1),
            Err(Error::NonMonomialInverse(_))
        ));
    }

    fn arb_element(c: Arc<CartanData>, max_terms: usize) -> impl Strategy<Value = TorusElement> {
        let r = c.rank;
        prop::collection::vec(
            (
                prop::collection::vec(-3i32..=3, 2 * r),
                prop::collection::vec((-4i64..4, -3i64..4), 1..3),
            ),
            1..=max_terms,
        )
        .prop_map(move |terms| {
            TorusElement::from_terms(
                &c,
                terms.into_iter().map(|(e, cs)| {
                    (
                        e.into_iter().collect(),
                        TPoly::from_half_terms(cs.into_iter().map(|(x, y)| (x, Int::from(y)))),
                    )
                }),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn product_is_associative(
            x in arb_element(alg(Family::A, 2), 4),
            y in arb_element(alg(Family::A, 2), 4),
            z in arb_element(alg(Family::A, 2), 4),
        ) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            let one = TorusElement::one(x.cartan());
            prop_assert_eq!(&x * &one, x.clone());
            prop_assert_eq!(&one * &x, x.clone());
        }

        #[test]
        fn monomials_are_invertible(
            e in prop::collection::vec(-4i32..=4, 8),
            s in -6i64..6,
            sign in prop::bool::ANY,
        ) {
            let c = alg(Family::D, 4);
            let coeff = TPoly::monomial_half(s, Int::from(if sign { 1 } else { -1 }));
            let m = TorusElement::monomial(&c, e.into_iter().collect(), coeff);
            let inv = m.monomial_inverse().unwrap();
            prop_assert_eq!(&m * &inv, TorusElement::one(&c));
            prop_assert_eq!(&inv * &m, TorusElement::one(&c));
        }

        #[test]
        fn division_round_trip(
            r in arb_element(alg(Family::A, 2), 4),
            d in arb_element(alg(Family::A, 2), 3),
        ) {
            prop_assume!(!d.is_zero());
            let p = &r * &d;
            prop_assert_eq!(p.right_divide_exact(&d).unwrap(), r.clone());
            let p = &d * &r;
            prop_assert_eq!(p.left_divide_exact(&d).unwrap(), r);
        }

        #[test]
        fn product_at_t_one_is_commutative_product(
            x in arb_element(alg(Family::A, 1), 4),
            y in arb_element(alg(Family::A, 1), 4),
        ) {
            let mut expect: BTreeMap<ExpVec, Int> = BTreeMap::new();
            for (ex, cx) in x.eval_t_one() {
                for (ey, cy) in y.eval_t_one() {
                    let e = exp_add(&ex, &ey);
                    let v = expect.entry(e).or_insert(Int::ZERO);
                    *v += &(&cx * &cy);
                }
            }
            expect.retain(|_, c| !c.is_zero());
            prop_assert_eq!((&x * &y).eval_t_one(), expect);
        }
    }
}
