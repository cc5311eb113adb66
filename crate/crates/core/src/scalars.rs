//! Exact scalar types: rationals, `Q(√2)`, hyperbolic Laurent polynomials in
//! `e^{z/2}` and rational functions of the equivariant parameter.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(a, b))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Always prints `p/q`, with `q = 1` for integers.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

pub fn qfact(n: u64) -> Q {
    Q::from_integer(factorial(n))
}

pub fn binom(n: i64, k: i64) -> Q {
    if k < 0 || n < 0 || k > n {
        return Q::zero();
    }
    Q::from_integer(factorial(n as u64) / (factorial(k as u64) * factorial((n - k) as u64)))
}

pub fn qpow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// `(z - 1) / 2`, written `z'` throughout.
pub fn half_shift(z: &Q) -> Q {
    (z - Q::one()) / q(2)
}

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Vec<Q> {
    let mut b = vec![Q::zero(); n + 1];
    b[0] = Q::one();
    for m in 1..=n {
        let mut s = Q::zero();
        for k in 0..m {
            s += binom(m as i64 + 1, k as i64) * &b[k];
        }
        b[m] = -s / q(m as i64 + 1);
    }
    b
}

/// `a + b√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Q2 {
    pub a: Q,
    pub b: Q,
}

impl Q2 {
    pub fn new(a: Q, b: Q) -> Self {
        Q2 { a, b }
    }
    pub fn rational(a: Q) -> Self {
        Q2 { a, b: Q::zero() }
    }
    pub fn sqrt2() -> Self {
        Q2 { a: Q::zero(), b: Q::one() }
    }
    pub fn zero() -> Self {
        Q2::rational(Q::zero())
    }
    pub fn one() -> Self {
        Q2::rational(Q::one())
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    pub fn as_rational(&self) -> Option<&Q> {
        self.b.is_zero().then_some(&self.a)
    }
    pub fn conj(&self) -> Self {
        Q2 { a: self.a.clone(), b: -self.b.clone() }
    }
    /// `a^2 - 2 b^2`, which vanishes only at zero since √2 is irrational.
    pub fn norm(&self) -> Q {
        &self.a * &self.a - q(2) * &self.b * &self.b
    }
    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c = self.conj();
        Ok(Q2 { a: c.a / &n, b: c.b / n })
    }
    pub fn div(&self, o: &Q2) -> Result<Self> {
        Ok(self * &o.inv()?)
    }
    /// `(√2)^e` for any integer `e`.
    pub fn sqrt2_pow(e: i64) -> Self {
        let half = Integer::div_floor(&e, &2);
        let c = qpow(&q(2), half);
        if e.is_odd() {
            Q2 { a: Q::zero(), b: c }
        } else {
            Q2 { a: c, b: Q::zero() }
        }
    }
}

impl<'a> Add<&'a Q2> for &'a Q2 {
    type Output = Q2;
    fn add(self, o: &Q2) -> Q2 {
        Q2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}
impl<'a> Sub<&'a Q2> for &'a Q2 {
    type Output = Q2;
    fn sub(self, o: &Q2) -> Q2 {
        Q2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}
impl<'a> Mul<&'a Q2> for &'a Q2 {
    type Output = Q2;
    fn mul(self, o: &Q2) -> Q2 {
        Q2 {
            a: &self.a * &o.a + q(2) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}
impl Neg for Q2 {
    type Output = Q2;
    fn neg(self) -> Q2 {
        Q2 { a: -self.a, b: -self.b }
    }
}
impl fmt::Display for Q2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt2", self.a, self.b)
        }
    }
}

/// Laurent polynomial in `q = e^{z/2}`, stored as exponent of `q` to
/// coefficient. So `e^{dz}` sits at key `2d`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HyperbolicPoly {
    pub terms: BTreeMap<i64, Q>,
}

impl HyperbolicPoly {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn constant(c: Q) -> Self {
        Self::monomial(0, c)
    }
    /// `c q^e`, i.e. `c e^{e z / 2}`.
    pub fn monomial(e: i64, c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }
    pub fn add_term(&mut self, e: i64, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    /// `ς(z) = e^{z/2} - e^{-z/2}`.
    pub fn varsigma() -> Self {
        let mut p = Self::monomial(1, Q::one());
        p.add_term(-1, -Q::one());
        p
    }
    /// `ϙ(z) = (e^{z/2} + e^{-z/2}) / 4`.
    pub fn qoppa() -> Self {
        let mut p = Self::monomial(1, qr(1, 4));
        p.add_term(-1, qr(1, 4));
        p
    }
    /// `sinh(d z)` for half-integer `d = half_d / 2`.
    pub fn sinh_half(half_d: i64) -> Self {
        let mut p = Self::monomial(half_d, qr(1, 2));
        p.add_term(-half_d, qr(-1, 2));
        p
    }
    pub fn sinh(d: i64) -> Self {
        Self::sinh_half(2 * d)
    }
    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        HyperbolicPoly { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }
    /// `z -> -z`.
    pub fn reflect(&self) -> Self {
        HyperbolicPoly { terms: self.terms.iter().map(|(e, x)| (-e, x.clone())).collect() }
    }
    pub fn is_odd(&self) -> bool {
        self.reflect() == -self.clone()
    }
    pub fn is_even(&self) -> bool {
        self.reflect() == *self
    }
    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(Q::one()), |acc, _| &acc * self)
    }
    /// Writes an odd polynomial as `Σ c_d sinh(d z)`; keys are `2d`.
    pub fn sinh_decompose(&self) -> Result<BTreeMap<i64, Q>> {
        if !self.is_odd() {
            return Err(Error::InvalidInput("sinh decomposition needs an odd polynomial".into()));
        }
        Ok(self
            .terms
            .iter()
            .filter(|(e, _)| **e > 0)
            .map(|(e, c)| (*e, c * q(2)))
            .collect())
    }
    /// Same as [`Self::sinh_decompose`] but keyed by integer `d`; fails on
    /// half-integer frequencies.
    pub fn sinh_coefficients(&self) -> Result<BTreeMap<i64, Q>> {
        let half = self.sinh_decompose()?;
        half.into_iter()
            .map(|(e, c)| {
                if e % 2 != 0 {
                    Err(Error::InvalidInput(format!("half-integer frequency {e}/2")))
                } else {
                    Ok((e / 2, c))
                }
            })
            .collect()
    }
    /// Taylor coefficient `[z^n]`.
    pub fn taylor(&self, n: u32) -> Q {
        let f = qfact(n as u64);
        self.terms
            .iter()
            .map(|(e, c)| c * qpow(&qr(*e, 2), n as i64))
            .fold(Q::zero(), |a, b| a + b)
            / f
    }
}

impl<'a> Add<&'a HyperbolicPoly> for &'a HyperbolicPoly {
    type Output = HyperbolicPoly;
    fn add(self, o: &HyperbolicPoly) -> HyperbolicPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }
}
impl<'a> Sub<&'a HyperbolicPoly> for &'a HyperbolicPoly {
    type Output = HyperbolicPoly;
    fn sub(self, o: &HyperbolicPoly) -> HyperbolicPoly {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, -c.clone());
        }
        r
    }
}
impl<'a> Mul<&'a HyperbolicPoly> for &'a HyperbolicPoly {
    type Output = HyperbolicPoly;
    fn mul(self, o: &HyperbolicPoly) -> HyperbolicPoly {
        let mut r = HyperbolicPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(e1 + e2, c1 * c2);
            }
        }
        r
    }
}
impl Neg for HyperbolicPoly {
    type Output = HyperbolicPoly;
    fn neg(self) -> HyperbolicPoly {
        self.scale(&-Q::one())
    }
}
impl fmt::Display for HyperbolicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().rev().map(|(e, c)| format!("({c})*q^{e}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Laurent polynomial in `e^{z_1/2}, e^{z_2/2}`; used for two-variable
/// operator identities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPoly2 {
    pub terms: BTreeMap<(i64, i64), Q>,
}

impl ExpPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn monomial(e: (i64, i64), c: Q) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }
    pub fn add_term(&mut self, e: (i64, i64), c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ExpPoly2 { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }
    /// Substitutes `z -> a z_1 + b z_2` into a one-variable polynomial.
    pub fn from_linear(p: &HyperbolicPoly, a: i64, b: i64) -> Self {
        let mut r = Self::zero();
        for (e, c) in &p.terms {
            r.add_term((e * a, e * b), c.clone());
        }
        r
    }
}

impl<'a> Add<&'a ExpPoly2> for &'a ExpPoly2 {
    type Output = ExpPoly2;
    fn add(self, o: &ExpPoly2) -> ExpPoly2 {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }
}
impl<'a> Sub<&'a ExpPoly2> for &'a ExpPoly2 {
    type Output = ExpPoly2;
    fn sub(self, o: &ExpPoly2) -> ExpPoly2 {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, -c.clone());
        }
        r
    }
}
impl<'a> Mul<&'a ExpPoly2> for &'a ExpPoly2 {
    type Output = ExpPoly2;
    fn mul(self, o: &ExpPoly2) -> ExpPoly2 {
        let mut r = ExpPoly2::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term((e1.0 + e2.0, e1.1 + e2.1), c1 * c2);
            }
        }
        r
    }
}

/// Dense polynomial over `Q`, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub c: Vec<Q>,
}

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }
    pub fn constant(x: Q) -> Self {
        Poly::new(vec![x])
    }
    /// The variable `t`.
    pub fn t() -> Self {
        Poly::new(vec![Q::zero(), Q::one()])
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }
    pub fn eval(&self, t: &Q) -> Q {
        self.c.iter().rev().fold(Q::zero(), |acc, x| acc * t + x)
    }
    pub fn scale(&self, s: &Q) -> Self {
        Poly::new(self.c.iter().map(|x| x * s).collect())
    }
    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).cloned().unwrap_or_else(Q::zero)
                        + o.c.get(i).cloned().unwrap_or_else(Q::zero)
                })
                .collect(),
        )
    }
    pub fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut r = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        Poly::new(r)
    }
    /// Euclidean division.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead = d.lead();
        let mut rem = self.c.clone();
        let mut quo = vec![Q::zero(); self.c.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let f = rem.last().unwrap() / &lead;
            for (i, x) in d.c.iter().enumerate() {
                rem[k + i] -= &f * x;
            }
            quo[k] = f;
            rem.pop();
            while rem.last().is_some_and(|x| x.is_zero()) {
                rem.pop();
            }
        }
        Ok((Poly::new(quo), Poly::new(rem)))
    }
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let l = a.lead();
            a.scale(&l.recip())
        }
    }
    /// Lagrange interpolation through `(x_i, y_i)` with distinct nodes.
    pub fn interpolate(points: &[(Q, Q)]) -> Result<Poly> {
        let mut acc = Poly::default();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = Poly::constant(Q::one());
            let mut denom = Q::one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = basis.mul(&Poly::new(vec![-xj.clone(), Q::one()]));
                    denom *= xi - xj;
                }
            }
            if denom.is_zero() {
                return Err(Error::InvalidInput("repeated interpolation node".into()));
            }
            acc = acc.add(&basis.scale(&(yi / denom)));
        }
        Ok(acc)
    }
}

/// Reduced quotient of polynomials in `t`, denominator monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.divrem(&g)?.0, den.divrem(&g)?.0)
        };
        let l = d.lead();
        n = n.scale(&l.recip());
        d = d.scale(&l.recip());
        if n.is_zero() {
            d = Poly::constant(Q::one());
        }
        Ok(RationalFunction { num: n, den: d })
    }
    pub fn constant(x: Q) -> Self {
        RationalFunction { num: Poly::constant(x), den: Poly::constant(Q::one()) }
    }
    pub fn t() -> Self {
        RationalFunction { num: Poly::t(), den: Poly::constant(Q::one()) }
    }
    /// `t^e` for any integer `e`.
    pub fn t_pow(e: i64) -> Self {
        let mut m = vec![Q::zero(); e.unsigned_abs() as usize];
        m.push(Q::one());
        if e >= 0 {
            RationalFunction { num: Poly::new(m), den: Poly::constant(Q::one()) }
        } else {
            RationalFunction { num: Poly::constant(Q::one()), den: Poly::new(m) }
        }
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
            .expect("nonzero denominators")
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }
    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominators")
    }
    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }
    pub fn eval(&self, t: &Q) -> Result<Q> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return Err(Error::Infeasible(format!("pole at t = {}", fmt_q(t))));
        }
        Ok(self.num.eval(t) / d)
    }
    /// Recovers `P(t) / t^k` from samples, given `deg P <= n_points - 1`.
    pub fn from_laurent_samples(k: u32, samples: &[(Q, Q)]) -> Result<Self> {
        let pts: Vec<(Q, Q)> =
            samples.iter().map(|(t, y)| (t.clone(), y * qpow(t, k as i64))).collect();
        if pts.iter().any(|(t, _)| t.is_zero()) {
            return Err(Error::InvalidInput("sample at t = 0".into()));
        }
        let p = Poly::interpolate(&pts)?;
        Self::new(p, Self::t_pow(k as i64).num)
    }
}

/// Solves the square system `a x = b` by exact Gaussian elimination.
pub fn solve_linear(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Result<Vec<Q>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("system is not square".into()));
    }
    for col in 0..n {
        let piv = (col..n)
            .find(|r| !a[*r][col].is_zero())
            .ok_or_else(|| Error::Infeasible("singular linear system".into()))?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let x = &a[col][c] * &f;
                a[r][c] -= x;
            }
            let y = &b[col] * &f;
            b[r] -= y;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Integer exponent helper used for sign factors.
pub fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn is_nonneg_int(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}
