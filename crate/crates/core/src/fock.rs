//! Neutral-fermion Fock space.
//!
//! Internal basis: `φ_{p_1} ··· φ_{p_ℓ}|0⟩` with `p_1 > ... > p_ℓ >= 0`,
//! stored as a bitmask (bit `p` set iff `p` is a part, bit 0 is the zero
//! mode). The normalized vector `|λ⟩` equals the internal state with the
//! same parts when `ℓ(λ)` is even and `√2` times the state with an extra
//! zero part when `ℓ(λ)` is odd.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partitions::{enumerate, zmu, Class, Partition};
use crate::scalars::{qfact, qpow, qr, ExpPoly2, HyperbolicPoly, Q, Q2, q};
use crate::series::{dense, mono1, Series, INF, NV};

pub type State = u128;
pub const VACUUM: State = 0;
pub const MAX_PART: i64 = 127;

pub fn energy(s: State) -> i64 {
    let mut e = 0i64;
    let mut x = s >> 1;
    let mut p = 1i64;
    while x != 0 {
        if x & 1 == 1 {
            e += p;
        }
        x >>= 1;
        p += 1;
    }
    e
}

/// Parts in decreasing order, including a trailing zero part if present.
pub fn parts(s: State) -> Vec<i64> {
    (0..=MAX_PART).rev().filter(|p| s >> p & 1 == 1).collect()
}

pub fn has_zero(s: State) -> bool {
    s & 1 == 1
}

pub fn state_from_parts(ps: &[i64]) -> Result<State> {
    let mut s: State = 0;
    for &p in ps {
        if !(0..=MAX_PART).contains(&p) || s >> p & 1 == 1 {
            return Err(Error::InvalidInput(format!("bad state parts {ps:?}")));
        }
        s |= 1 << p;
    }
    Ok(s)
}

/// Positive parts as a strict partition.
pub fn state_partition(s: State) -> Partition {
    Partition::new(parts(s).into_iter().filter(|p| *p > 0).map(|p| p as u32).collect())
        .expect("positive parts")
}

/// `⟨s|s⟩`: 1, or 1/2 with a zero mode.
pub fn norm2(s: State) -> Q {
    if has_zero(s) {
        qr(1, 2)
    } else {
        Q::one()
    }
}

fn count_above(s: State, k: i64) -> u32 {
    if k + 1 > MAX_PART {
        0
    } else {
        (s >> (k + 1)).count_ones()
    }
}

/// Small exact factor `sign / den` with `den ∈ {1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fac {
    pub sign: i8,
    pub half: bool,
}

impl Fac {
    pub const ONE: Fac = Fac { sign: 1, half: false };
    pub fn mul(self, o: Fac) -> Option<Fac> {
        if self.half && o.half {
            // φ_0 removed twice in one product never happens for quadratics
            return None;
        }
        Some(Fac { sign: self.sign * o.sign, half: self.half || o.half })
    }
    pub fn to_q(self) -> Q {
        if self.half {
            qr(self.sign as i64, 2)
        } else {
            q(self.sign as i64)
        }
    }
}

pub(crate) fn parity_sign(n: i64) -> i8 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Clifford action `φ_k |s⟩`.
pub fn phi(k: i64, s: State) -> Option<(State, Fac)> {
    if k > 0 {
        if k > MAX_PART {
            panic!("fermion mode {k} exceeds the supported range");
        }
        if s >> k & 1 == 1 {
            return None;
        }
        let sg = parity_sign(count_above(s, k) as i64);
        Some((s | 1 << k, Fac { sign: sg, half: false }))
    } else if k == 0 {
        let sg = parity_sign((s >> 1).count_ones() as i64);
        if has_zero(s) {
            Some((s & !1, Fac { sign: sg, half: true }))
        } else {
            Some((s | 1, Fac { sign: sg, half: false }))
        }
    } else {
        let j = -k;
        if j > MAX_PART || s >> j & 1 == 0 {
            return None;
        }
        let sg = parity_sign(count_above(s, j) as i64 + j);
        Some((s & !(1 << j), Fac { sign: sg, half: false }))
    }
}

/// `φ_a φ_b |s⟩`.
pub fn phi2(a: i64, b: i64, s: State) -> Option<(State, Fac)> {
    let (s1, f1) = phi(b, s)?;
    let (s2, f2) = phi(a, s1)?;
    let f = if f1.half && f2.half {
        Fac { sign: f1.sign * f2.sign, half: true } // cannot occur, kept total
    } else {
        f1.mul(f2)?
    };
    Some((s2, f))
}

/// `⟨φ_a φ_b⟩ = (-1)^a δ_{a+b} u[b]`.
pub fn vev_phi2(a: i64, b: i64) -> Q {
    if a + b != 0 {
        return Q::zero();
    }
    let s = q(parity_sign(a) as i64);
    match b.cmp(&0) {
        std::cmp::Ordering::Greater => s,
        std::cmp::Ordering::Equal => s / q(2),
        std::cmp::Ordering::Less => Q::zero(),
    }
}

/// Exact coefficient ring for Fock vectors.
pub trait Coeff: Clone + Send + Sync + 'static {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn from_q(x: Q) -> Self;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, x: &Q) -> Self;
}

impl Coeff for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        x
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, x: &Q) -> Self {
        self * x
    }
}

impl Coeff for Q2 {
    fn nil() -> Self {
        Q2::zero()
    }
    fn is_nil(&self) -> bool {
        Q2::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        Q2::rational(x)
    }
    fn add_assign(&mut self, o: &Self) {
        *self = &*self + o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, x: &Q) -> Self {
        Q2::new(&self.a * x, &self.b * x)
    }
}

impl Coeff for HyperbolicPoly {
    fn nil() -> Self {
        HyperbolicPoly::zero()
    }
    fn is_nil(&self) -> bool {
        HyperbolicPoly::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        HyperbolicPoly::constant(x)
    }
    fn add_assign(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(*e, c.clone());
        }
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, x: &Q) -> Self {
        HyperbolicPoly::scale(self, x)
    }
}

impl Coeff for ExpPoly2 {
    fn nil() -> Self {
        ExpPoly2::zero()
    }
    fn is_nil(&self) -> bool {
        ExpPoly2::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        ExpPoly2::monomial((0, 0), x)
    }
    fn add_assign(&mut self, o: &Self) {
        for (e, c) in &o.terms {
            self.add_term(*e, c.clone());
        }
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, x: &Q) -> Self {
        ExpPoly2::scale(self, x)
    }
}

impl Coeff for Series {
    fn nil() -> Self {
        Series::zero()
    }
    fn is_nil(&self) -> bool {
        self.is_empty()
    }
    fn from_q(x: Q) -> Self {
        Series::constant(x)
    }
    fn add_assign(&mut self, o: &Self) {
        Series::add_assign(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Series::mul(self, o)
    }
    fn scale(&self, x: &Q) -> Self {
        Series::scale(self, x)
    }
}

/// Finite linear combination of internal basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<C> {
    pub entries: BTreeMap<State, C>,
}

impl<C: Coeff> Default for FockVector<C> {
    fn default() -> Self {
        FockVector { entries: BTreeMap::new() }
    }
}

impl<C: Coeff> FockVector<C> {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn vacuum() -> Self {
        Self::basis(VACUUM)
    }
    pub fn basis(s: State) -> Self {
        let mut v = Self::new();
        v.entries.insert(s, C::from_q(Q::one()));
        v
    }
    pub fn single(s: State, c: C) -> Self {
        let mut v = Self::new();
        v.add_term(s, c);
        v
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn get(&self, s: State) -> C {
        self.entries.get(&s).cloned().unwrap_or_else(C::nil)
    }
    pub fn vacuum_coeff(&self) -> C {
        self.get(VACUUM)
    }
    pub fn add_term(&mut self, s: State, c: C) {
        if c.is_nil() {
            return;
        }
        match self.entries.entry(s) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&c);
                if e.get().is_nil() {
                    e.remove();
                }
            }
        }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (s, c) in &o.entries {
            r.add_term(*s, c.clone());
        }
        r
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }
    pub fn scale(&self, x: &Q) -> Self {
        let mut r = Self::new();
        for (s, c) in &self.entries {
            r.add_term(*s, c.scale(x));
        }
        r
    }
    pub fn mul_coeff(&self, x: &C) -> Self {
        let mut r = Self::new();
        for (s, c) in &self.entries {
            r.add_term(*s, c.mul(x));
        }
        r
    }
    /// Energy support `(min, max)`, `None` for the zero vector.
    pub fn energy_range(&self) -> Option<(i64, i64)> {
        let es: Vec<i64> = self.entries.keys().map(|s| energy(*s)).collect();
        Some((*es.iter().min()?, *es.iter().max()?))
    }
    pub fn filter_energy(&self, lo: i64, hi: i64) -> Self {
        FockVector {
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| (lo..=hi).contains(&energy(**s)))
                .map(|(s, c)| (*s, c.clone()))
                .collect(),
        }
    }
    /// `⟨self|o⟩` for real coefficients.
    pub fn inner(&self, o: &Self) -> C {
        let mut acc = C::nil();
        for (s, c) in &self.entries {
            if let Some(d) = o.entries.get(s) {
                acc.add_assign(&c.mul(d).scale(&norm2(*s)));
            }
        }
        acc
    }
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> FockVector<D> {
        let mut r = FockVector::new();
        for (s, c) in &self.entries {
            r.add_term(*s, f(c));
        }
        r
    }
    fn from_pairs(pairs: Vec<(State, C)>) -> Self {
        let mut r = Self::new();
        for (s, c) in pairs {
            r.add_term(s, c);
        }
        r
    }
}

/// Partition-basis view `λ ↦ coefficient of |λ⟩` (even sector only).
pub fn to_partition_basis(v: &FockVector<Q>) -> Result<BTreeMap<Partition, Q2>> {
    let mut out = BTreeMap::new();
    for (s, c) in &v.entries {
        let lam = state_partition(*s);
        let odd_len = lam.len() % 2 == 1;
        if odd_len != has_zero(*s) {
            return Err(Error::InvalidInput("state outside the even sector".into()));
        }
        let coeff = if odd_len {
            // internal = |λ⟩ / √2
            Q2::new(Q::zero(), c / q(2))
        } else {
            Q2::rational(c.clone())
        };
        out.insert(lam, coeff);
    }
    Ok(out)
}

/// Internal representation of the normalized vector `|λ⟩`.
pub fn normalized_state(lam: &Partition) -> Result<(State, Q2)> {
    if !lam.is_strict() {
        return Err(Error::InvalidInput(format!("{lam} is not strict")));
    }
    let mut ps: Vec<i64> = lam.parts().iter().map(|p| *p as i64).collect();
    if lam.len() % 2 == 1 {
        ps.push(0);
        Ok((state_from_parts(&ps)?, Q2::sqrt2()))
    } else {
        Ok((state_from_parts(&ps)?, Q2::one()))
    }
}

/// All internal even-sector states of energy `e`.
pub fn states_of_energy(e: i64) -> Vec<State> {
    let mut out = Vec::new();
    for lam in enumerate(e as u32, Class::Strict) {
        out.push(normalized_state(&lam).expect("strict").0);
    }
    out
}

/// Even-sector basis with energy `<= e`.
pub fn states_up_to(e: i64) -> Vec<State> {
    (0..=e).flat_map(states_of_energy).collect()
}

/// All internal states (both sectors) with energy `<= e`.
pub fn all_states_up_to(e: i64) -> Vec<State> {
    let mut out = Vec::new();
    for k in 0..=e {
        for lam in enumerate(k as u32, Class::Strict) {
            let ps: Vec<i64> = lam.parts().iter().map(|p| *p as i64).collect();
            let s = state_from_parts(&ps).expect("strict");
            out.push(s);
            out.push(s | 1);
        }
    }
    out
}

pub fn apply_phi<C: Coeff>(k: i64, v: &FockVector<C>) -> FockVector<C> {
    let mut r = FockVector::new();
    for (s, c) in &v.entries {
        if let Some((t, f)) = phi(k, *s) {
            r.add_term(t, c.scale(&f.to_q()));
        }
    }
    r
}

/// `Ê_{j,k} = :φ_j φ_{-k}:` applied to `v`.
pub fn apply_quad<C: Coeff>(j: i64, k: i64, v: &FockVector<C>) -> FockVector<C> {
    let mut r = FockVector::new();
    let c0 = vev_phi2(j, -k);
    for (s, c) in &v.entries {
        if let Some((t, f)) = phi2(j, -k, *s) {
            r.add_term(t, c.scale(&f.to_q()));
        }
        if !c0.is_zero() {
            r.add_term(*s, c.scale(&-c0.clone()));
        }
    }
    r
}

/// Energy change of a primitive, `out - in ∈ [lo, hi]`; `None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shift {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Shift {
    pub fn exact(d: i64) -> Self {
        Shift { lo: Some(d), hi: Some(d) }
    }
    pub fn range(lo: Option<i64>, hi: Option<i64>) -> Self {
        Shift { lo, hi }
    }
}

/// Sum of quadratics `Σ_m Σ_{l > m/2} D_m(l) φ_{l-m} φ_{-l}` plus a multiple
/// of the identity. `m` is the energy lowering. The coefficient callback
/// receives `(m, l)` and must already be antisymmetrized, i.e. equal
/// `D(m,l) - D(m,m-l)` for an operator written as `Σ_{l∈ℤ} D(m,l) :φ_{l-m}φ_{-l}:`.
#[derive(Clone)]
pub struct BandOp<C> {
    pub kmin: Option<i64>,
    pub kmax: Option<i64>,
    pub coef: Arc<dyn Fn(i64, i64) -> C + Send + Sync>,
    pub constant: Option<C>,
    pub label: String,
}

impl<C: Coeff> BandOp<C> {
    pub fn new(
        label: impl Into<String>,
        kmin: Option<i64>,
        kmax: Option<i64>,
        coef: impl Fn(i64, i64) -> C + Send + Sync + 'static,
    ) -> Self {
        BandOp { kmin, kmax, coef: Arc::new(coef), constant: None, label: label.into() }
    }
    pub fn with_constant(mut self, c: C) -> Self {
        self.constant = Some(c);
        self
    }
    pub fn shift(&self) -> Shift {
        Shift { lo: self.kmax.map(|k| -k), hi: self.kmin.map(|k| -k) }
    }

    /// Applies the operator keeping only outputs with energy in `[lo, hi]`.
    pub fn apply_window(&self, v: &FockVector<C>, lo: i64, hi: i64) -> FockVector<C> {
        let work = |(s, c): (&State, &C)| -> Vec<(State, C)> {
            let mut out = Vec::new();
            let e = energy(*s);
            if let Some(k0) = &self.constant {
                if (lo..=hi).contains(&e) {
                    out.push((*s, c.mul(k0)));
                }
            }
            let mut mlo = e - hi;
            let mut mhi = e - lo;
            if let Some(k) = self.kmin {
                mlo = mlo.max(k);
            }
            if let Some(k) = self.kmax {
                mhi = mhi.min(k);
            }
            for m in mlo..=mhi {
                for l in candidates(m, *s) {
                    if let Some((t, f)) = phi2(l - m, -l, *s) {
                        let d = (self.coef)(m, l);
                        if !d.is_nil() {
                            out.push((t, c.mul(&d).scale(&f.to_q())));
                        }
                    }
                }
            }
            out
        };
        let pairs: Vec<(State, C)> = if v.len() > 32 {
            v.entries.par_iter().flat_map_iter(work).collect()
        } else {
            v.entries.iter().flat_map(work).collect()
        };
        FockVector::from_pairs(pairs)
    }

    pub fn apply(&self, v: &FockVector<C>) -> FockVector<C> {
        self.apply_window(v, 0, i64::MAX / 4)
    }

    /// Adjoint for `φ_k* = (-1)^k φ_{-k}` and real coefficients.
    pub fn adjoint(&self) -> Self {
        let f = self.coef.clone();
        BandOp {
            kmin: self.kmax.map(|k| -k),
            kmax: self.kmin.map(|k| -k),
            coef: Arc::new(move |m: i64, l: i64| {
                let c = f(-m, l - m);
                if m.rem_euclid(2) == 0 {
                    c
                } else {
                    c.scale(&-Q::one())
                }
            }),
            constant: self.constant.clone(),
            label: format!("({})*", self.label),
        }
    }
}

/// The `l` with `l > m/2` for which `φ_{l-m} φ_{-l}` can act on `s`.
fn candidates(m: i64, s: State) -> Vec<i64> {
    let mut out = Vec::new();
    // l > 0 must be a part
    let mut x = s >> 1;
    let mut p = 1i64;
    while x != 0 {
        if x & 1 == 1 && 2 * p > m {
            out.push(p);
        }
        x >>= 1;
        p += 1;
    }
    if m < 0 {
        // l = 0 and m/2 < l < 0
        out.push(0);
        let mut l = -1;
        while 2 * l > m {
            out.push(l);
            l -= 1;
        }
    }
    out
}

/// Converts a non-antisymmetrized coefficient `D(m, l)` into the form used
/// by [`BandOp`].
pub fn antisymmetrize<C: Coeff>(
    d: impl Fn(i64, i64) -> C + Send + Sync + 'static,
) -> impl Fn(i64, i64) -> C + Send + Sync + 'static {
    move |m, l| {
        let mut a = d(m, l);
        a.add_assign(&d(m, m - l).scale(&-Q::one()));
        a
    }
}

fn sgn_q(n: i64) -> Q {
    q(parity_sign(n) as i64)
}

/// `α_m = ½ Σ_k (-1)^k Ê_{k-m,k}`; zero for even `m`.
pub fn alpha_op<C: Coeff>(m: i64) -> BandOp<C> {
    BandOp::new(
        format!("alpha_{m}"),
        Some(m),
        Some(m),
        antisymmetrize(move |mm, l| {
            if mm % 2 == 0 {
                C::nil()
            } else {
                C::from_q(sgn_q(l) / q(2))
            }
        }),
    )
}

pub fn apply_alpha<C: Coeff>(m: i64, v: &FockVector<C>) -> FockVector<C> {
    if m % 2 == 0 {
        return FockVector::new();
    }
    alpha_op::<C>(m).apply(v)
}

/// Applies `α_{-μ_1} ··· α_{-μ_ℓ}` to `v` (all commute).
pub fn apply_alpha_minus(mu: &Partition, v: &FockVector<Q>) -> FockVector<Q> {
    let mut r = v.clone();
    for p in mu.parts() {
        r = apply_alpha(-(*p as i64), &r);
    }
    r
}

/// `F_{r+1}`, diagonal with eigenvalue `p_{r+1}` of the positive parts.
pub fn f_eigenvalue(r1: u32, s: State) -> Q {
    parts(s).into_iter().filter(|p| *p > 0).fold(Q::zero(), |a, p| a + qpow(&q(p), r1 as i64))
}

/// `F_{r+1}` for even `r`; zero for odd `r` (those operators vanish).
pub fn apply_f<C: Coeff>(r: u32, v: &FockVector<C>) -> FockVector<C> {
    if r % 2 == 1 {
        return FockVector::new();
    }
    let mut out = FockVector::new();
    for (s, c) in &v.entries {
        out.add_term(*s, c.scale(&f_eigenvalue(r + 1, *s)));
    }
    out
}

/// `F_{r+1}` as a generic quadratic (used to cross-check the diagonal form).
pub fn f_band<C: Coeff>(r1: u32) -> BandOp<C> {
    BandOp::new(
        format!("F_{r1}"),
        Some(0),
        Some(0),
        antisymmetrize(move |_m, l| C::from_q(sgn_q(l) * qpow(&q(l), r1 as i64) / q(2))),
    )
}

/// `Ê_m(z)` with exact hyperbolic coefficients:
/// `½ Σ_l (-1)^l e^{(l - m/2) z} :φ_{l-m} φ_{-l}:`.
pub fn e_hat_op(m: i64) -> BandOp<HyperbolicPoly> {
    BandOp::new(
        format!("Ehat_{m}(z)"),
        Some(m),
        Some(m),
        antisymmetrize(move |mm, l| HyperbolicPoly::monomial(2 * l - mm, sgn_q(l) / q(2))),
    )
}

/// `Ê_m(a z + b w)` with two-variable exponential coefficients.
pub fn e_hat_op2(m: i64, a: i64, b: i64) -> BandOp<ExpPoly2> {
    BandOp::new(
        format!("Ehat_{m}({a}z+{b}w)"),
        Some(m),
        Some(m),
        antisymmetrize(move |mm, l| {
            let e = 2 * l - mm;
            ExpPoly2::monomial((e * a, e * b), sgn_q(l) / q(2))
        }),
    )
}

/// Taylor coefficients of `e^{x z}` up to `z^n`.
fn exp_taylor(x: &Q, n: i64) -> Vec<Q> {
    let mut v = Vec::with_capacity(n as usize + 1);
    let mut c = Q::one();
    for k in 0..=n {
        if k > 0 {
            c = c * x / q(k);
        }
        v.push(c.clone());
    }
    v
}

/// `ϙ(z)/ς(z) = ¼ coth(z/2)` as a Laurent series in `z` up to `z^n`.
pub fn qoppa_over_varsigma(var: usize, n: i64) -> Series {
    // = (1/(2z)) · (z/2)coth(z/2)
    let c = dense::half_coth((n + 2).max(2) as usize);
    let mut prec = [INF; NV];
    prec[var] = n;
    Series::from_terms(
        c.iter().enumerate().map(|(k, x)| (mono1(var, k as i32 - 1), x / q(2))),
        prec,
    )
}

/// `E_m(z)` or `Ê_m(z)` with coefficients Taylor-expanded in variable `var`
/// up to `z^n`.
pub fn e_series_op(m: i64, corrected: bool, var: usize, n: i64) -> BandOp<Series> {
    let op = BandOp::new(
        format!("E_{m}(z)"),
        Some(m),
        Some(m),
        antisymmetrize(move |mm, l| {
            let x = qr(2 * l - mm, 2);
            let t = exp_taylor(&x, n);
            Series::univariate(var, &t, 0, n).scale(&(sgn_q(l) / q(2)))
        }),
    );
    if corrected && m == 0 {
        op.with_constant(qoppa_over_varsigma(var, n))
    } else {
        op
    }
}

/// Eigenvalue of `Ê_0(z)` on `s`: `Σ_{p > 0} sinh(p z)`.
pub fn e0_eigenvalue(s: State) -> HyperbolicPoly {
    let mut h = HyperbolicPoly::zero();
    for p in parts(s) {
        if p > 0 {
            h = &h + &HyperbolicPoly::sinh(p);
        }
    }
    h
}

/// A primitive of an operator program.
pub trait Primitive<C: Coeff>: Send + Sync {
    fn shift(&self) -> Shift;
    /// Applies the primitive keeping outputs with energy in `[lo, hi]`.
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>>;
    fn label(&self) -> String;
    /// Absolute cap on output energies, if any.
    fn max_out(&self) -> Option<i64> {
        None
    }
}

impl<C: Coeff> Primitive<C> for BandOp<C> {
    fn shift(&self) -> Shift {
        BandOp::shift(self)
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        Ok(self.apply_window(v, lo, hi))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Clifford mode `φ_k`.
pub struct PhiOp(pub i64);

impl<C: Coeff> Primitive<C> for PhiOp {
    fn shift(&self) -> Shift {
        Shift::exact(self.0)
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        Ok(apply_phi(self.0, v).filter_energy(lo, hi))
    }
    fn label(&self) -> String {
        format!("phi_{}", self.0)
    }
}

/// Normal-ordered quadratic `Ê_{j,k} = :φ_j φ_{-k}:`.
pub struct QuadOp(pub i64, pub i64);

impl<C: Coeff> Primitive<C> for QuadOp {
    fn shift(&self) -> Shift {
        Shift::exact(self.0 - self.1)
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        Ok(apply_quad(self.0, self.1, v).filter_energy(lo, hi))
    }
    fn label(&self) -> String {
        format!("Ehat_{{{},{}}}", self.0, self.1)
    }
}

/// Diagonal operator with a state-dependent eigenvalue.
pub struct DiagOp<C> {
    pub f: Arc<dyn Fn(State) -> C + Send + Sync>,
    pub label: String,
}

impl<C: Coeff> DiagOp<C> {
    pub fn new(label: impl Into<String>, f: impl Fn(State) -> C + Send + Sync + 'static) -> Self {
        DiagOp { f: Arc::new(f), label: label.into() }
    }
}

impl<C: Coeff> Primitive<C> for DiagOp<C> {
    fn shift(&self) -> Shift {
        Shift::exact(0)
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        let mut r = FockVector::new();
        for (s, c) in &v.entries {
            if (lo..=hi).contains(&energy(*s)) {
                r.add_term(*s, c.mul(&(self.f)(*s)));
            }
        }
        Ok(r)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `F_{r+1}` as a program primitive.
pub fn f_diag<C: Coeff>(r1: u32) -> DiagOp<C> {
    DiagOp::new(format!("F_{r1}"), move |s| C::from_q(f_eigenvalue(r1, s)))
}

/// `c^H`.
pub fn scale_h<C: Coeff>(c: C) -> DiagOp<C> {
    DiagOp::new("c^H", move |s| {
        let mut r = C::from_q(Q::one());
        for _ in 0..energy(s) {
            r = r.mul(&c);
        }
        r
    })
}

/// `exp(c · X)` for a primitive `X` with a fixed nonzero energy shift.
pub struct ExpOp<C: Coeff> {
    pub inner: Box<dyn Primitive<C>>,
    pub c: C,
    pub cap: Option<i64>,
}

impl<C: Coeff> ExpOp<C> {
    /// Drops all output components above energy `cap`.
    pub fn capped(mut self, cap: i64) -> Self {
        self.cap = Some(cap);
        self
    }
}

impl<C: Coeff> Primitive<C> for ExpOp<C> {
    fn shift(&self) -> Shift {
        let s = self.inner.shift();
        match (s.lo, s.hi) {
            (Some(a), Some(b)) if a == b && a < 0 => Shift::range(None, Some(0)),
            (Some(a), Some(b)) if a == b && a > 0 => Shift::range(Some(0), None),
            _ => Shift::range(None, None),
        }
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        let s = self.inner.shift();
        let d = match (s.lo, s.hi) {
            (Some(a), Some(b)) if a == b && a != 0 => a,
            _ => {
                return Err(Error::UnboundedWindow(format!(
                    "exponential of {} needs a fixed nonzero shift",
                    self.inner.label()
                )))
            }
        };
        let (vlo, vhi) = match v.energy_range() {
            Some(r) => r,
            None => return Ok(FockVector::new()),
        };
        // intermediate energies stay between the input and the output window
        let (ilo, ihi) = if d < 0 { (lo.min(vlo), vhi) } else { (vlo, hi.max(vhi)) };
        let mut acc = v.filter_energy(lo, hi);
        let mut term = v.clone();
        let mut n = 0i64;
        loop {
            n += 1;
            term = self.inner.apply(&term, ilo.max(0), ihi)?.mul_coeff(&self.c).scale(&qr(1, n));
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term.filter_energy(lo, hi));
            if n > 4 * (ihi - ilo + 2) + 64 {
                return Err(Error::UnboundedWindow("exponential did not terminate".into()));
            }
        }
        Ok(acc)
    }
    fn label(&self) -> String {
        format!("exp({})", self.inner.label())
    }
    fn max_out(&self) -> Option<i64> {
        self.cap
    }
}

/// `e^{c α_m}`.
pub fn exp_alpha<C: Coeff>(m: i64, c: Q) -> ExpOp<C> {
    ExpOp { inner: Box::new(alpha_op::<C>(m)), c: C::from_q(c), cap: None }
}

/// Energy projector `P_d = Σ_{μ ∈ OP_d} (2^{ℓ(μ)}/𝔷_μ) |α_{-μ}⟩⟨α_μ|`.
pub struct ProjectorOp(pub i64);

impl<C: Coeff> Primitive<C> for ProjectorOp {
    fn shift(&self) -> Shift {
        Shift::exact(0)
    }
    fn apply(&self, v: &FockVector<C>, lo: i64, hi: i64) -> Result<FockVector<C>> {
        let d = self.0;
        if !(lo..=hi).contains(&d) {
            return Ok(FockVector::new());
        }
        let mut out = FockVector::new();
        for mu in enumerate(d as u32, Class::Odd) {
            // ⟨0|α_μ|v⟩
            let mut w = v.clone();
            for p in mu.parts() {
                w = alpha_op::<C>(*p as i64).apply(&w);
            }
            let pair = w.vacuum_coeff();
            if pair.is_nil() {
                continue;
            }
            let wt = qpow(&q(2), mu.len() as i64) / zmu(&mu);
            let ket = alpha_minus_vacuum(&mu);
            for (s, c) in &ket.entries {
                out.add_term(*s, pair.mul(&C::from_q(c * &wt)));
            }
        }
        Ok(out)
    }
    fn label(&self) -> String {
        format!("P_{}", self.0)
    }
    fn max_out(&self) -> Option<i64> {
        Some(self.0)
    }
}

/// Operator program, listed in reading order (leftmost first) and applied
/// right to left.
pub struct OperatorProgram<C: Coeff> {
    pub ops: Vec<Box<dyn Primitive<C>>>,
}

impl<C: Coeff> Default for OperatorProgram<C> {
    fn default() -> Self {
        OperatorProgram { ops: Vec::new() }
    }
}

impl<C: Coeff> OperatorProgram<C> {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn push(mut self, p: impl Primitive<C> + 'static) -> Self {
        self.ops.push(Box::new(p));
        self
    }
    pub fn push_boxed(mut self, p: Box<dyn Primitive<C>>) -> Self {
        self.ops.push(p);
        self
    }
    pub fn shifts(&self) -> Vec<Shift> {
        self.ops.iter().map(|o| o.shift()).collect()
    }
    /// `⟨0| program |0⟩`.
    pub fn vev(&self) -> Result<C> {
        Ok(self.apply_to(&FockVector::vacuum(), (0, 0))?.vacuum_coeff())
    }
    /// Applies the program to `v`, keeping final energies in `end`.
    pub fn apply_to(&self, v: &FockVector<C>, end: (i64, i64)) -> Result<FockVector<C>> {
        let start = v.energy_range().unwrap_or((0, 0));
        let caps: Vec<Option<i64>> = self.ops.iter().map(|o| o.max_out()).collect();
        let Some(win) = infer_windows_capped(&self.shifts(), &caps, start, end)? else {
            return Ok(FockVector::new());
        };
        let mut cur = v.clone();
        for (op, (lo, hi)) in self.ops.iter().zip(win.iter()).rev() {
            cur = op.apply(&cur, *lo, *hi)?;
            if cur.is_zero() {
                break;
            }
        }
        Ok(cur.filter_energy(end.0, end.1))
    }
}

const NEG_INF: i64 = i64::MIN / 4;
const POS_INF: i64 = i64::MAX / 4;

fn sat(x: i64) -> i64 {
    x.clamp(NEG_INF, POS_INF)
}

/// Output energy window of each primitive (reading order), or `None` if no
/// path reaches the final window. Errors when a window is unbounded.
pub fn infer_windows(
    shifts: &[Shift],
    start: (i64, i64),
    end: (i64, i64),
) -> Result<Option<Vec<(i64, i64)>>> {
    infer_windows_capped(shifts, &vec![None; shifts.len()], start, end)
}

/// As [`infer_windows`], with optional absolute caps on output energies.
pub fn infer_windows_capped(
    shifts: &[Shift],
    caps: &[Option<i64>],
    start: (i64, i64),
    end: (i64, i64),
) -> Result<Option<Vec<(i64, i64)>>> {
    let n = shifts.len();
    let lo_of = |s: &Shift| s.lo.unwrap_or(NEG_INF);
    let hi_of = |s: &Shift| s.hi.unwrap_or(POS_INF);
    // forward: fwd[j] = energies after op j
    let mut fwd = vec![(0, 0); n];
    let mut cur = start;
    for j in (0..n).rev() {
        let s = &shifts[j];
        let a = sat(cur.0.saturating_add(lo_of(s))).max(0);
        let b = if cur.1 >= POS_INF || hi_of(s) >= POS_INF {
            POS_INF
        } else {
            sat(cur.1 + hi_of(s))
        };
        let b = caps[j].map_or(b, |c| b.min(c));
        fwd[j] = (a, b);
        cur = (a, b);
    }
    // backward: bwd[j] = energies after op j that can still reach `end`
    let mut bwd = vec![(0, 0); n];
    let mut cur = end;
    for j in 0..n {
        bwd[j] = cur;
        let s = &shifts[j];
        let a = if hi_of(s) >= POS_INF { NEG_INF } else { sat(cur.0 - hi_of(s)) };
        let b = if lo_of(s) <= NEG_INF || cur.1 >= POS_INF { POS_INF } else { sat(cur.1 - lo_of(s)) };
        cur = (a.max(0), b);
    }
    // the input of the rightmost op must meet the start range
    if n > 0 && (cur.1 < start.0 || cur.0 > start.1) {
        return Ok(None);
    }
    // a cap also bounds the inputs of everything to its right
    let mut eff = vec![POS_INF; n];
    let mut carried = POS_INF;
    for j in 0..n {
        eff[j] = caps[j].map_or(carried, |c| c.min(carried));
        carried = match shifts[j].lo {
            Some(l) if eff[j] < POS_INF => sat(eff[j] - l),
            _ => POS_INF,
        };
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let lo = fwd[j].0.max(bwd[j].0);
        let hi = fwd[j].1.min(bwd[j].1).min(eff[j]);
        if hi >= POS_INF {
            return Err(Error::UnboundedWindow(format!("after primitive #{j}")));
        }
        if lo > hi {
            return Ok(None);
        }
        out.push((lo, hi));
    }
    Ok(Some(out))
}

fn alpha_cache() -> &'static Mutex<HashMap<Partition, Arc<FockVector<Q>>>> {
    static C: OnceLock<Mutex<HashMap<Partition, Arc<FockVector<Q>>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `α_{-μ}|0⟩`, memoized.
pub fn alpha_minus_vacuum(mu: &Partition) -> Arc<FockVector<Q>> {
    if let Some(v) = alpha_cache().lock().unwrap().get(mu) {
        return v.clone();
    }
    let v = Arc::new(apply_alpha_minus(mu, &FockVector::vacuum()));
    alpha_cache().lock().unwrap().entry(mu.clone()).or_insert(v).clone()
}

/// `α_{-1}^d |0⟩ / d!`, memoized.
pub fn alpha_minus1_power(d: u32) -> Arc<FockVector<Q>> {
    static C: OnceLock<Mutex<HashMap<u32, Arc<FockVector<Q>>>>> = OnceLock::new();
    let cache = C.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&d) {
        return v.clone();
    }
    let v = if d == 0 {
        FockVector::vacuum()
    } else {
        let prev = alpha_minus1_power(d - 1);
        apply_alpha(-1, &prev).scale(&qr(1, d as i64))
    };
    let v = Arc::new(v);
    cache.lock().unwrap().entry(d).or_insert(v).clone()
}

/// Weights `w_s = ⟨0|α_1^d/d!|s⟩⟨s|α_{-1}^d/d!|0⟩ / ⟨s|s⟩` so that for any
/// diagonal `D`, `⟨(α_1^d/d!) D (α_{-1}^d/d!)⟩ = Σ_s w_s D(s)`.
pub fn diagonal_weights(d: u32) -> Vec<(State, Q)> {
    let v = alpha_minus1_power(d);
    v.entries.iter().map(|(s, c)| (*s, c * c * norm2(*s))).collect()
}

/// Sergeev character `ζ^λ_μ`, read off from `α_{-μ}|0⟩`.
pub fn sergeev_character(lam: &Partition, mu: &Partition) -> Result<Q> {
    if lam.size() != mu.size() {
        return Err(Error::InvalidInput(format!("|{lam}| != |{mu}|")));
    }
    if !mu.is_odd() || !lam.is_strict() {
        return Err(Error::InvalidInput("need strict λ and odd μ".into()));
    }
    let key = (lam.clone(), mu.clone());
    static C: OnceLock<Mutex<HashMap<(Partition, Partition), Q>>> = OnceLock::new();
    let cache = C.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(x) = cache.lock().unwrap().get(&key) {
        return Ok(x.clone());
    }
    let v = alpha_minus_vacuum(mu);
    let pb = to_partition_basis(&v)?;
    let c = pb.get(lam).cloned().unwrap_or_else(Q2::zero);
    let p = (lam.len() % 2) as i64;
    // ζ = 2^{p/2 + ℓ(μ)} · coefficient of |λ⟩
    let z = &c * &Q2::sqrt2_pow(p + 2 * mu.len() as i64);
    let z = z
        .as_rational()
        .cloned()
        .ok_or_else(|| Error::InvalidInput(format!("character ζ^{lam}_{mu} is not rational")))?;
    cache.lock().unwrap().insert(key, z.clone());
    Ok(z)
}

/// All characters of degree `d`, keyed by `(λ, μ)`.
pub fn character_table(d: u32) -> Result<BTreeMap<(Partition, Partition), Q>> {
    let mut t = BTreeMap::new();
    for lam in enumerate(d, Class::Strict) {
        for mu in enumerate(d, Class::Odd) {
            t.insert((lam.clone(), mu.clone()), sergeev_character(&lam, &mu)?);
        }
    }
    Ok(t)
}

/// `Σ_μ 2^{-ℓ(μ)}/𝔷_μ f_μ g_μ` over odd `μ ⊢ d`.
pub fn character_pairing(d: u32, lam: &Partition, nu: &Partition) -> Result<Q> {
    let mut acc = Q::zero();
    for mu in enumerate(d, Class::Odd) {
        acc += sergeev_character(lam, &mu)? * sergeev_character(nu, &mu)?
            / (qpow(&q(2), mu.len() as i64) * zmu(&mu));
    }
    Ok(acc)
}

impl fmt::Display for FockVector<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.entries.iter().map(|(s, c)| format!("{c}·{:?}", parts(*s))).collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

/// `(2k+1)!`-normalized Taylor coefficient of `ϙ/ς` at `z^{2k+1}`.
pub fn qoppa_over_varsigma_coeff(n: i64) -> Q {
    if n < -1 || n % 2 == 0 {
        return Q::zero();
    }
    let c = dense::half_coth((n + 2) as usize);
    &c[(n + 1) as usize] / q(2)
}

pub fn qfact_i(n: i64) -> Q {
    qfact(n as u64)
}

/// `ς(m x)/ς(x)` as a Laurent polynomial in `e^{x/2}`.
fn qnum(m: i64) -> HyperbolicPoly {
    let mut h = HyperbolicPoly::zero();
    for j in 0..m.abs() {
        h.add_term(m.abs() - 1 - 2 * j, q(m.signum()));
    }
    h
}

/// Right-hand side of `[Ê_m(z), Ê_n(w)]` applied to `v`. With `literal` the
/// second term carries `ς(-mw - nz)` instead of `ς(mw + nz)`.
pub fn e_commutator_rhs(m: i64, n: i64, v: &FockVector<ExpPoly2>, literal: bool) -> FockVector<ExpPoly2> {
    let vs = HyperbolicPoly::varsigma();
    let c1 = ExpPoly2::from_linear(&vs, -n, m).scale(&qr(1, 2));
    let sgn = if n % 2 == 0 { qr(1, 2) } else { qr(-1, 2) };
    let c2 = if literal {
        ExpPoly2::from_linear(&vs, -n, -m).scale(&sgn)
    } else {
        ExpPoly2::from_linear(&vs, n, m).scale(&sgn)
    };
    let mut r = e_hat_op2(m + n, 1, 1).apply(v).mul_coeff(&c1);
    r = r.add(&e_hat_op2(m + n, 1, -1).apply(v).mul_coeff(&c2));
    if m + n == 0 {
        // constant parts ϙ/ς of E_0(z±w), multiplied by the ς prefactors
        let qo = HyperbolicPoly::qoppa();
        let g1 = &qnum(m) * &qo;
        let g2 = if literal { &qnum(m) * &qo } else { &qnum(-m) * &qo };
        let k = &ExpPoly2::from_linear(&g1, 1, 1).scale(&qr(1, 2))
            + &ExpPoly2::from_linear(&g2, 1, -1).scale(&sgn);
        r = r.add(&v.mul_coeff(&k));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(ps: &[i64]) -> State {
        state_from_parts(ps).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert!(phi(-2, VACUUM).is_none());
        assert_eq!(phi(3, VACUUM), Some((st(&[3]), Fac::ONE)));
        let v: FockVector<Q> = FockVector::basis(st(&[4, 1]));
        let w = apply_phi(0, &apply_phi(0, &v));
        assert_eq!(w, v.scale(&qr(1, 2)));
    }

    #[test]
    fn quadratic_vevs() {
        let vev = |a: i64, b: i64| -> Q {
            OperatorProgram::<Q>::new().push(PhiOp(a)).push(PhiOp(b)).vev().unwrap()
        };
        assert_eq!(vev(0, 0), qr(1, 2));
        assert_eq!(vev(-1, 1), q(-1));
        assert_eq!(vev(1, -1), q(0));
        for a in -4..=4 {
            for b in -4..=4 {
                assert_eq!(vev(a, b), vev_phi2(a, b), "({a},{b})");
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let vac: FockVector<Q> = FockVector::vacuum();
        assert!(apply_alpha(3, &vac).is_zero());
        let a = apply_alpha(-1, &vac);
        assert_eq!(a, FockVector::basis(st(&[1, 0])));
        let comm = apply_alpha(1, &a).sub(&apply_alpha(-1, &apply_alpha(1, &vac)));
        assert_eq!(comm, vac.scale(&qr(1, 2)));
        assert!(apply_alpha(2, &a).is_zero());
    }

    #[test]
    fn f_eigen_examples() {
        let s31 = normalized_state(&Partition::new(vec![3, 1]).unwrap()).unwrap().0;
        let v: FockVector<Q> = FockVector::basis(s31);
        assert_eq!(apply_f(2, &v), v.scale(&q(28)));
        assert!(apply_f(2, &FockVector::<Q>::vacuum()).is_zero());
        let s3 = normalized_state(&Partition::new(vec![3]).unwrap()).unwrap().0;
        let w: FockVector<Q> = FockVector::basis(s3);
        assert_eq!(apply_f(4, &w), w.scale(&q(243)));
        // diagonal form agrees with the quadratic definition
        for s in all_states_up_to(6) {
            let b: FockVector<Q> = FockVector::basis(s);
            assert_eq!(f_band::<Q>(3).apply(&b), apply_f(2, &b));
        }
    }

    #[test]
    fn e0_on_31_is_sinh_sum() {
        let s31 = st(&[3, 1]);
        let v: FockVector<HyperbolicPoly> = FockVector::basis(s31);
        let r = e_hat_op(0).apply(&v);
        let expect = &HyperbolicPoly::sinh(3) + &HyperbolicPoly::sinh(1);
        assert_eq!(r, FockVector::single(s31, expect.clone()));
        // term-by-term against F eigenvalues: [z^r] sinh-sum = p_r / r!
        for r in (1..=9).step_by(2) {
            assert_eq!(expect.taylor(r), f_eigenvalue(r, s31) / qfact(r as u64));
        }
    }

    #[test]
    fn corrected_e0_vev_is_quarter_coth() {
        let op = e_series_op(0, true, 2, 7);
        let v = op.apply(&FockVector::<Series>::vacuum()).vacuum_coeff();
        // ¼coth(z/2) = 1/(2z) + z/24 - z^3/1440 + ...
        assert_eq!(v.coeff(&mono1(2, -1)).unwrap(), qr(1, 2));
        assert_eq!(v.coeff(&mono1(2, 1)).unwrap(), qr(1, 24));
        assert_eq!(v.coeff(&mono1(2, 3)).unwrap(), qr(-1, 1440));
        assert_eq!(qoppa_over_varsigma_coeff(3), qr(-1, 1440));
    }

    #[test]
    fn e_parity() {
        for m in -3i64..=3 {
            let op = e_hat_op(m);
            for s in states_up_to(5) {
                let r = op.apply(&FockVector::basis(s));
                for (t, c) in &r.entries {
                    let sign = if (m + 1) % 2 == 0 { q(1) } else { q(-1) };
                    assert_eq!(c.reflect(), c.scale(&sign), "m={m} {s} -> {t}");
                }
            }
        }
    }

    #[test]
    fn characters() {
        let one = Partition::new(vec![1]).unwrap();
        assert_eq!(sergeev_character(&one, &one).unwrap(), q(2));
        assert_eq!(sergeev_character(&Partition::empty(), &Partition::empty()).unwrap(), q(1));
        for d in 0..=5u32 {
            for lam in enumerate(d, Class::Strict) {
                let p = (lam.len() % 2) as i64;
                assert_eq!(character_pairing(d, &lam, &lam).unwrap(), qpow(&q(2), p));
            }
        }
    }

    #[test]
    fn window_inference() {
        // ⟨α_1 α_{-1}⟩
        let prog = OperatorProgram::<Q>::new().push(alpha_op(1)).push(alpha_op(-1));
        assert_eq!(prog.vev().unwrap(), qr(1, 2));
        // unbounded raising with an open final window is rejected
        let bad = OperatorProgram::<Q>::new().push(exp_alpha(-1, q(1)));
        let r = bad.apply_to(&FockVector::vacuum(), (0, POS_INF));
        assert!(matches!(r, Err(Error::UnboundedWindow(_))));
        // ⟨e^{α_1} 0^H e^{α_{-1}}⟩ = 1 needs a cap on the raising exponential
        let open = OperatorProgram::<Q>::new()
            .push(exp_alpha(1, q(1)))
            .push(scale_h(q(0)))
            .push(exp_alpha(-1, q(1)));
        assert!(matches!(open.vev(), Err(Error::UnboundedWindow(_))));
        let p = OperatorProgram::<Q>::new()
            .push(exp_alpha(1, q(1)))
            .push(scale_h(q(0)))
            .push(exp_alpha::<Q>(-1, q(1)).capped(6));
        assert_eq!(p.vev().unwrap(), q(1));
        // ⟨e^{α_1} e^{α_{-1}}⟩ truncated at energy 3: Σ_{n<=3} (1/2)^n/n!
        let t = OperatorProgram::<Q>::new()
            .push(exp_alpha(1, q(1)))
            .push(exp_alpha::<Q>(-1, q(1)).capped(3));
        assert_eq!(t.vev().unwrap(), q(1) + qr(1, 2) + qr(1, 8) + qr(1, 48));
    }

    #[test]
    fn car_closure() {
        for s in all_states_up_to(8) {
            let v: FockVector<Q> = FockVector::basis(s);
            for k in -6i64..=6 {
                for l in -6i64..=6 {
                    let lhs = apply_phi(k, &apply_phi(l, &v)).add(&apply_phi(l, &apply_phi(k, &v)));
                    let rhs = if k + l == 0 {
                        v.scale(&q(parity_sign(k) as i64))
                    } else {
                        FockVector::new()
                    };
                    assert_eq!(lhs, rhs, "k={k} l={l} s={s}");
                }
            }
        }
    }

    #[test]
    fn heisenberg() {
        for s in states_up_to(8) {
            let v: FockVector<Q> = FockVector::basis(s);
            for m in (-7i64..=7).filter(|m| m % 2 != 0) {
                for n in (-7i64..=7).filter(|n| n % 2 != 0) {
                    let lhs = apply_alpha(m, &apply_alpha(n, &v))
                        .sub(&apply_alpha(n, &apply_alpha(m, &v)));
                    let rhs = if m + n == 0 { v.scale(&qr(m, 2)) } else { FockVector::new() };
                    assert_eq!(lhs, rhs, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn e_commutator() {
        let mut literal_fails = false;
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let ez = e_hat_op2(m, 1, 0);
                let ew = e_hat_op2(n, 0, 1);
                for s in all_states_up_to(6) {
                    let v: FockVector<ExpPoly2> = FockVector::basis(s);
                    let lhs = ez.apply(&ew.apply(&v)).sub(&ew.apply(&ez.apply(&v)));
                    assert_eq!(lhs, e_commutator_rhs(m, n, &v, false), "m={m} n={n} s={s}");
                    if lhs != e_commutator_rhs(m, n, &v, true) {
                        literal_fails = true;
                    }
                }
            }
        }
        // the sign ς(-mw-nz) in the second term does not give an identity
        assert!(literal_fails);
    }

    #[test]
    fn projector() {
        let states = states_up_to(6);
        let mut total: Vec<FockVector<Q>> = vec![FockVector::new(); states.len()];
        for d in 0..=6 {
            let p = ProjectorOp(d);
            for (i, s) in states.iter().enumerate() {
                let v: FockVector<Q> = FockVector::basis(*s);
                let pv = Primitive::<Q>::apply(&p, &v, 0, 64).unwrap();
                if energy(*s) == d {
                    assert_eq!(pv, v);
                } else {
                    assert!(pv.is_zero());
                }
                let ppv = Primitive::<Q>::apply(&p, &pv, 0, 64).unwrap();
                assert_eq!(ppv, pv);
                total[i] = total[i].add(&pv);
            }
        }
        for (i, s) in states.iter().enumerate() {
            assert_eq!(total[i], FockVector::basis(*s));
        }
    }

    #[test]
    fn orthogonality() {
        for d in 0..=6u32 {
            let strict = enumerate(d, Class::Strict);
            for a in &strict {
                for b in &strict {
                    let expect = if a == b { qpow(&q(2), (a.len() % 2) as i64) } else { q(0) };
                    assert_eq!(character_pairing(d, a, b).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn program_vev_matches_character_sum() {
        // ⟨α_3 F_3 P_3 α_{-1}^3⟩ = Σ_λ 2^{-p(λ)-4} ζ^λ_(3) ζ^λ_(1,1,1) p_3(λ)
        let prog = OperatorProgram::<Q>::new()
            .push(alpha_op(3))
            .push(f_diag(3))
            .push(ProjectorOp(3))
            .push(alpha_op(-1))
            .push(alpha_op(-1))
            .push(alpha_op(-1));
        let three = Partition::new(vec![3]).unwrap();
        let ones = Partition::new(vec![1, 1, 1]).unwrap();
        let mut expect = q(0);
        for lam in enumerate(3, Class::Strict) {
            let p = (lam.len() % 2) as i64;
            expect += qpow(&q(2), -p - 4)
                * sergeev_character(&lam, &three).unwrap()
                * sergeev_character(&lam, &ones).unwrap()
                * lam.power_sum(3);
        }
        assert_eq!(prog.vev().unwrap(), expect);
        assert_ne!(expect, q(0));
    }

    proptest! {
        #[test]
        fn car_relations(k in -5i64..=5, l in -5i64..=5, idx in 0usize..40) {
            let states = all_states_up_to(6);
            let s = states[idx % states.len()];
            let v: FockVector<Q> = FockVector::basis(s);
            let lhs = apply_phi(k, &apply_phi(l, &v)).add(&apply_phi(l, &apply_phi(k, &v)));
            let rhs = if k + l == 0 { v.scale(&q(parity_sign(k) as i64)) } else { FockVector::new() };
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn adjoint_matches_inner_product(m in -3i64..=3, i in 0usize..30, j in 0usize..30) {
            let states = states_up_to(5);
            let a = states[i % states.len()];
            let b = states[j % states.len()];
            let op = e_hat_op(m);
            let va: FockVector<HyperbolicPoly> = FockVector::basis(a);
            let vb: FockVector<HyperbolicPoly> = FockVector::basis(b);
            let lhs = va.inner(&op.apply(&vb));
            let rhs = op.adjoint().apply(&va).inner(&vb);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
