//! Multivariate truncated Laurent series with per-variable precision.
//!
//! A coefficient at exponent `e` is known iff `e[v] <= prec[v]` for every
//! variable `v`; nothing outside that box is stored. Products keep the
//! largest box that is still determined by the factors.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::{fmt_q, q, Q};

pub const NV: usize = 6;
pub type Mono = [i32; NV];
/// Precision value meaning "exact in this variable".
pub const INF: i64 = i64::MAX / 4;

pub const ZERO_MONO: Mono = [0; NV];

fn padd(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

pub fn mono1(v: usize, e: i32) -> Mono {
    let mut m = ZERO_MONO;
    m[v] = e;
    m
}

#[derive(Clone, Debug)]
pub struct Series {
    terms: BTreeMap<Mono, Q>,
    prec: [i64; NV],
}

impl PartialEq for Series {
    fn eq(&self, o: &Self) -> bool {
        self.prec == o.prec && self.terms == o.terms
    }
}

impl Series {
    pub fn zero() -> Self {
        Series { terms: BTreeMap::new(), prec: [INF; NV] }
    }
    /// The zero series known only up to `prec`, i.e. `O(...)`.
    pub fn big_o(prec: [i64; NV]) -> Self {
        Series { terms: BTreeMap::new(), prec }
    }
    pub fn one() -> Self {
        Self::constant(Q::one())
    }
    pub fn constant(c: Q) -> Self {
        Self::monomial(ZERO_MONO, c)
    }
    pub fn monomial(m: Mono, c: Q) -> Self {
        let mut s = Self::zero();
        s.add_term(m, c);
        s
    }
    pub fn var(v: usize) -> Self {
        Self::monomial(mono1(v, 1), Q::one())
    }
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, Q)>, prec: [i64; NV]) -> Self {
        let mut s = Series::big_o(prec);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn prec(&self) -> [i64; NV] {
        self.prec
    }
    pub fn terms(&self) -> &BTreeMap<Mono, Q> {
        &self.terms
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    /// No stored terms and exact in every variable.
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.iter().all(|p| *p >= INF)
    }
    pub fn in_box(&self, m: &Mono) -> bool {
        m.iter().zip(self.prec.iter()).all(|(e, p)| (*e as i64) <= *p)
    }
    /// Adds `c x^m`; silently ignored outside the known box.
    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() || !self.in_box(&m) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }
    /// Coefficient at `m`; errors if `m` lies outside the known box.
    pub fn coeff(&self, m: &Mono) -> Result<Q> {
        if !self.in_box(m) {
            return Err(Error::Series(format!("coefficient {m:?} beyond precision {:?}", self.prec)));
        }
        Ok(self.terms.get(m).cloned().unwrap_or_else(Q::zero))
    }
    pub fn constant_term(&self) -> Q {
        self.terms.get(&ZERO_MONO).cloned().unwrap_or_else(Q::zero)
    }
    pub fn min_exp(&self, v: usize) -> Option<i32> {
        self.terms.keys().map(|m| m[v]).min()
    }
    pub fn max_exp(&self, v: usize) -> Option<i32> {
        self.terms.keys().map(|m| m[v]).max()
    }
    /// Lower bound on the exponent of `v` over known and unknown terms.
    pub fn valuation(&self, v: usize) -> i64 {
        let m = self.min_exp(v).map(|x| x as i64).unwrap_or(INF);
        m.min(padd(self.prec[v], 1))
    }
    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|m| m.iter().any(|e| *e < 0))
    }

    /// Lowers the precision of `v` to `p` (never raises it).
    pub fn truncate(&self, v: usize, p: i64) -> Self {
        let mut prec = self.prec;
        prec[v] = prec[v].min(p);
        self.with_prec(prec)
    }
    /// Lowers precision componentwise to `prec`.
    pub fn with_prec(&self, prec: [i64; NV]) -> Self {
        let mut np = self.prec;
        for v in 0..NV {
            np[v] = np[v].min(prec[v]);
        }
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.iter().zip(np.iter()).all(|(e, p)| (*e as i64) <= *p))
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        Series { terms, prec: np }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Series::big_o(self.prec);
        }
        Series { terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(), prec: self.prec }
    }
    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut prec = self.prec;
        for v in 0..NV {
            prec[v] = prec[v].min(o.prec[v]);
        }
        let mut r = self.with_prec(prec);
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn add_assign(&mut self, o: &Self) {
        for v in 0..NV {
            if o.prec[v] < self.prec[v] {
                *self = self.with_prec(o.prec);
                break;
            }
        }
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }
    /// Product precision: `min(pa + val(b), pb + val(a))` per variable.
    pub fn mul_prec(&self, o: &Self) -> [i64; NV] {
        let mut prec = [INF; NV];
        for v in 0..NV {
            let a = padd(self.prec[v], o.valuation(v));
            let b = padd(o.prec[v], self.valuation(v));
            prec[v] = a.min(b);
        }
        prec
    }
    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.mul_prec(o);
        let mut acc: BTreeMap<Mono, Q> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            'inner: for (mb, cb) in &o.terms {
                let mut m = ZERO_MONO;
                for v in 0..NV {
                    let e = ma[v] + mb[v];
                    if e as i64 > prec[v] {
                        continue 'inner;
                    }
                    m[v] = e;
                }
                *acc.entry(m).or_insert_with(Q::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Series { terms: acc, prec }
    }
    pub fn mul_monomial(&self, m: &Mono, c: &Q) -> Self {
        self.mul(&Series::monomial(*m, c.clone()))
    }

    /// Inverse of a series whose constant term is nonzero and whose other
    /// terms are topologically nilpotent.
    pub fn inv(&self) -> Result<Self> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::Series("inverse needs a nonzero constant term".into()));
        }
        let ci = c.recip();
        let mut g = self.scale(&ci);
        g.add_term(ZERO_MONO, -Q::one());
        // 1/(1+g) = Σ (-g)^k
        let mg = g.neg();
        let sum = Self::geometric(&mg)?;
        Ok(sum.scale(&ci))
    }

    fn geometric(g: &Self) -> Result<Self> {
        Self::power_sum(g, |_| Q::one())
    }

    /// `Σ_k a_k g^k` until the powers leave the known box.
    fn power_sum(g: &Self, a: impl Fn(u32) -> Q) -> Result<Self> {
        if !g.constant_term().is_zero() {
            return Err(Error::Series("power series in a non-nilpotent argument".into()));
        }
        let mut acc = Series::big_o([INF; NV]).with_prec(g.prec_bound_for_powers());
        acc.add_term(ZERO_MONO, a(0));
        let mut pw = Series::one();
        for k in 1..=4096u32 {
            pw = pw.mul(g).with_prec(acc.prec);
            if pw.is_empty() {
                // every higher power is beyond precision as well
                return Ok(acc.with_prec(pw.prec));
            }
            let ak = a(k);
            if !ak.is_zero() {
                acc.add_assign(&pw.scale(&ak));
            }
        }
        Err(Error::Series("power series did not terminate; set a finite precision".into()))
    }

    fn prec_bound_for_powers(&self) -> [i64; NV] {
        self.prec
    }

    /// `exp(f)` for `f` without constant term or negative exponents.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Series("exp needs a zero constant term".into()));
        }
        if self.has_negative_exponents() {
            return Err(Error::Series("exp of a Laurent series".into()));
        }
        Self::power_sum(self, |k| crate::scalars::qfact(k as u64).recip())
    }

    /// `log(f)` for `f` with constant term one.
    pub fn log(&self) -> Result<Self> {
        if self.constant_term() != Q::one() {
            return Err(Error::Series("log needs constant term 1".into()));
        }
        if self.has_negative_exponents() {
            return Err(Error::Series("log of a Laurent series".into()));
        }
        let mut g = self.clone();
        g.add_term(ZERO_MONO, -Q::one());
        Self::power_sum(&g, |k| {
            if k == 0 {
                Q::zero()
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                Q::new(s.into(), (k as i64).into())
            }
        })
    }

    /// Integer power; negative exponents go through [`Series::inv`] or, for
    /// a single monomial, through exponent negation.
    pub fn pow(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            let mut r = Series::one();
            for _ in 0..n {
                r = r.mul(self);
            }
            return Ok(r);
        }
        let base = if self.terms.len() == 1 && self.prec.iter().all(|p| *p >= INF) {
            let (m, c) = self.terms.iter().next().unwrap();
            let mut mi = *m;
            for e in mi.iter_mut() {
                *e = -*e;
            }
            Series::monomial(mi, c.recip())
        } else {
            self.inv()?
        };
        base.pow(-n)
    }

    /// Coefficient of `x_v^k` as a series in the remaining variables.
    pub fn coeff_in(&self, v: usize, k: i32) -> Result<Self> {
        if k as i64 > self.prec[v] {
            return Err(Error::Series(format!("x{v}^{k} beyond precision {}", self.prec[v])));
        }
        let mut prec = self.prec;
        prec[v] = INF;
        let mut r = Series::big_o(prec);
        for (m, c) in &self.terms {
            if m[v] == k {
                let mut mm = *m;
                mm[v] = 0;
                r.add_term(mm, c.clone());
            }
        }
        Ok(r)
    }

    /// Substitutes `x_v -> c * x_v`.
    pub fn rescale_var(&self, v: usize, c: &Q) -> Self {
        let mut r = Series::big_o(self.prec);
        for (m, x) in &self.terms {
            r.add_term(*m, x * crate::scalars::qpow(c, m[v] as i64));
        }
        r
    }

    /// Moves variable `from` to index `to` (which must be unused).
    pub fn rename_var(&self, from: usize, to: usize) -> Self {
        if from == to {
            return self.clone();
        }
        let mut prec = self.prec;
        prec.swap(from, to);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut mm = *m;
                mm.swap(from, to);
                (mm, c.clone())
            })
            .collect();
        Series { terms, prec }
    }

    /// Compares two series on the intersection of their known boxes.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let mut prec = self.prec;
        for v in 0..NV {
            prec[v] = prec[v].min(o.prec[v]);
        }
        self.with_prec(prec).terms == o.with_prec(prec).terms
    }

    /// Splits by the power of `v`: each value is the coefficient series of `v^k`.
    pub fn terms_in_var(&self, v: usize) -> BTreeMap<i32, Series> {
        let mut out: BTreeMap<i32, Series> = BTreeMap::new();
        for k in self.terms.keys().map(|m| m[v]).collect::<std::collections::BTreeSet<_>>() {
            out.insert(k, self.coeff_in(v, k).expect("stored terms are in the box"));
        }
        out
    }

    /// Multiplies by the scalar exponential generating factor
    /// `Σ_k c_k x_v^k` given as a dense list.
    pub fn univariate(v: usize, coeffs: &[Q], start: i32, prec: i64) -> Self {
        let mut p = [INF; NV];
        p[v] = prec;
        Series::from_terms(
            coeffs.iter().enumerate().map(|(i, c)| (mono1(v, start + i as i32), c.clone())),
            p,
        )
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.terms.iter().map(|(m, c)| format!("{}*{:?}", fmt_q(c), m)).collect();
        let pr: Vec<String> = self
            .prec
            .iter()
            .enumerate()
            .filter(|(_, p)| **p < INF)
            .map(|(v, p)| format!("x{v}^{}", p + 1))
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".to_string() } else { parts.join(" + ") })?;
        if !pr.is_empty() {
            write!(f, " + O({})", pr.join(","))?;
        }
        Ok(())
    }
}

/// One-variable helpers on dense coefficient vectors `[x^0, x^1, ...]`.
pub mod dense {
    use super::*;

    pub fn mul(a: &[Q], b: &[Q], n: usize) -> Vec<Q> {
        let mut r = vec![Q::zero(); n];
        for (i, x) in a.iter().enumerate().take(n) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(n - i) {
                r[i + j] += x * y;
            }
        }
        r
    }

    /// Taylor coefficients of `sinh(x/2) / (x/2)` up to `x^{n-1}`.
    pub fn s_function(n: usize) -> Vec<Q> {
        (0..n)
            .map(|k| {
                if k % 2 == 1 {
                    Q::zero()
                } else {
                    // (x/2)^k / (k+1)!
                    Q::one()
                        / (crate::scalars::qfact(k as u64 + 1) * crate::scalars::qpow(&q(2), k as i64))
                }
            })
            .collect()
    }

    /// Taylor coefficients of `(x/2) coth(x/2) = Σ B_{2m} x^{2m} / (2m)!`.
    pub fn half_coth(n: usize) -> Vec<Q> {
        let b = crate::scalars::bernoulli(n.max(2));
        (0..n)
            .map(|k| if k == 1 { Q::zero() } else { &b[k] / crate::scalars::qfact(k as u64) })
            .collect()
    }

    /// `log` of a series with constant term 1.
    pub fn log(a: &[Q], n: usize) -> Vec<Q> {
        // (log a)' = a'/a
        let inv = inv(a, n);
        let da: Vec<Q> = (1..n).map(|k| a.get(k).cloned().unwrap_or_else(Q::zero) * q(k as i64)).collect();
        let p = mul(&da, &inv, n.saturating_sub(1));
        let mut r = vec![Q::zero(); n];
        for k in 1..n {
            r[k] = &p[k - 1] / q(k as i64);
        }
        r
    }

    pub fn inv(a: &[Q], n: usize) -> Vec<Q> {
        let mut r = vec![Q::zero(); n];
        let a0 = a[0].recip();
        for k in 0..n {
            let mut s = if k == 0 { Q::one() } else { Q::zero() };
            for j in 1..=k {
                if let Some(x) = a.get(j) {
                    s -= x * &r[k - j];
                }
            }
            r[k] = s * &a0;
        }
        r
    }

    /// `exp` of a series with zero constant term.
    pub fn exp(a: &[Q], n: usize) -> Vec<Q> {
        // r' = a' r
        let mut r = vec![Q::zero(); n];
        if n == 0 {
            return r;
        }
        r[0] = Q::one();
        for k in 1..n {
            let mut s = Q::zero();
            for j in 1..=k {
                if let Some(x) = a.get(j) {
                    s += x * q(j as i64) * &r[k - j];
                }
            }
            r[k] = s / q(k as i64);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::qr;

    fn u() -> Series {
        Series::var(0)
    }

    #[test]
    fn exp_examples() {
        assert_eq!(Series::zero().exp().unwrap(), Series::one());
        let x = Series::var(1);
        let f = u().mul(&x).truncate(0, 2);
        let e = f.exp().unwrap();
        let mut expect = Series::big_o(f.prec());
        expect.add_term(ZERO_MONO, q(1));
        expect.add_term([1, 1, 0, 0, 0, 0], q(1));
        expect.add_term([2, 2, 0, 0, 0, 0], qr(1, 2));
        assert_eq!(e, expect);
        // e^{u z^3/12} at u-order 1
        let z = Series::var(2);
        let g = u().mul(&z.pow(3).unwrap()).scale(&qr(1, 12)).truncate(0, 1);
        let eg = g.exp().unwrap();
        assert_eq!(eg.coeff(&[1, 0, 3, 0, 0, 0]).unwrap(), qr(1, 12));
        assert_eq!(eg.len(), 2);
    }

    #[test]
    fn exp_rejects_bad_input() {
        assert!(Series::one().exp().is_err());
        let lau = Series::var(0).pow(-1).unwrap();
        assert!(lau.exp().is_err());
        assert!(Series::var(0).log().is_err());
    }

    #[test]
    fn log_exp_roundtrip() {
        let f = u().add(&u().mul(&u()).scale(&qr(3, 5))).add(&Series::var(1).mul(&u()));
        let f = f.truncate(0, 6);
        assert!(f.exp().unwrap().log().unwrap().agrees_with(&f));
    }

    #[test]
    fn laurent_product_precision() {
        // (1/u + O(u^2)) * (u^2 + O(u^3)) = u + O(u^2)
        let a = Series::var(0).pow(-1).unwrap().truncate(0, 1);
        let b = u().pow(2).unwrap().truncate(0, 2);
        let p = a.mul(&b);
        assert_eq!(p.prec()[0], 1);
        assert_eq!(p.coeff(&mono1(0, 1)).unwrap(), q(1));
    }

    #[test]
    fn inverse_and_dense_helpers() {
        let one_plus_u = Series::one().add(&u()).truncate(0, 5);
        let i = one_plus_u.inv().unwrap();
        assert!(i.mul(&one_plus_u).agrees_with(&Series::one().truncate(0, 5)));
        let s = dense::s_function(6);
        assert_eq!(s[2], qr(1, 24));
        let c = dense::half_coth(6);
        assert_eq!(c[2], qr(1, 12));
        assert_eq!(c[4], qr(-1, 720));
        let l = dense::log(&s, 6);
        let e = dense::exp(&l, 6);
        assert_eq!(e, s);
    }
}
