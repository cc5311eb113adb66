//! Spin Hurwitz numbers of `(P¹, O(-1))` with completed cycles.
//!
//! Two evaluation routes are provided. The operator route reads numbers off
//! vacuum expectations of `α` and `F` operators. The character route expands
//! each completed cycle into odd partitions and sums central characters of
//! the Sergeev group; it only serves as a cross-check.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fock::{
    alpha_minus1_power, alpha_minus_vacuum, diagonal_weights, f_eigenvalue, norm2,
    qoppa_over_varsigma_coeff, sergeev_character,
};
use crate::partitions::{enumerate, pad_to_degree, zmu, Class, Partition};
use crate::scalars::{qfact, qpow, Q, q};
use crate::series::{dense, mono1, Series, INF, NV};

/// Index of the genus-counting variable `u` in [`Series`] values.
pub const U: usize = 0;

/// Coefficients `κ_{k,μ}` of the completed cycle `c̄_k`.
pub fn kappa(k: u32, mu: &Partition) -> Q {
    if k == 0 || !mu.is_odd() {
        return Q::zero();
    }
    let n = k as i64 + 1 - mu.size() as i64 - mu.len() as i64;
    if n < 0 {
        return Q::zero();
    }
    let len = n as usize + 1;
    let s = dense::s_function(len);
    let scaled = |c: i64| -> Vec<Q> {
        s.iter().enumerate().map(|(j, x)| x * qpow(&q(c), j as i64)).collect()
    };
    // S(z)^{|μ|-2} = exp((|μ|-2) log S(z))
    let log_s = dense::log(&s, len);
    let e = mu.size() as i64 - 2;
    let pw = dense::exp(&log_s.iter().map(|x| x * q(e)).collect::<Vec<_>>(), len);
    let mut acc = dense::mul(&scaled(2), &pw, len);
    for p in mu.parts() {
        let f: Vec<Q> = scaled(*p as i64).iter().map(|x| x * q(2)).collect();
        acc = dense::mul(&acc, &f, len);
    }
    let pref = qfact(k as u64 - 1) * mu.parts().iter().fold(Q::one(), |a, p| a * q(*p as i64))
        / (q(2) * qfact(mu.size() as u64));
    pref * &acc[n as usize]
}

/// Odd partitions `μ` with `κ_{k,μ} != 0`.
pub fn completed_cycle(k: u32) -> BTreeMap<Partition, Q> {
    let mut out = BTreeMap::new();
    if k % 2 == 0 {
        return out;
    }
    for size in 0..=k {
        for mu in enumerate(size, Class::Odd) {
            let c = kappa(k, &mu);
            if !c.is_zero() {
                out.insert(mu, c);
            }
        }
    }
    out
}

/// Central character of the class `μ ⊢ d` on `λ ⊢ d`, normalized so that
/// the operator route and the character route agree:
/// `2^{(|μ|-ℓ(μ))/2} (d!/𝔷_μ) ζ^λ_μ / ζ^λ_{(1^d)}`.
pub fn central_character(mu: &Partition, lam: &Partition) -> Result<Q> {
    let d = lam.size();
    if mu.size() != d {
        return Err(Error::InvalidInput(format!("|{mu}| != |{lam}|")));
    }
    let e = mu.size() as i64 - mu.len() as i64;
    if e % 2 != 0 {
        return Err(Error::InvalidInput(format!("{mu} is not odd")));
    }
    let ones = Partition::new(vec![1; d as usize])?;
    Ok(qpow(&q(2), e / 2) * qfact(d as u64) / zmu(mu) * sergeev_character(lam, mu)?
        / sergeev_character(lam, &ones)?)
}

/// `κ_{k,μ}` rescaled to the normalization of [`central_character`]:
/// `2^{(|μ| - ℓ(μ) - k + 1)/2} κ_{k,μ}`. The leading coefficient stays 1.
pub fn kappa_normalized(k: u32, mu: &Partition) -> Q {
    let e = mu.size() as i64 - mu.len() as i64 - k as i64 + 1;
    kappa(k, mu) * qpow(&q(2), e / 2)
}

/// Eigenvalue of `c̄_k` on `λ` by expanding into odd partitions and padding.
/// The empty-partition term is kept only when `include_empty` is set.
pub fn completed_cycle_eigenvalue(k: u32, lam: &Partition, include_empty: bool) -> Result<Q> {
    let d = lam.size();
    let mut acc = Q::zero();
    for mu in completed_cycle(k).into_keys() {
        if mu.is_empty() && !include_empty {
            continue;
        }
        if let Some((hat, f)) = pad_to_degree(&mu, d) {
            acc += kappa_normalized(k, &mu) * f * central_character(&hat, lam)?;
        }
    }
    Ok(acc)
}

/// Weight of `|λ⟩` in `2^d ⟨(α_1^d/d!) · (α_{-1}^d/d!)⟩`.
pub fn plancherel_weight(lam: &Partition) -> Result<Q> {
    let d = lam.size();
    let ones = Partition::new(vec![1; d as usize])?;
    let z = sergeev_character(lam, &ones)?;
    let p = (lam.len() % 2) as i64;
    Ok(qpow(&q(2), -p - d as i64) * &z * &z / (qfact(d as u64) * qfact(d as u64)))
}

/// Disconnected `H^•_d(P¹, O(-1); μ^1, ..., μ^n)` for odd partitions of
/// arbitrary size (padded with 1's).
pub fn hurwitz_number(d: u32, profiles: &[Partition]) -> Result<Q> {
    let mut hats = Vec::new();
    let mut pref = Q::one();
    for mu in profiles {
        if !mu.is_odd() {
            return Err(Error::InvalidInput(format!("{mu} is not odd")));
        }
        match pad_to_degree(mu, d) {
            None => return Ok(Q::zero()),
            Some((h, f)) => {
                hats.push(h);
                pref *= f;
            }
        }
    }
    let mut acc = Q::zero();
    for lam in enumerate(d, Class::Strict) {
        let mut t = plancherel_weight(&lam)?;
        for h in &hats {
            t *= central_character(h, &lam)?;
        }
        acc += t;
    }
    Ok(pref * acc)
}

/// A single completed-cycle spin Hurwitz request `h^{+,r}_{g;μ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzRequest {
    pub mu: Partition,
    pub r: u32,
    pub genus: Option<i64>,
    pub cycles: Option<u32>,
    pub connected: bool,
    pub include_degree_zero: bool,
}

impl HurwitzRequest {
    pub fn new(mu: Partition, r: u32) -> Self {
        HurwitzRequest { mu, r, genus: None, cycles: None, connected: false, include_degree_zero: false }
    }
    pub fn genus(mut self, g: i64) -> Self {
        self.genus = Some(g);
        self
    }
    pub fn cycles(mut self, b: u32) -> Self {
        self.cycles = Some(b);
        self
    }
    pub fn connected(mut self, c: bool) -> Self {
        self.connected = c;
        self
    }
    pub fn degree(&self) -> u32 {
        self.mu.size()
    }

    fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r % 2 == 1 {
            return Err(Error::InvalidInput(format!("r = {} must be positive and even", self.r)));
        }
        if !self.mu.is_odd() {
            return Err(Error::InvalidInput(format!("profile {} is not odd", self.mu)));
        }
        if self.genus.is_none() && self.cycles.is_none() {
            return Err(Error::InvalidInput("need a genus or a cycle count".into()));
        }
        Ok(())
    }

    /// `(g, b)` from Riemann-Hurwitz `r b = 2g - 2 + ℓ(μ) + |μ|`, or `None`
    /// when no nonnegative integer `b` exists.
    pub fn resolve(&self) -> Result<Option<(i64, u32)>> {
        self.validate()?;
        let base = self.mu.len() as i64 + self.mu.size() as i64 - 2;
        let r = self.r as i64;
        match (self.genus, self.cycles) {
            (Some(g), Some(b)) => {
                if r * b as i64 != 2 * g + base {
                    return Err(Error::InvalidInput(format!(
                        "genus {g} and {b} cycles violate Riemann-Hurwitz"
                    )));
                }
                Ok(Some((g, b)))
            }
            (Some(g), None) => {
                let n = 2 * g + base;
                if n < 0 || n % r != 0 {
                    return Ok(None);
                }
                Ok(Some((g, (n / r) as u32)))
            }
            (None, Some(b)) => {
                let n = r * b as i64 - base;
                if n % 2 != 0 {
                    return Ok(None);
                }
                Ok(Some((n / 2, b)))
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Value of a Hurwitz request; infeasible requests evaluate to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzValue {
    pub value: Q,
    pub genus: Option<i64>,
    pub cycles: Option<u32>,
    pub feasible: bool,
}

fn u_prec(b: u32) -> [i64; NV] {
    let mut p = [INF; NV];
    p[U] = b as i64;
    p
}

/// Truncated `exp(x u)`.
fn exp_u(x: &Q, b: u32) -> Series {
    let mut c = Vec::with_capacity(b as usize + 1);
    let mut t = Q::one();
    for j in 0..=b as i64 {
        if j > 0 {
            t = t * x / q(j);
        }
        c.push(t.clone());
    }
    Series::univariate(U, &c, 0, b as i64)
}

/// `⟨e^{α_1} e^{u (F_{r+1}/(r+1) + c_0)} Π α_{-ν_i}/ν_i⟩` up to `u^b`.
fn single_vev(nu: &Partition, r: u32, shift: &Q, b: u32) -> Series {
    let d = nu.size();
    let ket = alpha_minus_vacuum(nu);
    let bra = alpha_minus1_power(d);
    let mut acc = Series::big_o(u_prec(b));
    let denom = nu.parts().iter().fold(Q::one(), |a, p| a * q(*p as i64));
    for (s, a) in &ket.entries {
        let c = bra.get(*s);
        if c.is_zero() {
            continue;
        }
        let w = a * c * norm2(*s) / &denom;
        let x = f_eigenvalue(r + 1, *s) / q(r as i64 + 1) + shift;
        acc.add_assign(&exp_u(&x, b).scale(&w));
    }
    acc
}

/// Connected part of a family of disconnected values indexed by subsets of
/// `n` labeled items: `val(S) = Σ_π Π_{B ∈ π} conn(B)` over set partitions,
/// with `val(∅)` the contribution of components carrying no items.
pub fn connected_from_disconnected(
    n: usize,
    val: &dyn Fn(u64) -> Result<Series>,
) -> Result<Series> {
    if n == 0 {
        return val(0)?.log();
    }
    let v0 = val(0)?;
    let inv0 = v0.inv()?;
    let full = (1u64 << n) - 1;
    let mut rel: BTreeMap<u64, Series> = BTreeMap::new();
    let mut conn: BTreeMap<u64, Series> = BTreeMap::new();
    for mask in 1..=full {
        rel.insert(mask, val(mask)?.mul(&inv0));
    }
    // val(S)/val(∅) = Σ_{T ∋ min S} conn(T) · val(S∖T)/val(∅)
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut c = rel[&mask].clone();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            // T = low | (proper part of rest), S∖T = rest ∖ sub
            let t = low | sub;
            if t != mask {
                let other = mask ^ t;
                c = c.sub(&conn[&t].mul(&rel[&other]));
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        conn.insert(mask, c);
    }
    Ok(conn.remove(&full).expect("full mask"))
}

fn sub_partition(mu: &Partition, mask: u64) -> Partition {
    let parts = mu
        .parts()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, p)| *p)
        .collect();
    Partition::new(parts).expect("positive parts")
}

/// `h^{+,r}_{g;μ}` through the operator route
/// `2^{1-g} [u^b] ⟨e^{α_1} e^{u F_{r+1}/(r+1)} Π α_{-μ_i}/μ_i⟩`.
pub fn single_completed_hurwitz(req: &HurwitzRequest) -> Result<HurwitzValue> {
    let Some((g, b)) = req.resolve()? else {
        return Ok(HurwitzValue { value: Q::zero(), genus: req.genus, cycles: req.cycles, feasible: false });
    };
    let shift = if req.include_degree_zero { kappa(req.r + 1, &Partition::empty()) } else { Q::zero() };
    let series = if req.connected {
        let mu = &req.mu;
        let f = |mask: u64| -> Result<Series> {
            Ok(single_vev(&sub_partition(mu, mask), req.r, &Q::zero(), b))
        };
        connected_from_disconnected(mu.len(), &f)?
    } else {
        single_vev(&req.mu, req.r, &shift, b)
    };
    let value = qpow(&q(2), 1 - g) * series.coeff(&mono1(U, b as i32))?;
    Ok(HurwitzValue { value, genus: Some(g), cycles: Some(b), feasible: true })
}

/// Disconnected `h^{•,+,r}_{g;μ}` through the character route:
/// `|Aut μ|/b! · H^•_d(μ, c̄_{r+1}^b)` expanded multilinearly.
pub fn single_completed_hurwitz_characters(req: &HurwitzRequest) -> Result<HurwitzValue> {
    let Some((g, b)) = req.resolve()? else {
        return Ok(HurwitzValue { value: Q::zero(), genus: req.genus, cycles: req.cycles, feasible: false });
    };
    let d = req.degree();
    let mut acc = Q::zero();
    for lam in enumerate(d, Class::Strict) {
        let c = completed_cycle_eigenvalue(req.r + 1, &lam, req.include_degree_zero)?;
        acc += plancherel_weight(&lam)? * central_character(&req.mu, &lam)? * qpow(&c, b as i64);
    }
    let value = req.mu.aut() / qfact(b as u64) * acc;
    Ok(HurwitzValue { value, genus: Some(g), cycles: Some(b), feasible: true })
}

/// Disconnected `H^•_d(P¹, O(-1); c̄_{2k_1+1}, ..., c̄_{2k_b+1})` as
/// `2^d ⟨(α_1^d/d!) Π_j ((2k_j)!/2^{k_j}) [z^{2k_j+1}] Ê_0(z) (α_{-1}^d/d!)⟩`.
pub fn mixed_completed_hurwitz(d: u32, ks: &[u32], include_degree_zero: bool) -> Result<Q> {
    let mut acc = Q::zero();
    for (s, w) in diagonal_weights(d) {
        let mut t = w;
        for k in ks {
            let pref = qfact(2 * *k as u64) / qpow(&q(2), *k as i64);
            let mut ev = f_eigenvalue(2 * k + 1, s) / qfact(2 * *k as u64 + 1);
            if include_degree_zero {
                ev += qoppa_over_varsigma_coeff(2 * *k as i64 + 1);
            }
            t *= pref * ev;
        }
        acc += t;
    }
    Ok(qpow(&q(2), d as i64) * acc)
}

/// Same as [`mixed_completed_hurwitz`] but through the character route.
pub fn mixed_completed_hurwitz_characters(d: u32, ks: &[u32], include_degree_zero: bool) -> Result<Q> {
    let mut acc = Q::zero();
    for lam in enumerate(d, Class::Strict) {
        let mut t = plancherel_weight(&lam)?;
        for k in ks {
            t *= completed_cycle_eigenvalue(2 * k + 1, &lam, include_degree_zero)?;
        }
        acc += t;
    }
    Ok(acc)
}

/// `⟨Π_i e^{α_1} e^{uF/(r+1)} (α_{-μ_i}/μ_i) e^{s uF/(r+1)} e^{-α_1}⟩`, with `s = -1` the
/// telescoping form of the single Hurwitz VEV.
pub fn symmetric_vev(mu: &Partition, r: u32, b: u32, s: i64) -> Result<Series> {
    use crate::fock::{alpha_op, exp_alpha, DiagOp, OperatorProgram};
    let diag = |sign: i64| {
        DiagOp::new("exp(uF)", move |st| {
            exp_u(&(f_eigenvalue(r + 1, st) * q(sign) / q(r as i64 + 1)), b)
        })
    };
    let mut prog = OperatorProgram::<Series>::new();
    for m in mu.parts() {
        prog = prog
            .push(exp_alpha::<Series>(1, q(1)))
            .push(diag(1))
            .push(alpha_op::<Series>(-(*m as i64)))
            .push(diag(s))
            .push(exp_alpha::<Series>(1, q(-1)));
    }
    let denom = mu.parts().iter().fold(Q::one(), |a, p| a * q(*p as i64));
    Ok(prog.vev()?.scale(&denom.recip()))
}
