//! `𝓑`-operators and double Hodge integrals.
//!
//! `𝓑(Z, U)` is stored as a [`BandOp`] whose coefficient of
//! `:φ_{l-k} φ_{-l}:` is
//!
//! ```text
//! D_k(l) = ½ (-1)^l e^{U Z²/12} Σ_j U^j G(Z; j, k) [w^{2j-1-k}] 𝒮(w)^{Z+k} e^{w (l - k/2)}
//! G(Z; j, k) = Π_{l=k+1}^{2j-1} (Z + l) · Γ(Z'+1) / Γ(Z'+j+1),   Z' = (Z-1)/2
//! ```
//!
//! plus the constant coming from the corrected `E_0`. The argument is either
//! a positive odd integer or `Z = s·x` with `x` a formal series variable, in
//! which case `U = c·u·x`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{infer_windows_capped, BandOp, FockVector, OperatorProgram, Primitive, Shift};
use crate::hurwitz::{single_completed_hurwitz, HurwitzRequest};
use crate::partitions::{set_partitions, Partition};
use crate::scalars::{qfact, qpow, solve_linear, Poly, Q, q};
use crate::series::{dense, mono1, Mono, Series, INF, NV, ZERO_MONO};

pub use crate::hurwitz::U;

/// Series variable carrying the `i`-th formal point.
pub fn point_var(i: usize) -> usize {
    assert!(i + 2 < NV, "at most {} formal points", NV - 2);
    2 + i
}

fn div_ceil2(a: i64) -> i64 {
    a.div_euclid(2) + a.rem_euclid(2)
}

pub(crate) fn u_only(p: i64) -> [i64; NV] {
    let mut r = [INF; NV];
    r[U] = p;
    r
}

/// `e_m(y) = [w^m] 𝒮(w)^y` for `m < n`, as polynomials in `y`.
pub fn s_power_coefficients(n: usize) -> Arc<Vec<Poly>> {
    static C: OnceLock<Mutex<Arc<Vec<Poly>>>> = OnceLock::new();
    let cache = C.get_or_init(|| Mutex::new(Arc::new(Vec::new())));
    {
        let g = cache.lock().unwrap();
        if g.len() >= n {
            return g.clone();
        }
    }
    let n = n.max(2);
    let l = dense::log(&dense::s_function(n), n);
    let mut by_m = vec![vec![Q::zero(); n / 2 + 1]; n];
    let mut pw = vec![Q::zero(); n];
    pw[0] = Q::one();
    for p in 0..=n / 2 {
        for m in 0..n {
            by_m[m][p] = pw[m].clone();
        }
        let k = q(p as i64 + 1);
        pw = dense::mul(&pw, &l, n).into_iter().map(|x| x / &k).collect();
    }
    let out: Arc<Vec<Poly>> = Arc::new(by_m.into_iter().map(Poly::new).collect());
    *cache.lock().unwrap() = out.clone();
    out
}

fn poly_at(p: &Poly, y: &Series) -> Series {
    let mut acc = Series::zero();
    for c in p.c.iter().rev() {
        acc = acc.mul(y);
        acc.add_term(ZERO_MONO, c.clone());
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub enum BArg {
    /// A positive odd integer.
    Odd(u32),
    /// `Z = scale · x_var`.
    Formal { var: usize, scale: Q },
}

impl BArg {
    pub fn formal(var: usize) -> Self {
        BArg::Formal { var, scale: Q::one() }
    }
}

/// Everything needed to assemble `u^{u_shift} 𝓑(Z, U)` on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct BOperatorParams {
    pub arg: BArg,
    /// `U = u_coeff·u·x` for formal arguments and `u_coeff·u` otherwise.
    pub u_coeff: Q,
    pub u_shift: i64,
    /// Absolute `u` precision of every matrix element.
    pub u_prec: i64,
    /// Precision in the formal variable (ignored for odd arguments).
    pub x_prec: i64,
    /// Lowering range `k ∈ [kmin, kmax]` to assemble.
    pub kmin: i64,
    pub kmax: i64,
}

struct BData {
    z: Series,
    xvar: Option<usize>,
    u_coeff: Q,
    u_shift: i64,
    target: [i64; NV],
    jmin: i64,
    jmax: i64,
    he: HashMap<i64, Series>,
    epolys: Arc<Vec<Poly>>,
    kcache: Mutex<HashMap<i64, Arc<Vec<Series>>>>,
    ccache: Mutex<HashMap<(i64, i64), Series>>,
}

impl BData {
    fn rest_prec(&self, j: i64) -> [i64; NV] {
        let mut p = self.target;
        p[U] -= j + self.u_shift;
        if let Some(x) = self.xvar {
            p[x] -= j;
        }
        p
    }

    /// `u_coeff^j u^{j+u_shift} x^j`.
    fn monomial(&self, j: i64) -> Series {
        let mut m: Mono = ZERO_MONO;
        m[U] = (j + self.u_shift) as i32;
        if let Some(x) = self.xvar {
            m[x] = j as i32;
        }
        Series::monomial(m, qpow(&self.u_coeff, j))
    }

    fn shifted(&self, c: i64) -> Series {
        let mut y = self.z.clone();
        y.add_term(ZERO_MONO, q(c));
        y
    }

    /// `Π_{l=a}^{b} (Z + l)`.
    fn rising(&self, a: i64, b: i64) -> Series {
        let mut r = Series::one();
        for l in a..=b {
            r = r.mul(&self.shifted(l));
        }
        r
    }

    /// `C_{k,p}`: the coefficient of `x^p/p!` in `2 (-1)^l D_k(l)`.
    fn k_data(&self, k: i64) -> Arc<Vec<Series>> {
        if let Some(v) = self.kcache.lock().unwrap().get(&k) {
            return v.clone();
        }
        let mut out: Vec<Series> = Vec::new();
        for j in self.jmin.max(div_ceil2(k + 1))..=self.jmax {
            let n = 2 * j - 1 - k;
            let rp = self.rest_prec(j);
            let base = self.rising(k + 1, 2 * j - 1).mul(&self.he[&j]).with_prec(rp);
            if base.is_empty() {
                continue;
            }
            let y = self.shifted(k);
            let mj = self.monomial(j);
            for m in (0..=n).step_by(2) {
                let e = poly_at(&self.epolys[m as usize], &y);
                let t = base.mul(&e).with_prec(rp).mul(&mj);
                let p = (n - m) as usize;
                while out.len() <= p {
                    out.push(Series::big_o(self.target));
                }
                out[p].add_assign(&t);
            }
        }
        let out = Arc::new(out);
        self.kcache.lock().unwrap().insert(k, out.clone());
        out
    }

    fn coefficient(&self, k: i64, l: i64) -> Series {
        if let Some(c) = self.ccache.lock().unwrap().get(&(k, l)) {
            return c.clone();
        }
        let data = self.k_data(k);
        let x = Q::new((2 * l - k).into(), 2.into());
        let mut acc = Series::big_o(self.target);
        let mut xp = Q::one();
        for (p, c) in data.iter().enumerate() {
            if p > 0 {
                xp = xp * &x / q(p as i64);
            }
            if !xp.is_zero() {
                acc.add_assign(&c.scale(&xp));
            }
        }
        if l.rem_euclid(2) == 1 {
            acc = acc.neg();
        }
        self.ccache.lock().unwrap().insert((k, l), acc.clone());
        acc
    }

    /// Multiple of the identity contributed by the corrected `E_0`.
    fn constant(&self) -> Series {
        let mut acc = Series::big_o(self.target);
        if self.jmax < 0 {
            return acc;
        }
        let hc = dense::half_coth(2 * self.jmax as usize + 1);
        // j = 0: G = 1/Z
        let e0 = &self.he[&0];
        let mut m: Mono = ZERO_MONO;
        m[U] = self.u_shift as i32;
        let lead = match self.xvar {
            Some(x) => {
                m[x] = -1;
                Series::monomial(m, self.z.terms().values().next().expect("nonzero scale").recip())
            }
            None => Series::monomial(m, self.z.constant_term().recip()),
        };
        let mut rp0 = self.rest_prec(0);
        if let Some(x) = self.xvar {
            rp0[x] += 1;
        }
        acc.add_assign(&e0.with_prec(rp0).scale(&Q::new(1.into(), 2.into())).mul(&lead));
        for j in 1..=self.jmax {
            let rp = self.rest_prec(j);
            let mut s = Series::zero();
            for m in (0..=2 * j).step_by(2) {
                let c = &hc[(2 * j - m) as usize];
                if !c.is_zero() {
                    s = s.add(&poly_at(&self.epolys[m as usize], &self.z).scale(c));
                }
            }
            let t = self
                .rising(1, 2 * j - 1)
                .mul(&self.he[&j])
                .with_prec(rp)
                .mul(&s)
                .with_prec(rp)
                .scale(&Q::new(1.into(), 2.into()))
                .mul(&self.monomial(j));
            acc.add_assign(&t);
        }
        acc
    }
}

/// Assembles `u^{u_shift} 𝓑(Z, U)` restricted to lowerings in `[kmin, kmax]`.
pub fn build_b_operator(params: &BOperatorParams) -> Result<BandOp<Series>> {
    let (z, xvar, kmin, label) = match &params.arg {
        BArg::Odd(mu) => {
            if mu % 2 == 0 {
                return Err(Error::InvalidInput(format!("B-operator argument {mu} is not odd")));
            }
            let m = *mu as i64;
            (Series::constant(q(m)), None, params.kmin.max(-m), format!("B({mu})"))
        }
        BArg::Formal { var, scale } => {
            if scale.is_zero() {
                return Err(Error::InvalidInput("formal argument with zero scale".into()));
            }
            (Series::monomial(mono1(*var, 1), scale.clone()), Some(*var), params.kmin, format!("B(x{var})"))
        }
    };
    if params.u_coeff.is_zero() {
        return Err(Error::InvalidInput("B-operator with U = 0".into()));
    }
    let mut jmax = params.u_prec - params.u_shift;
    if xvar.is_some() {
        jmax = jmax.min(params.x_prec);
    }
    let kmax = params.kmax.min(2 * jmax - 1);
    let jmin = div_ceil2(kmin + 1).min(0);
    let mut target = u_only(params.u_prec);
    if let Some(x) = xvar {
        target[x] = params.x_prec;
    }
    let nmax = (2 * jmax - 1 - kmin).max(2 * jmax).max(0) as usize + 1;
    let epolys = s_power_coefficients(nmax);

    let mut data = BData {
        z: z.clone(),
        xvar,
        u_coeff: params.u_coeff.clone(),
        u_shift: params.u_shift,
        target,
        jmin,
        jmax,
        he: HashMap::new(),
        epolys,
        kcache: Mutex::new(HashMap::new()),
        ccache: Mutex::new(HashMap::new()),
    };

    // e^{U Z²/12} once at the largest precision any j needs
    let mut ep = data.rest_prec(jmin);
    if let Some(x) = xvar {
        ep[x] += 1;
    }
    let exponent = match (&params.arg, xvar) {
        (BArg::Formal { scale, .. }, Some(x)) => {
            let mut m = mono1(U, 1);
            m[x] = 3;
            Series::monomial(m, &params.u_coeff * scale * scale / q(12))
        }
        (BArg::Odd(mu), _) => {
            let m = q(*mu as i64);
            Series::monomial(mono1(U, 1), &params.u_coeff * &m * &m / q(12))
        }
        _ => unreachable!(),
    };
    let ez = if ep[U] < 0 { Series::big_o(ep) } else { exponent.with_prec(ep).exp()? };

    let zp = z.add(&Series::constant(-Q::one())).scale(&Q::new(1.into(), 2.into()));
    for j in jmin..=jmax.max(0) {
        let mut rp = data.rest_prec(j);
        if j == 0 {
            if let Some(x) = xvar {
                rp[x] += 1;
            }
        }
        if rp[U] < 0 {
            data.he.insert(j, Series::big_o(rp));
            continue;
        }
        let mut h = Series::one();
        if j >= 0 {
            for l in 1..=j {
                let mut f = zp.clone();
                f.add_term(ZERO_MONO, q(l));
                h = h.mul(&f);
            }
            h = if xvar.is_some() {
                h.with_prec(rp).inv()?
            } else {
                Series::constant(h.constant_term().recip())
            };
        } else {
            for l in (j + 1)..=0 {
                let mut f = zp.clone();
                f.add_term(ZERO_MONO, q(l));
                h = h.mul(&f);
            }
        }
        data.he.insert(j, h.mul(&ez.with_prec(rp)).with_prec(rp));
    }

    let constant = data.constant();
    let data = Arc::new(data);
    let d = data.clone();
    Ok(BandOp::new(label, Some(kmin), Some(kmax), move |k, l| d.coefficient(k, l)).with_constant(constant))
}

/// One `𝓑`-type factor of a correlator: `u^{u_shift} 𝓑(Z, U)` or its adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct BFactor {
    pub arg: BArg,
    pub u_coeff: Q,
    pub u_shift: i64,
    pub x_prec: i64,
    pub adjoint: bool,
}

impl BFactor {
    /// `𝓑(z, uz)`.
    pub fn hodge(arg: BArg, x_prec: i64) -> Self {
        let u_coeff = match &arg {
            BArg::Odd(m) => q(*m as i64),
            BArg::Formal { scale, .. } => scale.clone(),
        };
        BFactor { arg, u_coeff, u_shift: 0, x_prec, adjoint: false }
    }
    /// `𝓑(μ, c u μ)`.
    pub fn odd(mu: u32, c: &Q) -> Self {
        BFactor { arg: BArg::Odd(mu), u_coeff: c * q(mu as i64), u_shift: 0, x_prec: 0, adjoint: false }
    }
    /// `𝖡(z) = 𝓑(tz, uz)/u` on the point variable `var`.
    pub fn sans(var: usize, t: &Q, x_prec: i64) -> Self {
        BFactor {
            arg: BArg::Formal { var, scale: t.clone() },
            u_coeff: Q::one(),
            u_shift: -1,
            x_prec,
            adjoint: false,
        }
    }
    /// `𝓑(-tw, uw)/u`; with `adjoint` set this is `𝖡⋆(w)`.
    pub fn sans_infinity(var: usize, t: &Q, x_prec: i64, adjoint: bool) -> Self {
        BFactor {
            arg: BArg::Formal { var, scale: -t.clone() },
            u_coeff: Q::one(),
            u_shift: -1,
            x_prec,
            adjoint,
        }
    }

    /// Lowering bounds before any precision information is known.
    fn raw_bounds(&self) -> (Option<i64>, Option<i64>) {
        match self.arg {
            BArg::Odd(m) => (Some(-(m as i64)), None),
            BArg::Formal { .. } => (None, Some(2 * self.x_prec - 1)),
        }
    }

    fn shift(&self) -> Shift {
        let (kmin, kmax) = self.raw_bounds();
        if self.adjoint {
            Shift::range(kmin, kmax)
        } else {
            Shift::range(kmax.map(|k| -k), kmin.map(|k| -k))
        }
    }

    /// Lowest power of `u` in matrix elements between energies `<= e`.
    fn min_u(&self, e: i64) -> i64 {
        let mut jmin = div_ceil2(1 - e);
        if let BArg::Odd(m) = self.arg {
            jmin = jmin.max(-((m as i64 - 1) / 2));
        }
        jmin.min(0) + self.u_shift
    }

    fn build(&self, u_prec: i64, e: i64) -> Result<BandOp<Series>> {
        let op = build_b_operator(&BOperatorParams {
            arg: self.arg.clone(),
            u_coeff: self.u_coeff.clone(),
            u_shift: self.u_shift,
            u_prec,
            x_prec: self.x_prec,
            kmin: -e,
            kmax: e,
        })?;
        Ok(if self.adjoint { op.adjoint() } else { op })
    }
}

type OpBuilder = Box<dyn Fn(i64) -> Box<dyn Primitive<Series>> + Send + Sync>;
type MinU = Box<dyn Fn(i64) -> i64 + Send + Sync>;

/// A factor of a correlator whose precision is chosen by [`b_correlator`].
pub enum Slot {
    B(BFactor),
    /// Any other primitive: a builder taking the `u` precision, and the
    /// lowest `u` power it can produce between energies `<= e`.
    Op { build: OpBuilder, min_u: MinU },
}

impl Slot {
    pub fn op(
        build: impl Fn(i64) -> Box<dyn Primitive<Series>> + Send + Sync + 'static,
        min_u: impl Fn(i64) -> i64 + Send + Sync + 'static,
    ) -> Self {
        Slot::Op { build: Box::new(build), min_u: Box::new(min_u) }
    }
}

/// `⟨0| slots |ket⟩` up to `u^target`, where `ket`'s coefficients have
/// `u`-valuation at least `ket_min_u`. Each factor gets just enough `u`
/// precision for the product to be known through `u^target`.
pub fn b_correlator(slots: &[Slot], ket: &FockVector<Series>, ket_min_u: i64, target: i64) -> Result<Series> {
    let Some(start) = ket.energy_range() else {
        return Ok(Series::big_o(u_only(target)));
    };
    let probes: Vec<Option<Box<dyn Primitive<Series>>>> = slots
        .iter()
        .map(|s| match s {
            Slot::B(_) => None,
            Slot::Op { build, .. } => Some(build(0)),
        })
        .collect();
    let shifts: Vec<Shift> = slots
        .iter()
        .zip(&probes)
        .map(|(s, p)| match s {
            Slot::B(b) => b.shift(),
            Slot::Op { .. } => p.as_ref().unwrap().shift(),
        })
        .collect();
    let caps: Vec<Option<i64>> = probes.iter().map(|p| p.as_ref().and_then(|p| p.max_out())).collect();
    let Some(win) = infer_windows_capped(&shifts, &caps, start, (0, 0))? else {
        return Ok(Series::big_o(u_only(target)));
    };
    let n = slots.len();
    let emax: Vec<i64> = (0..n)
        .map(|j| {
            let input = if j + 1 < n { win[j + 1].1 } else { start.1 };
            win[j].1.max(input)
        })
        .collect();
    let mins: Vec<i64> = slots
        .iter()
        .zip(&emax)
        .map(|(s, e)| match s {
            Slot::B(b) => b.min_u(*e),
            Slot::Op { min_u, .. } => min_u(*e),
        })
        .collect();
    let total: i64 = mins.iter().sum::<i64>() + ket_min_u;
    let mut prog = OperatorProgram::new();
    for (j, s) in slots.iter().enumerate() {
        let p = target - (total - mins[j]);
        prog = match s {
            Slot::B(b) => prog.push(b.build(p, emax[j])?),
            Slot::Op { build, .. } => prog.push_boxed(build(p)),
        };
    }
    let r = prog.apply_to(ket, (0, 0))?.vacuum_coeff();
    if !r.is_empty() && r.prec()[U] < target {
        return Err(Error::Series(format!(
            "correlator known to u^{} only, wanted u^{target}",
            r.prec()[U]
        )));
    }
    Ok(r.with_prec(u_only(target)))
}

/// `𝐇^•(z; u) = u^{-n} ⟨Π 𝓑(z_i, u z_i)⟩` through `u^{u_order}`.
///
/// Only positive odd integers and formal variables are accepted: at any
/// other number the correlator at fixed `u` order is an infinite sum over
/// energies. Formal arguments are moved to the left, which selects the
/// expansion in which each of them is small compared with the numbers;
/// between formal arguments the expansion is in `|x_i| < |x_j|` for `i < j`.
pub fn double_hodge_series(args: &[BArg], u_order: i64, x_prec: i64) -> Result<Series> {
    let n = args.len() as i64;
    let mut ordered: Vec<&BArg> = args.iter().filter(|a| matches!(a, BArg::Formal { .. })).collect();
    ordered.extend(args.iter().filter(|a| matches!(a, BArg::Odd(_))));
    let slots: Vec<Slot> = ordered.into_iter().map(|a| Slot::B(BFactor::hodge(a.clone(), x_prec))).collect();
    let v = b_correlator(&slots, &FockVector::vacuum(), 0, u_order + n)?;
    Ok(v.mul(&Series::monomial(mono1(U, -(n as i32)), Q::one())))
}

/// `μ'!/(uμ)^{μ'} e^{α_1} e^{u F_3/3} α_{-μ} e^{-u F_3/3} e^{-α_1}` acting on
/// `v`, with matrix elements known through `u^{u_order}`.
pub fn conjugated_alpha(mu: u32, v: &FockVector<Series>, end: (i64, i64), u_order: i64) -> Result<FockVector<Series>> {
    use crate::fock::{alpha_op, exp_alpha, f_eigenvalue, DiagOp};
    let mp = (mu as i64 - 1) / 2;
    let p = u_order + mp;
    let diag = move |sign: i64| {
        DiagOp::new(format!("exp({sign}uF3/3)"), move |s| {
            let x = f_eigenvalue(3, s) * q(sign) / q(3);
            exp_u(&x, p)
        })
    };
    let prog = OperatorProgram::new()
        .push(exp_alpha::<Series>(1, Q::one()))
        .push(diag(1))
        .push(alpha_op::<Series>(-(mu as i64)))
        .push(diag(-1))
        .push(exp_alpha::<Series>(1, -Q::one()));
    let r = prog.apply_to(v, end)?;
    let pref = Series::monomial(mono1(U, -(mp as i32)), qfact(mp as u64) / qpow(&q(mu as i64), mp));
    Ok(r.mul_coeff(&pref))
}

/// `exp(x u)` through `u^p`.
pub fn exp_u(x: &Q, p: i64) -> Series {
    let mut c = Vec::new();
    let mut t = Q::one();
    for j in 0..=p.max(-1) {
        if j > 0 {
            t = t * x / q(j);
        }
        c.push(t.clone());
    }
    Series::univariate(U, &c, 0, p)
}

// ---------------------------------------------------------------------------
// Intersection numbers

/// `∫ Λ(2)Λ(-1) Π ψ_i^{a_i}` over `M̄_{g,n}`, keyed by `(g, a)` with `a`
/// sorted decreasingly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HodgeIntegralTable {
    pub entries: BTreeMap<(u32, Vec<u32>), Q>,
}

impl HodgeIntegralTable {
    /// Table for the listed stable `(g, n)`.
    pub fn for_types(types: &[(u32, usize)]) -> Result<Self> {
        let mut t = HodgeIntegralTable::default();
        for (g, n) in types {
            for (a, v) in extract_hodge_integrals(*g, *n)?.iter() {
                t.entries.insert((*g, a.clone()), v.clone());
            }
        }
        Ok(t)
    }
    pub fn get(&self, g: u32, a: &[u32]) -> Option<Q> {
        let mut k = a.to_vec();
        k.sort_unstable_by(|x, y| y.cmp(x));
        self.entries.get(&(g, k)).cloned()
    }
}

pub(crate) fn stable(g: u32, n: usize) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

/// Exponent tuples `a_1 >= ... >= a_n >= 0` with `Σ a <= d`.
pub(crate) fn sorted_tuples(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for a in (0..=max.min(rest)).rev() {
            cur.push(a);
            rec(n, rest - a, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, d, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn distinct_permutations(a: &[u32]) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    fn rec(rest: &mut Vec<u32>, cur: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
        if rest.is_empty() {
            out.insert(cur.clone());
            return;
        }
        let mut seen = BTreeSet::new();
        for i in 0..rest.len() {
            if !seen.insert(rest[i]) {
                continue;
            }
            let x = rest.remove(i);
            cur.push(x);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    rec(&mut a.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Monomial symmetric function `m_a(μ)`.
fn monomial_symmetric(a: &[u32], mu: &[i64]) -> Q {
    distinct_permutations(a)
        .iter()
        .map(|p| p.iter().zip(mu).fold(Q::one(), |acc, (e, m)| acc * qpow(&q(*m), *e as i64)))
        .sum()
}

/// `2^{g-1+n} Π μ_i^{μ_i'}/μ_i'!`.
pub fn elsv_prefactor(g: u32, mu: &[i64]) -> Q {
    mu.iter().fold(qpow(&q(2), g as i64 - 1 + mu.len() as i64), |acc, m| {
        let mp = (m - 1) / 2;
        acc * qpow(&q(*m), mp) / qfact(mp as u64)
    })
}

pub(crate) fn connected_h(g: u32, mu: &[i64]) -> Result<Q> {
    let p = Partition::new(mu.iter().map(|m| *m as u32).collect())?;
    Ok(single_completed_hurwitz(&HurwitzRequest::new(p, 2).genus(g as i64).connected(true))?.value)
}

pub(crate) fn odd_profile(a: &[u32]) -> Vec<i64> {
    a.iter().map(|x| 2 * *x as i64 + 1).collect()
}

/// `∫_{M̄_{g,n}} Λ(2)Λ(-1) Π ψ_i^{a_i}` for all sorted `a`, recovered by
/// interpolating connected spin Hurwitz numbers over odd profiles
/// `μ_i = 2a_i + 1`. One extra profile is checked against the fit.
pub fn extract_hodge_integrals(g: u32, n: usize) -> Result<Arc<BTreeMap<Vec<u32>, Q>>> {
    static C: OnceLock<Mutex<HashMap<(u32, usize), Arc<BTreeMap<Vec<u32>, Q>>>>> = OnceLock::new();
    let cache = C.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(g, n)) {
        return Ok(t.clone());
    }
    if n == 0 || !stable(g, n) {
        return Err(Error::InvalidInput(format!("(g, n) = ({g}, {n}) has no intersection numbers to extract")));
    }
    let d = 3 * g + n as u32 - 3;
    let basis = sorted_tuples(n, d);
    let mut nodes = basis.clone();
    let mut extra = vec![0; n];
    extra[0] = d + 1;
    nodes.push(extra);
    let values: Vec<Q> = nodes
        .par_iter()
        .map(|a| {
            let mu = odd_profile(a);
            Ok(connected_h(g, &mu)? / elsv_prefactor(g, &mu))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Q>> = nodes
        .iter()
        .map(|a| {
            let mu = odd_profile(a);
            basis.iter().map(|b| monomial_symmetric(b, &mu)).collect()
        })
        .collect();
    let m = basis.len();
    let coeffs = solve_linear(rows[..m].to_vec(), values[..m].to_vec())?;
    for (row, v) in rows.iter().zip(&values).skip(m) {
        let fit: Q = row.iter().zip(&coeffs).map(|(r, c)| r * c).sum();
        if &fit != v {
            return Err(Error::Inconsistent(format!("Hodge integrals of type ({g}, {n})")));
        }
    }
    let table: Arc<BTreeMap<Vec<u32>, Q>> = Arc::new(basis.into_iter().zip(coeffs).collect());
    cache.lock().unwrap().insert((g, n), table.clone());
    Ok(table)
}

/// Connected `h^{+,2}_{g;μ}` rebuilt from the interpolated integrals.
pub fn hurwitz_from_hodge(g: u32, mu: &[i64]) -> Result<Q> {
    if mu.iter().any(|m| *m <= 0 || m % 2 == 0) {
        return Err(Error::InvalidInput("profile must be odd".into()));
    }
    let table = extract_hodge_integrals(g, mu.len())?;
    let p: Q = table.iter().map(|(a, c)| c * monomial_symmetric(a, mu)).sum();
    Ok(p * elsv_prefactor(g, mu))
}

/// An argument of `𝐇°` or `𝐇^•` evaluated from the table.
#[derive(Clone, Debug, PartialEq)]
pub enum HPoint {
    Num(Q),
    Formal { var: usize, scale: Q },
}

fn point_power(p: &HPoint, e: i64, x_prec: i64) -> Series {
    match p {
        HPoint::Num(x) => Series::constant(qpow(x, e)),
        HPoint::Formal { var, scale } => {
            let mut pr = [INF; NV];
            pr[*var] = x_prec;
            Series::from_terms([(mono1(*var, e as i32), qpow(scale, e))], pr)
        }
    }
}

fn set_prec_on(s: Series, pts: &[HPoint], x_prec: i64) -> Series {
    let mut pr = [INF; NV];
    for p in pts {
        if let HPoint::Formal { var, .. } = p {
            pr[*var] = x_prec;
        }
    }
    s.with_prec(pr)
}

/// `x_1 x_2/(x_1 + x_2)`, expanded in the formal argument (or in the first
/// one when both are formal).
fn unstable_two_point(a: &HPoint, b: &HPoint, x_prec: i64) -> Result<Series> {
    let (small, big) = match (a, b) {
        (HPoint::Num(x), HPoint::Num(y)) => {
            let s = x + y;
            if s.is_zero() || x.is_zero() || y.is_zero() {
                return Err(Error::InvalidInput("unstable two-point function at a pole".into()));
            }
            return Ok(Series::constant(x * y / s));
        }
        (HPoint::Num(_), HPoint::Formal { .. }) => (b, a),
        _ => (a, b),
    };
    let HPoint::Formal { var: vs, scale: ss } = small else { unreachable!() };
    let mut pr = [INF; NV];
    pr[*vs] = x_prec;
    let mut out = Series::big_o(pr);
    match big {
        HPoint::Num(y) => {
            if y.is_zero() {
                return Err(Error::InvalidInput("unstable two-point function at a pole".into()));
            }
            // s x Σ (-s x / y)^k
            for k in 0..x_prec.max(0) {
                let c = ss * qpow(&(-ss / y), k);
                out.add_term(mono1(*vs, k as i32 + 1), c);
            }
        }
        HPoint::Formal { var: vb, scale: sb } => {
            pr[*vb] = x_prec;
            out = Series::big_o(pr);
            for k in 0..x_prec.max(0) {
                let mut m = mono1(*vs, k as i32 + 1);
                m[*vb] = -(k as i32);
                out.add_term(m, ss * qpow(&(-ss / sb), k));
            }
        }
    }
    Ok(out)
}

/// `𝐇°_g(x_1, …, x_n) = 2^{2g-2+n} Σ_a ∫Λ(2)Λ(-1)Πψ^{a_i} Π x_i^{a_i+1}`,
/// with `1/(2x)` and `x_1 x_2/(x_1+x_2)` in the unstable cases.
pub fn connected_hodge(g: u32, pts: &[HPoint], x_prec: i64) -> Result<Series> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::InvalidInput("no arguments".into()));
    }
    if !stable(g, n) {
        return match n {
            1 => match &pts[0] {
                HPoint::Num(x) if x.is_zero() => Err(Error::InvalidInput("argument 0 is a pole".into())),
                HPoint::Num(x) => Ok(Series::constant(x.recip() / q(2))),
                HPoint::Formal { var, scale } => {
                    let mut pr = [INF; NV];
                    pr[*var] = x_prec;
                    Ok(Series::from_terms([(mono1(*var, -1), scale.recip() / q(2))], pr))
                }
            },
            _ => unstable_two_point(&pts[0], &pts[1], x_prec),
        };
    }
    let table = extract_hodge_integrals(g, n)?;
    let d = 3 * g + n as u32 - 3;
    let mut acc = set_prec_on(Series::zero(), pts, x_prec);
    let pref = qpow(&q(2), 2 * g as i64 - 2 + n as i64);
    // all (unsorted) exponent tuples with Σ <= d
    let mut stack: Vec<Vec<u32>> = vec![vec![]];
    while let Some(a) = stack.pop() {
        if a.len() < n {
            let used: u32 = a.iter().sum();
            for e in 0..=(d - used) {
                let mut b = a.clone();
                b.push(e);
                stack.push(b);
            }
            continue;
        }
        let mut key = a.clone();
        key.sort_unstable_by(|x, y| y.cmp(x));
        let c = &table[&key];
        if c.is_zero() {
            continue;
        }
        let mut t = Series::constant(c * &pref);
        for (p, e) in pts.iter().zip(&a) {
            t = t.mul(&point_power(p, *e as i64 + 1, x_prec));
        }
        acc.add_assign(&t);
    }
    Ok(acc)
}

/// `𝐇^•(x; c·u) = Σ_π Π_{B ∈ π} Σ_g (cu)^{g-1} 𝐇°_g(x_B)` through `u^{u_prec}`.
pub fn disconnected_hodge(pts: &[HPoint], c: &Q, u_prec: i64, x_prec: i64) -> Result<Series> {
    let n = pts.len();
    if n == 0 {
        return Ok(Series::one());
    }
    let mut cache: HashMap<(Vec<usize>, i64), Series> = HashMap::new();
    let mut acc = set_prec_on(Series::big_o(u_only(u_prec)), pts, x_prec);
    for pi in set_partitions(n) {
        let b = pi.len() as i64;
        // every block contributes at least u^{-1}
        let block_prec = u_prec + b - 1;
        let mut term = Series::one();
        for blk in &pi {
            let key = (blk.clone(), block_prec);
            if !cache.contains_key(&key) {
                let sub: Vec<HPoint> = blk.iter().map(|i| pts[*i].clone()).collect();
                let mut s = set_prec_on(Series::big_o(u_only(block_prec)), &sub, x_prec);
                for g in 0..=(block_prec + 1).max(-1) {
                    let h = connected_hodge(g as u32, &sub, x_prec)?;
                    s.add_assign(&h.mul(&Series::monomial(mono1(U, g as i32 - 1), qpow(c, g - 1))));
                }
                cache.insert(key.clone(), s);
            }
            term = term.mul(&cache[&key]);
        }
        acc.add_assign(&term);
    }
    Ok(acc.with_prec(u_only(u_prec)))
}

/// `𝓑(μ, uμ)` at a positive odd integer, every element known through `u^{u_prec}`.
pub fn b_op_odd(mu: u32, u_prec: i64) -> Result<BandOp<Series>> {
    build_b_operator(&BOperatorParams {
        arg: BArg::Odd(mu),
        u_coeff: q(mu as i64),
        u_shift: 0,
        u_prec,
        x_prec: 0,
        kmin: -(mu as i64),
        kmax: 2 * u_prec + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{all_states_up_to, energy};
    use crate::scalars::{binom, qr};
    use proptest::prelude::*;


    fn conjugation_identity(mu: u32, u_order: i64, window: i64) {
        let op = b_op_odd(mu, u_order).unwrap();
        for s in all_states_up_to(window) {
            let v = FockVector::basis(s);
            let lhs = op.apply_window(&v, 0, window);
            let rhs = conjugated_alpha(mu, &v, (0, window), u_order).unwrap();
            let keys: BTreeSet<_> = lhs.entries.keys().chain(rhs.entries.keys()).copied().collect();
            for t in keys {
                let (a, b) = (lhs.get(t), rhs.get(t));
                assert!(a.prec()[U] >= u_order && b.prec()[U] >= u_order, "precision at {s:b} -> {t:b}");
                assert!(a.agrees_with(&b), "mu={mu}: <{t:b}|B|{s:b}> = {a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugation_mu1() {
        conjugation_identity(1, 3, 8);
    }

    #[test]
    fn conjugation_mu3() {
        conjugation_identity(3, 3, 8);
    }

    #[test]
    fn conjugation_mu5() {
        conjugation_identity(5, 3, 8);
    }

    #[test]
    fn one_point_vev() {
        // ⟨𝓑(x, ux)⟩ = u (1/(2x) + u (x + x²)/12 + ...)
        let x = point_var(0);
        let h = double_hodge_series(&[BArg::formal(x)], 1, 4).unwrap();
        let mut m = ZERO_MONO;
        m[U] = -1;
        m[x] = -1;
        assert_eq!(h.coeff(&m).unwrap(), qr(1, 2));
        let g1 = h.coeff_in(U, 0).unwrap();
        let expect = Series::from_terms(
            [(mono1(x, 1), qr(1, 12)), (mono1(x, 2), qr(1, 12))],
            g1.prec(),
        );
        assert!(g1.agrees_with(&expect), "{g1}");
        // numeric z = 1: 1/2 u^{-1} + 1/6
        let h1 = double_hodge_series(&[BArg::Odd(1)], 0, 0).unwrap();
        assert_eq!(h1.coeff(&mono1(U, -1)).unwrap(), qr(1, 2));
        assert_eq!(h1.coeff(&ZERO_MONO).unwrap(), qr(1, 6));
    }

    #[test]
    fn two_point_leading_term() {
        let (x, y) = (point_var(0), point_var(1));
        let h = double_hodge_series(&[BArg::formal(x), BArg::formal(y)], -2, 3).unwrap();
        let lead = h.coeff_in(U, -2).unwrap();
        let mut m = ZERO_MONO;
        m[x] = -1;
        m[y] = -1;
        let expect = Series::from_terms([(m, qr(1, 4))], lead.prec());
        assert!(lead.agrees_with(&expect), "{lead}");
    }

    #[test]
    fn elsv_consistency_31() {
        // u^{g-1+n} coefficient of ⟨𝓑(3)𝓑(1)⟩ equals Πμ Π μ'!/μ^{μ'} 2^{g-1} h^•_g
        let v = double_hodge_series(&[BArg::Odd(3), BArg::Odd(1)], 2, 0).unwrap();
        let mu = Partition::new(vec![3, 1]).unwrap();
        for g in -1..=2i64 {
            let h = single_completed_hurwitz(&HurwitzRequest::new(mu.clone(), 2).genus(g)).unwrap().value;
            let expect = q(3) * qr(1, 3) * qpow(&q(2), g - 1) * h;
            assert_eq!(v.coeff(&mono1(U, g as i32 - 1)).unwrap(), expect, "g = {g}");
        }
    }

    fn commutator_offdiagonal(z: u32, w: u32, u_order: i64, window: i64) {
        // each factor has u-valuation >= -z', -w'
        let pz = u_order + (w as i64 - 1) / 2;
        let pw = u_order + (z as i64 - 1) / 2;
        let bz = b_op_odd(z, pz).unwrap();
        let bw = b_op_odd(w, pw).unwrap();
        for s in all_states_up_to(window) {
            let v = FockVector::basis(s);
            let big = window + z.max(w) as i64;
            let a = bz.apply_window(&bw.apply_window(&v, 0, big), 0, window);
            let b = bw.apply_window(&bz.apply_window(&v, 0, big), 0, window);
            let d = a.sub(&b);
            for (t, c) in &d.entries {
                if *t != s {
                    assert!(c.with_prec(u_only(u_order)).is_empty(), "<{t:b}|[B,B]|{s:b}> = {c}");
                }
            }
        }
    }

    #[test]
    fn commutator_is_central_off_diagonal() {
        commutator_offdiagonal(3, 5, 2, 5);
    }

    #[test]
    fn correlator_symmetry() {
        let a = double_hodge_series(&[BArg::Odd(1), BArg::Odd(3), BArg::Odd(5)], 0, 0).unwrap();
        let b = double_hodge_series(&[BArg::Odd(5), BArg::Odd(1), BArg::Odd(3)], 0, 0).unwrap();
        assert_eq!(a, b);
        let c = double_hodge_series(&[BArg::Odd(3), BArg::Odd(7)], 1, 0).unwrap();
        let d = double_hodge_series(&[BArg::Odd(7), BArg::Odd(3)], 1, 0).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn two_point_pole_structure() {
        // z w (z + w) ⟨𝓑(z)𝓑(w)⟩ at fixed u order is a polynomial in z, w:
        // sample odd points, interpolate in z for each w, and check held-out values.
        let u_order = 0i64;
        let val = |z: u32, w: u32| -> Q {
            let h = double_hodge_series(&[BArg::Odd(z), BArg::Odd(w)], u_order, 0).unwrap();
            let c = h.coeff(&mono1(U, u_order as i32)).unwrap();
            let (zq, wq) = (q(z as i64), q(w as i64));
            c * &zq * &wq * (&zq + &wq)
        };
        // one-point pieces reach genus u_order + 2, of degree 3(u_order + 2) - 1,
        // and the prefactor adds 2
        let deg = 3 * u_order + 7;
        let pts: Vec<u32> = (0..deg + 2).map(|i| 2 * i as u32 + 1).collect();
        for w in [1u32, 3] {
            let samples: Vec<(Q, Q)> = pts.iter().map(|z| (q(*z as i64), val(*z, w))).collect();
            let fit = Poly::interpolate(&samples[..samples.len() - 1]).unwrap();
            let (zl, yl) = samples.last().unwrap();
            assert_eq!(&fit.eval(zl), yl);
        }
    }

    #[test]
    fn backward_difference_identity() {
        // Δ f(l) = f(l) - f(l-1)
        let delta = |j: usize, a: u32, l: i64| -> Q {
            (0..=j)
                .map(|i| {
                    binom(j as i64, i as i64) * q(if i % 2 == 0 { 1 } else { -1 }) * qpow(&q(l - i as i64), a as i64)
                })
                .sum::<Q>()
                / qfact(j as u64)
                / qfact(a as u64)
        };
        let n = 14;
        let s = dense::s_function(n);
        for j in 0..=6usize {
            // ς(w)^j/j! = w^j S(w)^j / j!
            let mut sj = vec![Q::zero(); n];
            sj[0] = Q::one();
            for _ in 0..j {
                sj = dense::mul(&sj, &s, n);
            }
            for a in 0..=6u32 {
                for l in -4..=4i64 {
                    // [w^a] w^j S^j/j! e^{w(l - j/2)}
                    let x = Q::new((2 * l - j as i64).into(), 2.into());
                    let mut rhs = Q::zero();
                    for i in 0..=(a as usize) {
                        if i < j {
                            continue;
                        }
                        let e = a as usize - i;
                        rhs += &sj[i - j] * qpow(&x, e as i64) / qfact(e as u64);
                    }
                    rhs /= qfact(j as u64);
                    assert_eq!(delta(j, a, l), rhs, "j={j} a={a} l={l}");
                }
            }
        }
    }

    #[test]
    fn q_coefficient_identity() {
        // a! [l^a] (l² + μl + μ²/3)^p = [w^{-a}] Σ_m C(p,m)(2p-2m)!/w^{2p-2m} μ^{2m}/12^m e^{wμ/2}
        for mu in [1i64, 3, 5] {
            let base = Poly::new(vec![qr(mu * mu, 3), q(mu), q(1)]);
            for p in 0..=6i64 {
                let mut pw = Poly::constant(Q::one());
                for _ in 0..p {
                    pw = pw.mul(&base);
                }
                for a in 0..=2 * p {
                    let lhs = qfact(a as u64) * pw.c.get(a as usize).cloned().unwrap_or_else(Q::zero);
                    let mut rhs = Q::zero();
                    for m in 0..=p {
                        // need w^{-a}: w^{-(2p-2m)} · w^{e} with e = 2p-2m-a >= 0
                        let e = 2 * p - 2 * m - a;
                        if e < 0 {
                            continue;
                        }
                        rhs += binom(p, m) * qfact((2 * p - 2 * m) as u64) * qpow(&q(mu), 2 * m)
                            / qpow(&q(12), m)
                            * qpow(&qr(mu, 2), e)
                            / qfact(e as u64);
                    }
                    assert_eq!(lhs, rhs, "mu={mu} p={p} a={a}");
                }
            }
        }
    }

    #[test]
    fn hodge_table_anchors() {
        let t03 = extract_hodge_integrals(0, 3).unwrap();
        assert_eq!(t03[&vec![0, 0, 0]], q(1));
        let t11 = extract_hodge_integrals(1, 1).unwrap();
        assert_eq!(t11[&vec![1]], qr(1, 24));
        assert_eq!(t11[&vec![0]], qr(1, 24));
        let t04 = extract_hodge_integrals(0, 4).unwrap();
        // ∫ψ_i = 1 for each of the four points, Σ_i coefficient = 4 · 1
        assert_eq!(t04[&vec![1, 0, 0, 0]], q(1));
        assert_eq!(t04[&vec![0, 0, 0, 0]], q(0));
    }

    #[test]
    fn elsv_round_trip_held_out() {
        for (g, n) in [(0u32, 3usize), (0, 4), (1, 1), (1, 2), (1, 3), (2, 1), (2, 2)] {
            let d = 3 * g + n as u32 - 3;
            for a in sorted_tuples(n, d + 2).into_iter().filter(|a| a.iter().sum::<u32>() == d + 2).take(3) {
                let mu = odd_profile(&a);
                assert_eq!(hurwitz_from_hodge(g, &mu).unwrap(), connected_h(g, &mu).unwrap(), "g={g} mu={mu:?}");
            }
        }
        let h = hurwitz_from_hodge(1, &[1]).unwrap();
        assert_eq!(h, qr(1, 6));
    }

    #[test]
    fn table_route_matches_operators() {
        // 𝐇^• at (x, 3) from the table agrees with the 𝓑 correlator
        let x = point_var(0);
        let ops = double_hodge_series(&[BArg::formal(x), BArg::Odd(3)], 0, 4).unwrap();
        let tab = disconnected_hodge(&[HPoint::Formal { var: x, scale: q(1) }, HPoint::Num(q(3))], &q(1), 0, 4)
            .unwrap();
        assert!(ops.agrees_with(&tab), "{ops}\nvs\n{tab}");
        let y = point_var(1);
        let ops = double_hodge_series(&[BArg::formal(x), BArg::formal(y)], -1, 3).unwrap();
        let tab = disconnected_hodge(
            &[HPoint::Formal { var: x, scale: q(1) }, HPoint::Formal { var: y, scale: q(1) }],
            &q(1),
            -1,
            3,
        )
        .unwrap();
        assert!(ops.agrees_with(&tab), "{ops}\nvs\n{tab}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn table_is_symmetric(g in 0u32..2, n in 1usize..4) {
            prop_assume!(stable(g, n));
            let t = HodgeIntegralTable::for_types(&[(g, n)]).unwrap();
            for ((gg, a), v) in &t.entries {
                prop_assert_eq!(*gg, g);
                for p in distinct_permutations(a) {
                    let got = t.get(g, &p);
                    prop_assert_eq!(got.as_ref(), Some(v));
                }
                prop_assert!(a.iter().sum::<u32>() <= 3 * g + n as u32 - 3);
            }
        }

        #[test]
        fn vev_energy_filtering(mu in prop_oneof![Just(1u32), Just(3), Just(5)]) {
            // ⟨𝓑(μ)⟩ only sees the constant
            let op = b_op_odd(mu, 2).unwrap();
            let v = op.apply_window(&FockVector::vacuum(), 0, 0);
            let direct = double_hodge_series(&[BArg::Odd(mu)], 1, 0).unwrap();
            let c = v.vacuum_coeff().with_prec(u_only(2));
            prop_assert!(c.agrees_with(&direct.mul(&Series::var(U))));
            prop_assert!(v.entries.keys().all(|s| energy(*s) == 0));
        }
    }
}
