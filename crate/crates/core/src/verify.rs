//! Named verification suites over every module, shared by the command line
//! and the acceptance tests.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::dressing::verify_dressing;
use crate::error::{Error, Result};
use crate::fock::{
    all_states_up_to, alpha_minus_vacuum, alpha_op, apply_alpha, apply_f, apply_phi, character_pairing, e_commutator_rhs,
    e_hat_op, e_hat_op2, e_series_op, energy, f_band, f_diag, f_eigenvalue, parity_sign, qoppa_over_varsigma_coeff,
    sergeev_character, states_up_to, FockVector, OperatorProgram, Primitive, ProjectorOp,
};
use crate::gw::{
    check_divisor, check_string, closed_formula, gwh_check, one_point_table, stationary_from_route, stationary_invariant,
    GWRequest, Route,
};
use crate::hodge::{
    b_op_odd, conjugated_alpha, connected_h, double_hodge_series, hurwitz_from_hodge, odd_profile, sorted_tuples, stable,
    u_only, BArg, U,
};
use crate::hurwitz::{
    completed_cycle_eigenvalue, kappa, mixed_completed_hurwitz, mixed_completed_hurwitz_characters, single_completed_hurwitz,
    single_completed_hurwitz_characters, symmetric_vev, HurwitzRequest,
};
use crate::partitions::{enumerate, Class, Partition};
use crate::scalars::{binom, qfact, qpow, qr, ExpPoly2, HyperbolicPoly, Poly, Q, q};
use crate::series::{mono1, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::InvalidInput(format!("unknown level {s:?}"))),
        }
    }
}

/// One verified identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub const SUITES: [&str; 17] = [
    "car",
    "heisenberg",
    "op_commutators",
    "characters",
    "projector",
    "kappa",
    "hurwitz_symmetry",
    "b_conjugation",
    "b_commutator_corollaries",
    "rationality",
    "dressing",
    "routes",
    "table1",
    "closed_formulae",
    "divisor",
    "string",
    "gwh",
];

/// The one-point stationary table in the sinh basis, rows `d = 1..=8`,
/// entries `(j, numerator, denominator)` for `sinh(jz)`.
pub const TABLE1: [&[(i64, i64, i64)]; 8] = [
    &[(1, 1, 2)],
    &[(2, 1, 2)],
    &[(3, 1, 2), (2, 1, 4), (1, 1, 4)],
    &[(4, 1, 2), (3, 1, 1), (1, 1, 1)],
    &[(5, 1, 2), (4, 9, 4), (3, 1, 1), (2, 1, 1), (1, 9, 4)],
    &[(6, 1, 2), (5, 4, 1), (4, 25, 4), (3, 1, 2), (2, 27, 4), (1, 9, 2)],
    &[(7, 1, 2), (6, 25, 4), (5, 81, 4), (4, 99, 8), (3, 25, 4), (2, 211, 8), (1, 99, 8)],
    &[(8, 1, 2), (7, 9, 1), (6, 49, 1), (5, 81, 1), (4, 18, 1), (3, 67, 1), (2, 81, 1), (1, 59, 1)],
];

struct Suite {
    name: &'static str,
    out: Vec<CheckResult>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, out: Vec::new() }
    }
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.out.push(CheckResult { suite: self.name, name: name.into(), passed, detail: detail.into() });
    }
    /// Records the first failure of `f` over `items`, or the number of cases.
    fn all<T: std::fmt::Debug>(&mut self, name: impl Into<String>, items: impl IntoIterator<Item = T>, f: impl Fn(&T) -> bool) {
        let mut n = 0usize;
        for it in items {
            n += 1;
            if !f(&it) {
                self.push(name, false, format!("fails at {it:?}"));
                return;
            }
        }
        self.push(name, true, format!("{n} cases"));
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, level: Level) -> Result<Vec<CheckResult>> {
    let full = level == Level::Full;
    match name {
        "car" => Ok(car(if full { 8 } else { 6 })),
        "heisenberg" => Ok(heisenberg(if full { 8 } else { 6 })),
        "op_commutators" => Ok(op_commutators(if full { 6 } else { 4 })),
        "characters" => characters(if full { 8 } else { 6 }),
        "projector" => projector(if full { 8 } else { 6 }),
        "kappa" => kappa_suite(if full { 9 } else { 7 }),
        "hurwitz_symmetry" => hurwitz_symmetry(if full { 5 } else { 4 }),
        "b_conjugation" => b_conjugation(if full { 8 } else { 6 }),
        "b_commutator_corollaries" => b_commutator_corollaries(full),
        "rationality" => rationality(full),
        "dressing" => dressing(if full { 5 } else { 4 }),
        "routes" => routes(full),
        "table1" => table1(),
        "closed_formulae" => closed_formulae(if full { 4 } else { 3 }),
        "divisor" => divisor(),
        "string" => string(),
        "gwh" => gwh(if full { 4 } else { 3 }),
        _ => Err(Error::InvalidInput(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}

fn car(window: i64) -> Vec<CheckResult> {
    let mut s = Suite::new("car");
    let states = all_states_up_to(window);
    for k in -6i64..=6 {
        s.all(format!("{{phi_{k}, phi_l}} for |l| <= 6, energy <= {window}"), (-6i64..=6).flat_map(|l| states.iter().map(move |st| (l, *st))), |(l, st)| {
            let v: FockVector<Q> = FockVector::basis(*st);
            let lhs = apply_phi(k, &apply_phi(*l, &v)).add(&apply_phi(*l, &apply_phi(k, &v)));
            let rhs = if k + l == 0 { v.scale(&q(parity_sign(k) as i64)) } else { FockVector::new() };
            lhs == rhs
        });
    }
    s.out
}

fn heisenberg(window: i64) -> Vec<CheckResult> {
    let mut s = Suite::new("heisenberg");
    let states = states_up_to(window);
    for m in (-7i64..=7).filter(|m| m % 2 != 0) {
        s.all(format!("[alpha_{m}, alpha_n] = (m/2) delta for odd |n| <= 7"), (-7i64..=7).filter(|n| n % 2 != 0).flat_map(|n| states.iter().map(move |st| (n, *st))), |(n, st)| {
            let v: FockVector<Q> = FockVector::basis(*st);
            let lhs = apply_alpha(m, &apply_alpha(*n, &v)).sub(&apply_alpha(*n, &apply_alpha(m, &v)));
            let rhs = if m + n == 0 { v.scale(&qr(m, 2)) } else { FockVector::new() };
            lhs == rhs
        });
    }
    s.out
}

fn op_commutators(window: i64) -> Vec<CheckResult> {
    let mut s = Suite::new("op_commutators");
    let states = all_states_up_to(window);
    let pairs: Vec<(i64, i64)> = (-3..=3).flat_map(|m| (-3..=3).map(move |n| (m, n))).collect();
    let res: Vec<(i64, i64, Option<crate::fock::State>)> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let ez = e_hat_op2(m, 1, 0);
            let ew = e_hat_op2(n, 0, 1);
            let bad = states.iter().find(|st| {
                let v: FockVector<ExpPoly2> = FockVector::basis(**st);
                let lhs = ez.apply(&ew.apply(&v)).sub(&ew.apply(&ez.apply(&v)));
                lhs != e_commutator_rhs(m, n, &v, false)
            });
            (m, n, bad.copied())
        })
        .collect();
    for (m, n, bad) in res {
        let detail = bad.map_or(format!("{} states", states.len()), |b| format!("fails on state {b:b}"));
        s.push(format!("[E_{m}(z), E_{n}(w)] on energy <= {window}"), bad.is_none(), detail);
    }
    for m in -3i64..=3 {
        let op = e_hat_op(m);
        let sign = if (m + 1) % 2 == 0 { q(1) } else { q(-1) };
        s.all(format!("E_{m}(-z) = (-1)^(m+1) E_{m}(z)"), states_up_to(window), |st| {
            op.apply(&FockVector::basis(*st)).entries.values().all(|c| c.reflect() == c.scale(&sign))
        });
        s.all(format!("E_{m} adjoint is E_{} on energy <= {window}", -m), states_up_to(window).into_iter().flat_map(|a| states_up_to(window).into_iter().map(move |b| (a, b))), |(a, b)| {
            let va: FockVector<HyperbolicPoly> = FockVector::basis(*a);
            let vb: FockVector<HyperbolicPoly> = FockVector::basis(*b);
            va.inner(&op.apply(&vb)) == op.adjoint().apply(&va).inner(&vb)
        });
    }
    s.all("F_r eigenvalues: band form equals diagonal power sums", all_states_up_to(window), |st| {
        let v: FockVector<Q> = FockVector::basis(*st);
        (1..=7).step_by(2).all(|r| f_band::<Q>(r).apply(&v) == apply_f(r - 1, &v))
    });
    s.all("F_{r} = r! [z^r] E_0(z) on eigenvalues", states_up_to(window), |st| {
        let e = e_hat_op(0).apply(&FockVector::basis(*st));
        let ev = e.get(*st);
        (1..=9).step_by(2).all(|r| ev.taylor(r) == f_eigenvalue(r, *st) / qfact(r as u64))
    });
    let vac = e_series_op(0, true, crate::hodge::point_var(0), 7).apply(&FockVector::<Series>::vacuum()).vacuum_coeff();
    let ok = (-1..=7).all(|k| vac.coeff(&mono1(crate::hodge::point_var(0), k as i32)).ok() == Some(qoppa_over_varsigma_coeff(k)));
    s.push("<E_0(z)> = qoppa/varsigma", ok, "through z^7");
    s.out
}

fn characters(dmax: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("characters");
    for d in 0..=dmax {
        let strict = enumerate(d, Class::Strict);
        let mut bad = None;
        for a in &strict {
            for b in &strict {
                let expect = if a == b { qpow(&q(2), (a.len() % 2) as i64) } else { Q::zero() };
                if character_pairing(d, a, b)? != expect {
                    bad = Some(format!("({a}, {b})"));
                }
            }
        }
        let ok = bad.is_none();
        s.push(format!("orthogonality in degree {d}"), ok, bad.unwrap_or_else(|| format!("{} strict partitions", strict.len())));
    }
    s.all("Euler: #strict = #odd", 0..=20u32, |d| enumerate(*d, Class::Strict).len() == enumerate(*d, Class::Odd).len());
    // ⟨α_3 F_3 P_3 α_{-1}^3⟩ from the Fock space and from characters
    let prog = OperatorProgram::<Q>::new()
        .push(alpha_op(3))
        .push(f_diag(3))
        .push(ProjectorOp(3))
        .push(alpha_op(-1))
        .push(alpha_op(-1))
        .push(alpha_op(-1));
    let three = Partition::new(vec![3])?;
    let ones = Partition::new(vec![1, 1, 1])?;
    let mut expect = Q::zero();
    for lam in enumerate(3, Class::Strict) {
        let p = (lam.len() % 2) as i64;
        expect += qpow(&q(2), -p - 4) * sergeev_character(&lam, &three)? * sergeev_character(&lam, &ones)? * lam.power_sum(3);
    }
    s.push("program VEV equals character sum", prog.vev()? == expect && !expect.is_zero(), format!("{expect}"));
    Ok(s.out)
}

fn projector(window: i64) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("projector");
    let states = states_up_to(window);
    for d in 0..=window {
        let p = ProjectorOp(d);
        let mut ok = true;
        for st in &states {
            let v: FockVector<Q> = FockVector::basis(*st);
            let pv = Primitive::<Q>::apply(&p, &v, 0, 4 * window)?;
            let ppv = Primitive::<Q>::apply(&p, &pv, 0, 4 * window)?;
            ok &= ppv == pv && (if energy(*st) == d { pv == v } else { pv.is_zero() });
        }
        s.push(format!("P_{d} idempotent and energy-selecting"), ok, format!("{} states", states.len()));
    }
    // Σ_μ 2^ℓ/𝔷_μ |α_{-μ}⟩⟨α_{-μ}| restricts to the identity on the bosonic span
    for d in 0..=(window as u32).min(6) {
        let ops = enumerate(d, Class::Odd);
        let basis: Vec<_> = ops.iter().map(alpha_minus_vacuum).collect();
        let ok = basis.iter().all(|v| {
            let mut acc: FockVector<Q> = FockVector::new();
            for (mu, w) in ops.iter().zip(&basis) {
                let c = qpow(&q(2), mu.len() as i64) / crate::partitions::zmu(mu) * w.inner(v);
                acc = acc.add(&w.scale(&c));
            }
            acc == **v
        });
        s.push(format!("odd-partition resolution of P_{d}"), ok, format!("{} partitions", ops.len()));
    }
    let total_ok = states.iter().all(|st| {
        let v: FockVector<Q> = FockVector::basis(*st);
        let mut acc: FockVector<Q> = FockVector::new();
        for d in 0..=window {
            acc = acc.add(&Primitive::<Q>::apply(&ProjectorOp(d), &v, 0, 4 * window).unwrap_or_default());
        }
        acc == v
    });
    s.push("projectors sum to the identity", total_ok, format!("energy <= {window}"));
    Ok(s.out)
}

fn kappa_suite(kmax: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("kappa");
    for k in (1..=kmax).step_by(2) {
        let p = Partition::new(vec![k])?;
        s.push(format!("kappa_{k},({k}) = 1"), kappa(k, &p) == Q::one(), "");
        s.all(format!("kappa_{k},mu = 0 off the leading term"), (k..=k + 4).flat_map(|d| enumerate(d, Class::Odd)).filter(|mu| *mu != p), |mu| kappa(k, mu).is_zero());
    }
    for k in (3..=kmax).step_by(2) {
        let mut bad = None;
        for d in 1..=7u32 {
            for lam in enumerate(d, Class::Strict) {
                let ev = completed_cycle_eigenvalue(k, &lam, false)?;
                let expect = lam.power_sum(k) / q(k as i64) / qpow(&q(2), (k as i64 - 1) / 2);
                let with_empty = completed_cycle_eigenvalue(k, &lam, true)?;
                let pref = qfact(k as u64 - 1) / qpow(&q(2), (k as i64 - 1) / 2);
                if ev != expect || with_empty - &ev != pref * qoppa_over_varsigma_coeff(k as i64) {
                    bad = Some(format!("{lam}"));
                }
            }
        }
        s.push(format!("completed {k}-cycle acts by p_{k}"), bad.is_none(), bad.unwrap_or_else(|| "d <= 7".into()));
    }
    Ok(s.out)
}

fn hurwitz_symmetry(dmax: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("hurwitz_symmetry");
    let mut cases = Vec::new();
    for d in 1..=dmax.min(4) {
        for mu in enumerate(d, Class::Odd) {
            for g in 0..=2i64 {
                cases.push((mu.clone(), g));
            }
        }
    }
    let mut bad = None;
    for (mu, g) in &cases {
        let req = HurwitzRequest::new(mu.clone(), 2).genus(*g);
        let Some((_, b)) = req.resolve()? else { continue };
        let direct = single_completed_hurwitz(&req)?.value;
        let sym = symmetric_vev(mu, 2, b, -1)?;
        if qpow(&q(2), 1 - g) * sym.coeff(&mono1(U, b as i32))? != direct {
            bad = Some(format!("mu={mu} g={g}"));
        }
    }
    s.push("symmetrized VEV equals the single Hurwitz number", bad.is_none(), bad.unwrap_or_else(|| format!("{} requests", cases.len())));
    for r in [2u32, 4] {
        let mut bad = None;
        for d in 1..=dmax {
            for mu in enumerate(d, Class::Odd) {
                for g in 0..=2 {
                    let req = HurwitzRequest::new(mu.clone(), r).genus(g);
                    if single_completed_hurwitz(&req)? != single_completed_hurwitz_characters(&req)? {
                        bad = Some(format!("mu={mu} g={g}"));
                    }
                }
            }
        }
        s.push(format!("operator and character routes agree, r = {r}"), bad.is_none(), bad.unwrap_or_default());
    }
    let mut bad = None;
    for d in 0..=dmax {
        for ks in [vec![], vec![1], vec![2], vec![1, 1], vec![1, 2]] {
            for z in [false, true] {
                if mixed_completed_hurwitz(d, &ks, z)? != mixed_completed_hurwitz_characters(d, &ks, z)? {
                    bad = Some(format!("d={d} ks={ks:?} zero={z}"));
                }
            }
        }
    }
    s.push("mixed completed-cycle routes agree", bad.is_none(), bad.unwrap_or_default());
    Ok(s.out)
}

fn b_conjugation(window: i64) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("b_conjugation");
    let u_order = 3;
    let res: Vec<(u32, Result<Option<String>>)> = [1u32, 3, 5]
        .into_par_iter()
        .map(|mu| {
            let f = || -> Result<Option<String>> {
                let op = b_op_odd(mu, u_order)?;
                for st in all_states_up_to(window) {
                    let v = FockVector::basis(st);
                    let lhs = op.apply_window(&v, 0, window);
                    let rhs = conjugated_alpha(mu, &v, (0, window), u_order)?;
                    let keys: BTreeSet<_> = lhs.entries.keys().chain(rhs.entries.keys()).copied().collect();
                    for t in keys {
                        let (a, b) = (lhs.get(t), rhs.get(t));
                        if a.prec()[U] < u_order || b.prec()[U] < u_order || !a.agrees_with(&b) {
                            return Ok(Some(format!("<{t:b}|B|{st:b}>")));
                        }
                    }
                }
                Ok(None)
            };
            (mu, f())
        })
        .collect();
    for (mu, r) in res {
        let bad = r?;
        s.push(format!("B({mu}) equals the conjugated alpha_-{mu}, u <= {u_order}, energy <= {window}"), bad.is_none(), bad.unwrap_or_default());
    }
    s.push("backward difference on monomials", backward_difference_ok(), "0 <= j, a <= 6, |l| <= 4");
    s.push("Q-coefficient identity", q_coefficient_ok(), "mu in {1, 3, 5}, p <= 6");
    Ok(s.out)
}

/// `Δ^j/j! l^a/a! = [w^a] (ς(w)^j/j!) e^{w(l - j/2)}`.
fn backward_difference_ok() -> bool {
    let delta = |j: usize, a: u32, l: i64| -> Q {
        (0..=j)
            .map(|i| binom(j as i64, i as i64) * q(if i % 2 == 0 { 1 } else { -1 }) * qpow(&q(l - i as i64), a as i64))
            .sum::<Q>()
            / qfact(j as u64)
            / qfact(a as u64)
    };
    let vs = HyperbolicPoly::varsigma();
    (0..=6u32).all(|j| {
        let sj = vs.pow(j);
        (0..=6u32).all(|a| {
            (-4..=4i64).all(|l| {
                // e^{w(l - j/2)} is the monomial of half-exponent 2l - j
                let e = &sj * &HyperbolicPoly::monomial(2 * l - j as i64, Q::one());
                delta(j as usize, a, l) == e.taylor(a) / qfact(j as u64)
            })
        })
    })
}

/// `a! [l^a] (l² + μl + μ²/3)^p = [w^{-a}] Σ_m C(p,m) (2p-2m)!/w^{2p-2m} μ^{2m}/12^m e^{wμ/2}`.
fn q_coefficient_ok() -> bool {
    [1i64, 3, 5].iter().all(|&mu| {
        let base = Poly::new(vec![qr(mu * mu, 3), q(mu), q(1)]);
        let mut pw = Poly::constant(Q::one());
        (0..=6i64).all(|p| {
            if p > 0 {
                pw = pw.mul(&base);
            }
            (0..=2 * p).all(|a| {
                let lhs = qfact(a as u64) * pw.c.get(a as usize).cloned().unwrap_or_else(Q::zero);
                let rhs: Q = (0..=p)
                    .filter(|m| 2 * p - 2 * m - a >= 0)
                    .map(|m| {
                        let e = 2 * p - 2 * m - a;
                        binom(p, m) * qfact((2 * p - 2 * m) as u64) * qpow(&q(mu), 2 * m) / qpow(&q(12), m)
                            * qpow(&qr(mu, 2), e)
                            / qfact(e as u64)
                    })
                    .sum();
                lhs == rhs
            })
        })
    })
}

fn b_commutator_corollaries(full: bool) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("b_commutator_corollaries");
    for (z, w, window) in [(1u32, 3u32, 5i64), (3, 5, if full { 6 } else { 5 })] {
        let u_order = 2;
        let bz = b_op_odd(z, u_order + (w as i64 - 1) / 2)?;
        let bw = b_op_odd(w, u_order + (z as i64 - 1) / 2)?;
        let mut bad = None;
        for st in all_states_up_to(window) {
            let v = FockVector::basis(st);
            let big = window + z.max(w) as i64;
            let a = bz.apply_window(&bw.apply_window(&v, 0, big), 0, window);
            let b = bw.apply_window(&bz.apply_window(&v, 0, big), 0, window);
            for (t, c) in &a.sub(&b).entries {
                if *t != st && !c.with_prec(u_only(u_order)).is_empty() {
                    bad = Some(format!("<{t:b}|[B,B]|{st:b}>"));
                }
            }
        }
        s.push(format!("[B({z}), B({w})] has no off-diagonal part"), bad.is_none(), bad.unwrap_or_default());
    }
    let perms: [(&[u32], &[u32], i64); 3] = [(&[1, 3, 5], &[5, 1, 3], 0), (&[3, 7], &[7, 3], 1), (&[1, 5], &[5, 1], 1)];
    for (a, b, u) in perms {
        let x = double_hodge_series(&a.iter().map(|m| BArg::Odd(*m)).collect::<Vec<_>>(), u, 0)?;
        let y = double_hodge_series(&b.iter().map(|m| BArg::Odd(*m)).collect::<Vec<_>>(), u, 0)?;
        s.push(format!("correlator symmetric under {a:?} -> {b:?}"), x == y, format!("u <= {u}"));
    }
    s.out.extend(pole_structure(s.name, 0)?);
    Ok(s.out)
}

/// `z w (z + w) ⟨𝓑(z)𝓑(w)⟩` at a fixed `u` order interpolates to a polynomial
/// in `z` on odd nodes, checked on one held-out node.
fn pole_structure(suite: &'static str, u_order: i64) -> Result<Vec<CheckResult>> {
    let val = |z: u32, w: u32| -> Result<Q> {
        let h = double_hodge_series(&[BArg::Odd(z), BArg::Odd(w)], u_order, 0)?;
        let c = h.coeff(&mono1(U, u_order as i32))?;
        let (zq, wq) = (q(z as i64), q(w as i64));
        Ok(c * &zq * &wq * (&zq + &wq))
    };
    let deg = 3 * u_order + 7;
    let pts: Vec<u32> = (0..deg + 2).map(|i| 2 * i as u32 + 1).collect();
    let mut out = Vec::new();
    for w in [1u32, 3] {
        let samples: Vec<(Q, Q)> = pts.iter().map(|z| Ok((q(*z as i64), val(*z, w)?))).collect::<Result<_>>()?;
        let fit = Poly::interpolate(&samples[..samples.len() - 1])?;
        let (zl, yl) = samples.last().expect("nonempty grid");
        out.push(CheckResult {
            suite,
            name: format!("two-point poles only at z = 0, w = 0, z + w = 0 (w = {w}, u^{u_order})"),
            passed: &fit.eval(zl) == yl,
            detail: format!("degree <= {deg} fit on {} odd nodes", samples.len() - 1),
        });
    }
    Ok(out)
}

fn rationality(full: bool) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("rationality");
    for u in 0..=if full { 1 } else { 0 } {
        s.out.extend(pole_structure("rationality", u)?);
    }
    // held-out ELSV round trip through the interpolated intersection numbers
    for g in 0..=2u32 {
        for n in 1..=3usize {
            if !stable(g, n) {
                continue;
            }
            let d = 3 * g + n as u32 - 3;
            let held: Vec<Vec<u32>> =
                sorted_tuples(n, d + 2).into_iter().filter(|a| a.iter().sum::<u32>() == d + 2).take(3).collect();
            let mut bad = None;
            for a in &held {
                let mu = odd_profile(a);
                if hurwitz_from_hodge(g, &mu)? != connected_h(g, &mu)? {
                    bad = Some(format!("mu={mu:?}"));
                }
            }
            s.push(format!("ELSV round trip g = {g}, n = {n}"), bad.is_none(), bad.unwrap_or_else(|| format!("{} held-out profiles", held.len())));
        }
    }
    s.push("h_{1;(1)} = 1/6", hurwitz_from_hodge(1, &[1])? == qr(1, 6), "");
    Ok(s.out)
}

fn dressing(order: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("dressing");
    for t in [q(1), q(2)] {
        for c in verify_dressing(&t, order, 12)? {
            let detail = c.failed_order.map_or(format!("u <= {order}, |n| <= 12"), |k| format!("fails at u^{k}"));
            s.push(format!("{} (t = {t})", c.name), c.passed, detail);
        }
    }
    Ok(s.out)
}

/// Route-equivalence grid: `(d, n, m, t)` for `d <= 3`, `n + m <= 2`.
pub fn route_grid() -> Vec<(u32, usize, usize, i64)> {
    let mut v = Vec::new();
    for t in [1i64, 2] {
        for d in 0..=3u32 {
            for n in 0..=2usize {
                for m in 0..=2 - n {
                    v.push((d, n, m, t));
                }
            }
        }
    }
    v
}

fn routes(full: bool) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("routes");
    let (zo, uo) = if full { (5, 4) } else { (3, 2) };
    let res: Vec<Result<(String, bool, String)>> = route_grid()
        .into_par_iter()
        .map(|(d, n, m, t)| {
            let req = GWRequest::new(d, n, m, q(t)).orders(zo, uo);
            let a = crate::gw::single_vev_g(&req)?;
            let b = crate::gw::quadratic_vev_g(&req)?;
            let c = crate::gw::localization_g(&req)?;
            let ok = a == b && b == c && a.prec() == c.prec();
            Ok((format!("three routes agree d={d} n={n} m={m} t={t}"), ok, format!("{} coefficients, z <= {zo}, u-order {uo}", a.len())))
        })
        .collect();
    for r in res {
        let (name, ok, detail) = r?;
        s.push(name, ok, detail);
    }
    for (d, ks) in [(0u32, vec![1u32]), (1, vec![0]), (1, vec![1]), (1, vec![2]), (2, vec![1]), (2, vec![0, 0]), (2, vec![2]), (1, vec![0, 1])] {
        let want = stationary_invariant(d, &ks, false);
        let mut ok = true;
        for route in [Route::SingleVev, Route::Localization] {
            ok &= stationary_from_route(d, &ks, route)? == want;
        }
        // t-independence of the stationary coefficient
        let g = crate::gw::stationary_genus(d, &ks);
        let zo = ks.iter().map(|k| *k as i64 + 1).max().unwrap_or(0);
        let r2 = GWRequest::new(d, ks.len(), 0, q(2)).orders(zo, 0);
        let r2 = GWRequest { u_order: (g - 1 - r2.lowest_u()).max(0), ..r2 };
        ok &= crate::gw::equivariant_invariant(&r2, g, &ks, &[])? == want;
        s.push(format!("stationary specialization d={d} ks={ks:?}"), ok, format!("{want}"));
    }
    Ok(s.out)
}

fn table1() -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("table1");
    let t = one_point_table(8)?;
    for (i, row) in TABLE1.iter().enumerate() {
        let d = i as u32 + 1;
        let want: std::collections::BTreeMap<i64, Q> = row.iter().map(|(j, a, b)| (*j, qr(*a, *b))).collect();
        let got = &t[&d];
        s.push(format!("U_{d} in the sinh basis"), *got == want, format!("{} coefficients", want.len()));
    }
    Ok(s.out)
}

fn closed_formulae(kmax: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("closed_formulae");
    let mut tuples: Vec<Vec<u32>> = vec![vec![]];
    for n in 1..=3 {
        let mut next = Vec::new();
        for t in tuples.iter().filter(|t| t.len() == n - 1) {
            for k in 0..=kmax {
                let mut x = t.clone();
                x.push(k);
                next.push(x);
            }
        }
        tuples.extend(next);
    }
    for d in 1..=3u32 {
        s.all(format!("degree {d} product formula, n <= 3, k <= {kmax}"), tuples.iter(), |ks| closed_formula(d, ks) == Some(stationary_invariant(d, ks, true)));
    }
    s.all("degree-zero shift is the subset expansion", (0..=3u32).flat_map(|d| tuples.iter().filter(|t| !t.is_empty()).map(move |t| (d, t))), |(d, ks)| {
        let n = ks.len();
        let c: Vec<Q> = ks
            .iter()
            .map(|k| qfact(*k as u64) / qpow(&q(-2), *k as i64) * qoppa_over_varsigma_coeff(2 * *k as i64 + 1))
            .collect();
        let mut diff = Q::zero();
        for mask in 1u32..(1 << n) {
            let rest: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| ks[i]).collect();
            let cs = (0..n).filter(|i| mask >> i & 1 == 1).fold(Q::one(), |a, i| a * &c[i]);
            diff += cs * stationary_invariant(*d, &rest, true);
        }
        stationary_invariant(*d, ks, false) - stationary_invariant(*d, ks, true) == diff
    });
    Ok(s.out)
}

/// Grid for the divisor and string checks: `d <= 2`, `n + m <= 2`, deep
/// enough in `u` for genus one.
fn equation_grid() -> Vec<GWRequest> {
    let mut v = Vec::new();
    for t in [1i64, 2] {
        for d in 0..=2u32 {
            for n in 0..=2usize {
                for m in 0..=2 - n {
                    let uo = (d as usize + n + m) as i64;
                    v.push(GWRequest::new(d, n, m, q(t)).orders(3, uo));
                }
            }
        }
    }
    v
}

fn divisor() -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("divisor");
    let res: Vec<Result<Vec<crate::gw::IdentityReport>>> = equation_grid().par_iter().map(check_divisor).collect();
    for (r, req) in res.into_iter().zip(equation_grid()) {
        for rep in r? {
            s.push(format!("{} t={}", rep.name, req.t), rep.passed, format!("{} coefficients", rep.compared));
        }
    }
    Ok(s.out)
}

fn string() -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("string");
    let grid: Vec<(GWRequest, u32)> = equation_grid()
        .into_iter()
        .flat_map(|r| {
            let two = r.zero_points + r.infinity_points == 0;
            let mut v = vec![(r.clone(), 1)];
            if two {
                v.push((r, 2));
            }
            v
        })
        .collect();
    let res: Vec<Result<crate::gw::IdentityReport>> = grid.par_iter().map(|(r, k)| check_string(r, *k)).collect();
    for (rep, (req, _)) in res.into_iter().zip(&grid) {
        let rep = rep?;
        s.push(format!("{} t={}", rep.name, req.t), rep.passed, format!("{} coefficients", rep.compared));
    }
    Ok(s.out)
}

fn gwh(dmax: u32) -> Result<Vec<CheckResult>> {
    let mut s = Suite::new("gwh");
    let mut cases = Vec::new();
    for d in 1..=dmax {
        cases.push((d, vec![]));
        for k1 in 0..=3u32 {
            cases.push((d, vec![k1]));
            for k2 in k1..=3 {
                cases.push((d, vec![k1, k2]));
            }
        }
    }
    let res: Vec<Result<crate::gw::GwhReport>> = cases.par_iter().map(|(d, ks)| gwh_check(*d, ks)).collect();
    for r in res {
        let r = r?;
        s.push(format!("GW/H d={} ks={:?} g={}", r.degree, r.ks, r.genus), r.passed(), format!("{} vs {}", r.gw, r.hurwitz));
    }
    Ok(s.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", Level::Quick), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn quick_suites_pass() {
        for name in ["car", "heisenberg", "characters", "projector", "kappa", "table1", "closed_formulae", "gwh"] {
            let r = run_suite(name, Level::Quick).unwrap();
            assert!(!r.is_empty());
            for c in r {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
