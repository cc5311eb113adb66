use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use spinfock_core::gw::{self, GWRequest, Route};
use spinfock_core::hodge::point_var;
use spinfock_core::hurwitz::{self, HurwitzRequest};
use spinfock_core::partitions::{pad_to_degree, Partition};
use spinfock_core::scalars::{fmt_q, parse_q, Q};
use spinfock_core::series::{Series, NV};
use spinfock_core::verify::{self, Level, SUITES};
use spinfock_core::Error;

/// Largest degree accepted by `table`.
const TABLE_CAP: u32 = 40;

#[derive(Parser)]
#[command(name = "spinfock", version, about = "Exact spin Hurwitz numbers and spin Gromov-Witten invariants of (P1, O(-1))")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spin Hurwitz numbers with completed cycles.
    Hurwitz(HurwitzArgs),
    /// Stationary or equivariant spin Gromov-Witten invariants.
    Gw(GwArgs),
    /// One-point stationary generating series in the sinh basis.
    Table(TableArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct HurwitzArgs {
    #[arg(long)]
    degree: Option<u32>,
    /// Ramification profile over 0, comma-separated odd parts.
    #[arg(long)]
    profile: Option<String>,
    /// Completed-cycle type r (cycles c̄_{r+1}, r even); the number of
    /// cycles follows from the genus.
    #[arg(long, default_value_t = 2)]
    cycles: u32,
    #[arg(long, allow_hyphen_values = true)]
    genus: Option<i64>,
    /// Mixed request: comma-separated odd completed-cycle orders, possibly empty.
    #[arg(long)]
    mixed: Option<String>,
    #[arg(long)]
    connected: bool,
    #[arg(long)]
    include_degree_zero: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GwArgs {
    #[arg(long)]
    degree: u32,
    /// Descendant indices k_i of the insertions τ_{k_i} over 0.
    #[arg(long, default_value = "")]
    insertions: String,
    /// Descendant indices of the insertions over ∞ (equivariant only).
    #[arg(long, default_value = "")]
    insertions_infinity: String,
    /// localization, quadratic_vev or single_vev.
    #[arg(long)]
    route: Option<String>,
    /// Equivariant parameter as p/q; switches to equivariant mode.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Genus of an equivariant invariant; without it the full series is printed.
    #[arg(long, allow_hyphen_values = true)]
    genus: Option<i64>,
    /// Orders in u above the lowest power u^{-(d+n+m)}.
    #[arg(long, default_value_t = 2)]
    u_order: i64,
    #[arg(long)]
    z_order: Option<i64>,
    /// Sum degrees 0..=q-order into one series (single_vev route).
    #[arg(long)]
    q_order: Option<u32>,
    #[arg(long)]
    connected: bool,
    #[arg(long)]
    include_degree_zero: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TableArgs {
    /// Largest degree.
    #[arg(long, default_value_t = 8)]
    degree: u32,
    /// Also report the matrix recursion next to the direct values.
    #[arg(long)]
    recursion: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite names, comma-separated, or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    /// quick or full.
    #[arg(long, default_value = "quick")]
    level: String,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Invalid(String),
    Infeasible(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Invalid(e.to_string()),
            Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn parse_list(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<u32>().map_err(|_| Failure::Invalid(format!("not a nonnegative integer: {x:?}"))))
        .collect()
}

fn qs(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn series_json(s: &Series, names: &[(usize, String)]) -> Value {
    let mut terms = Map::new();
    for (m, c) in s.terms() {
        let key: Vec<String> = names.iter().map(|(v, _)| m[*v].to_string()).collect();
        terms.insert(format!("({})", key.join(",")), qs(c));
    }
    let prec: Map<String, Value> = names
        .iter()
        .filter(|(v, _)| s.prec()[*v] < spinfock_core::series::INF)
        .map(|(v, n)| (n.clone(), json!(s.prec()[*v])))
        .collect();
    json!({
        "variables": names.iter().map(|(_, n)| n.clone()).collect::<Vec<_>>(),
        "known_through": prec,
        "terms": terms,
    })
}

fn cmd_hurwitz(a: &HurwitzArgs) -> Outcome {
    if let Some(mixed) = &a.mixed {
        let d = a.degree.ok_or_else(|| Failure::Invalid("--mixed needs --degree".into()))?;
        if a.profile.is_some() {
            return Err(Failure::Invalid("--mixed and --profile are exclusive".into()));
        }
        let orders = parse_list(mixed)?;
        if let Some(o) = orders.iter().find(|o| *o % 2 == 0) {
            return Err(Failure::Invalid(format!("completed-cycle order {o} is not odd")));
        }
        let ks: Vec<u32> = orders.iter().map(|o| (o - 1) / 2).collect();
        let z = a.include_degree_zero;
        let value = if a.connected {
            gw::connected_in_degree(d, &ks, &|e, sub| hurwitz::mixed_completed_hurwitz(e, sub, z))?
        } else {
            hurwitz::mixed_completed_hurwitz(d, &ks, z)?
        };
        let req = json!({"degree": d, "mixed": orders, "include_degree_zero": z});
        return Ok((json!({"request": req, "value": qs(&value), "connected": a.connected}), true));
    }
    let profile = a.profile.as_deref().ok_or_else(|| Failure::Invalid("need --profile or --mixed".into()))?;
    let parts = parse_list(profile)?;
    let mu = Partition::new(parts).map_err(Failure::from)?;
    let d = a.degree.unwrap_or(mu.size());
    let req_json = json!({
        "degree": d, "profile": mu.parts(), "r": a.cycles, "genus": a.genus,
        "include_degree_zero": a.include_degree_zero,
    });
    let Some((hat, _)) = pad_to_degree(&mu, d) else {
        return Ok((
            json!({"request": req_json, "value": "0/1", "connected": a.connected, "b": null, "g": a.genus,
                   "reason": "profile exceeds degree"}),
            true,
        ));
    };
    let g = a.genus.ok_or_else(|| Failure::Invalid("--profile needs --genus".into()))?;
    let mut req = HurwitzRequest::new(hat, a.cycles).connected(a.connected).genus(g);
    req.include_degree_zero = a.include_degree_zero;
    if a.connected && a.include_degree_zero {
        return Err(Failure::Invalid("connected numbers exclude degree-zero terms".into()));
    }
    let v = hurwitz::single_completed_hurwitz(&req)?;
    let mut out = json!({"request": req_json, "value": qs(&v.value), "connected": a.connected, "b": v.cycles, "g": v.genus});
    if !v.feasible {
        out["reason"] = json!("no integral Riemann-Hurwitz solution");
    }
    Ok((out, true))
}

fn cmd_gw(a: &GwArgs) -> Outcome {
    let ks = parse_list(&a.insertions)?;
    let ls = parse_list(&a.insertions_infinity)?;
    let route: Option<Route> = a.route.as_deref().map(str::parse).transpose()?;
    let Some(t) = &a.t else {
        if !ls.is_empty() {
            return Err(Failure::Invalid("insertions over infinity need --t".into()));
        }
        let g = gw::stationary_genus(a.degree, &ks);
        let req = json!({"degree": a.degree, "insertions": ks, "route": a.route});
        let (value, zero) = match route {
            None => {
                let z = a.include_degree_zero;
                let v = if a.connected {
                    if z {
                        return Err(Failure::Invalid("connected invariants exclude degree-zero components".into()));
                    }
                    gw::connected_in_degree(a.degree, &ks, &|e, sub| Ok(gw::stationary_invariant(e, sub, true)))?
                } else {
                    gw::stationary_invariant(a.degree, &ks, !z)
                };
                (v, z)
            }
            Some(r) => {
                if a.connected {
                    return Err(Failure::Invalid("--connected is not available on equivariant routes".into()));
                }
                if ks.len() + 2 > NV {
                    return Err(Failure::Invalid(format!("at most {} insertions on a route", NV - 2)));
                }
                (gw::stationary_from_route(a.degree, &ks, r)?, true)
            }
        };
        return Ok((
            json!({"request": req, "genus": g, "value": qs(&value), "connected": a.connected, "degree_zero_included": zero}),
            true,
        ));
    };
    let t = parse_q(t)?;
    if a.connected {
        return Err(Failure::Invalid("equivariant output is disconnected".into()));
    }
    let (n, m) = (ks.len(), ls.len());
    let need = ks.iter().chain(&ls).map(|k| *k as i64 + 1).max().unwrap_or(0);
    let z_order = a.z_order.unwrap_or(need.max(3));
    let mut req = GWRequest::new(a.degree, n, m, t.clone()).orders(z_order, a.u_order);
    req.route = route.unwrap_or(Route::SingleVev);
    let req_json = json!({
        "degree": a.degree, "insertions": ks, "insertions_infinity": ls, "t": qs(&t),
        "route": format!("{:?}", req.route), "u_order": a.u_order, "z_order": z_order, "q_order": a.q_order,
    });
    if let Some(g) = a.genus {
        let v = gw::equivariant_invariant(&req, g, &ks, &ls)?;
        return Ok((json!({"request": req_json, "genus": g, "value": qs(&v)}), true));
    }
    let mut names = vec![(spinfock_core::hurwitz::U, "u".to_string())];
    let series = match a.q_order {
        Some(qo) => {
            if req.route != Route::SingleVev {
                return Err(Failure::Invalid("--q-order needs the single_vev route".into()));
            }
            names.push((gw::QV, "q".to_string()));
            gw::single_vev_generating(&req, qo)?
        }
        None => gw::equivariant_g(&req)?,
    };
    names.extend((0..n).map(|i| (point_var(i), format!("z{}", i + 1))));
    names.extend((0..m).map(|j| (point_var(n + j), format!("w{}", j + 1))));
    Ok((json!({"request": req_json, "series": series_json(&series, &names)}), true))
}

fn cmd_table(a: &TableArgs) -> Outcome {
    if a.degree == 0 || a.degree > TABLE_CAP {
        return Err(Failure::Invalid(format!("degree must lie in 1..={TABLE_CAP}")));
    }
    let rows = gw::one_point_table(a.degree)?;
    let mut out = Map::new();
    for (d, row) in &rows {
        let r: Map<String, Value> = row.iter().rev().map(|(j, c)| (j.to_string(), qs(c))).collect();
        out.insert(d.to_string(), Value::Object(r));
    }
    let mut res = json!({"basis": "sinh(j z)", "rows": out});
    if a.recursion {
        let rec: Vec<Value> = gw::u_recursion_table(a.degree)
            .iter()
            .map(|r| {
                json!({
                    "degree": r.d,
                    "agrees": r.agrees(),
                    "recursion": r.recursion[0].to_string(),
                    "direct": r.direct_u.to_string(),
                    "difference": r.discrepancy().to_string(),
                })
            })
            .collect();
        res["recursion"] = Value::Array(rec);
    }
    Ok((res, true))
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let level: Level = a.level.parse()?;
    let names: Vec<&str> = if a.suite == "all" { SUITES.to_vec() } else { a.suite.split(',').map(str::trim).collect() };
    let mut checks = Vec::new();
    let mut ok = true;
    for s in names {
        for c in verify::run_suite(s, level)? {
            ok &= c.passed;
            checks.push(json!({"suite": c.suite, "identity": c.name, "passed": c.passed, "detail": c.detail}));
        }
    }
    Ok((json!({"level": a.level, "passed": ok, "checks": checks}), ok))
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("SPINFOCK_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::Invalid(format!("SPINFOCK_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = match &cli.cmd {
        Cmd::Hurwitz(a) => (configure_threads().and_then(|_| cmd_hurwitz(a)), &a.common.out),
        Cmd::Gw(a) => (configure_threads().and_then(|_| cmd_gw(a)), &a.common.out),
        Cmd::Table(a) => (configure_threads().and_then(|_| cmd_table(a)), &a.common.out),
        Cmd::Verify(a) => (configure_threads().and_then(|_| cmd_verify(a)), &a.common.out),
    };
    match outcome {
        Ok((v, ok)) => {
            let text = serde_json::to_string_pretty(&v).expect("json values serialize") + "\n";
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, &text) {
                        eprintln!("spinfock: cannot write {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("spinfock: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("spinfock: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("spinfock: {m}");
            ExitCode::from(1)
        }
    }
}
