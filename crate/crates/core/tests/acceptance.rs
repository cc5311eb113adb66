//! Acceptance criteria 1 to 10, one line each on stderr.

use std::io::Write;
use std::time::{Duration, Instant};

use spinfock_core::gw::{closed_formula, one_point_series, one_point_table, stationary_invariant};
use spinfock_core::scalars::qr;
use spinfock_core::verify::{run_suite, CheckResult, Level, TABLE1};
use spinfock_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn suites(names: &[(&str, Level)]) -> Result<Outcome> {
    let mut all: Vec<CheckResult> = Vec::new();
    for (n, l) in names {
        all.extend(run_suite(n, *l)?);
    }
    Ok(from_checks(&all))
}

fn from_checks(all: &[CheckResult]) -> Outcome {
    let failed: Vec<_> = all.iter().filter(|c| !c.passed).collect();
    let detail = match failed.first() {
        None => format!("{} checks", all.len()),
        Some(c) => format!("{} of {} failed, first: {}/{} ({})", failed.len(), all.len(), c.suite, c.name, c.detail),
    };
    Outcome { passed: failed.is_empty() && !all.is_empty(), detail }
}

fn timed(budget: Duration, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let r = f();
    let el = start.elapsed();
    match r {
        Ok(o) => Outcome {
            passed: o.passed && el <= budget,
            detail: format!("{}; {:.2?} of {:?}", o.detail, el, budget),
        },
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn table1() -> Result<Outcome> {
    let t = one_point_table(8)?;
    let mut bad = Vec::new();
    for (i, row) in TABLE1.iter().enumerate() {
        let d = i as u32 + 1;
        let want: std::collections::BTreeMap<i64, _> = row.iter().map(|(j, a, b)| (*j, qr(*a, *b))).collect();
        if t[&d] != want {
            bad.push(d);
        }
    }
    let n: usize = TABLE1.iter().map(|r| r.len()).sum();
    Ok(Outcome { passed: bad.is_empty(), detail: format!("{n} coefficients, mismatched rows {bad:?}") })
}

fn speed() -> Result<Outcome> {
    let u = one_point_series(15);
    let c = u.sinh_coefficients()?;
    Ok(Outcome { passed: c.get(&15) == Some(&qr(1, 2)), detail: format!("d = 15 has {} sinh terms", c.len()) })
}

fn closed_formulae() -> Result<Outcome> {
    let mut tuples: Vec<Vec<u32>> = vec![vec![]];
    let mut frontier = tuples.clone();
    for _ in 0..3 {
        frontier = frontier
            .iter()
            .flat_map(|t| {
                (0..=3u32).map(move |k| {
                    let mut x = t.clone();
                    x.push(k);
                    x
                })
            })
            .collect();
        tuples.extend(frontier.iter().cloned());
    }
    let mut n = 0;
    for d in 1..=3 {
        for ks in &tuples {
            n += 1;
            if closed_formula(d, ks) != Some(stationary_invariant(d, ks, true)) {
                return Ok(Outcome { passed: false, detail: format!("d={d} ks={ks:?}") });
            }
        }
    }
    Ok(Outcome { passed: true, detail: format!("{n} tuples") })
}

fn elsv() -> Result<Outcome> {
    let all: Vec<CheckResult> = run_suite("rationality", Level::Quick)?
        .into_iter()
        .filter(|c| c.name.starts_with("ELSV") || c.name.starts_with("h_{1;(1)}"))
        .collect();
    Ok(from_checks(&all))
}

#[test]
fn acceptance() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("one-point table reproduction", Box::new(|| timed(Duration::from_secs(10), table1))),
        ("one-point pipeline reaches d = 15", Box::new(|| timed(Duration::from_secs(60), speed))),
        ("closed formulae in degrees 1, 2, 3", Box::new(|| timed(min(10), closed_formulae))),
        (
            "operator identities",
            Box::new(|| {
                timed(min(2), || {
                    suites(&[
                        ("car", Level::Full),
                        ("heisenberg", Level::Full),
                        ("op_commutators", Level::Full),
                        ("characters", Level::Quick),
                        ("projector", Level::Quick),
                    ])
                })
            }),
        ),
        (
            "B-operator suite",
            Box::new(|| timed(min(5), || suites(&[("b_conjugation", Level::Full), ("b_commutator_corollaries", Level::Quick)]))),
        ),
        ("dressing suite", Box::new(|| timed(min(2), || suites(&[("dressing", Level::Quick)])))),
        ("route equivalence", Box::new(|| timed(min(10), || suites(&[("routes", Level::Full)])))),
        ("spin ELSV round trip", Box::new(|| timed(min(10), elsv))),
        ("GW/H correspondence", Box::new(|| timed(min(10), || suites(&[("gwh", Level::Quick)])))),
        (
            "divisor and string equations",
            Box::new(|| timed(min(10), || suites(&[("divisor", Level::Quick), ("string", Level::Quick)]))),
        ),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let o = f();
        let line = format!("criterion {:>2} {} {}: {}\n", i + 1, if o.passed { "PASS" } else { "FAIL" }, name, o.detail);
        err.write_all(line.as_bytes()).unwrap();
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}
