//! One function per subcommand. Each returns the text destined for stdout.

use critset::manifold::{monotonicity, omega_scan, write_scan_csv};
use critset::verify::{self, CheckResult, Group, VerifyOptions};
use critset::{
    chart_point, count_solutions, find_lambda, integrate_argument, is_ck_nonempty, is_critical,
    lambda_scan, CountOptions, Error, LineFamily, ScanRange, SearchOptions, Solution,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, Resolved};
use crate::output::{to_json, Sink};
use crate::CliError;

pub struct Outcome {
    pub stdout: String,
    /// Verify failures; everything else reports problems as errors.
    pub failed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            failed: false,
        }
    }
}

fn utf8(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("CSV output is ASCII")
}

fn finish(
    cfg: &Resolved,
    sink: &Sink,
    summary: &impl Serialize,
    csv: Option<Vec<u8>>,
) -> Result<Outcome, CliError> {
    let text = to_json(summary)?;
    sink.write("summary.json", text.as_bytes())?;
    Ok(Outcome::ok(match (cfg.raw.output.format, csv) {
        (Format::Csv, Some(csv)) => utf8(csv),
        _ => text,
    }))
}

pub fn argument(cfg: &Resolved, sink: &Sink) -> Result<Outcome, CliError> {
    let f = cfg.nonlinearity()?;
    let path = integrate_argument(f, &cfg.u, cfg.substeps)?;
    let crit = is_critical(&path, cfg.raw.tolerance.unwrap_or(1e-8));
    let csv = sink.write_with("path.csv", |b| path.write_csv(b))?;
    let summary = json!({
        "W_pi": path.w_pi(),
        "rho_pi": path.terminal().rho_pi,
        "is_critical": crit.critical,
        "k": crit.k,
        "distance": crit.distance,
    });
    finish(cfg, sink, &summary, Some(csv))
}

fn search_options(cfg: &Resolved) -> SearchOptions {
    let d = SearchOptions::default();
    SearchOptions {
        bracket_limit: cfg.raw.bracket_limit.unwrap_or(d.bracket_limit),
        substeps: cfg.substeps,
        ..d
    }
}

pub fn critical(cfg: &Resolved, sink: &Sink) -> Result<Outcome, CliError> {
    let f = cfg.nonlinearity()?;
    let line = LineFamily::new(cfg.p.clone())?;
    let opts = search_options(cfg);
    let point = match (cfg.raw.k, cfg.raw.theta) {
        (Some(k), _) => {
            if !is_ck_nonempty(f, k)? {
                return finish(cfg, sink, &json!({ "nonempty": false }), None);
            }
            chart_point(f, &cfg.h, &line, k, &opts)
        }
        (None, Some(theta)) => find_lambda(f, &cfg.h, &line, theta, &opts),
        (None, None) => return Err(CliError::Input("critical needs `k` or `theta`".into())),
    };
    match point {
        Ok(p) => finish(cfg, sink, &p.record(), None),
        Err(Error::RangeUnattainable { theta, limit }) => finish(
            cfg,
            sink,
            &json!({ "nonempty": false, "theta": theta, "bracket_limit": limit }),
            None,
        ),
        Err(e) => Err(e.into()),
    }
}

pub fn scan(cfg: &Resolved, sink: &Sink) -> Result<Outcome, CliError> {
    let (lambda, omega) = match (cfg.raw.lambda, cfg.raw.omega) {
        (None, None) => (
            Some(ScanRange {
                min: -100.0,
                max: 100.0,
                samples: 401,
            }),
            Some(ScanRange {
                min: -25.0,
                max: 30.0,
                samples: 551,
            }),
        ),
        other => other,
    };
    let mut summary = serde_json::Map::new();
    let mut main_csv = None;
    if let Some(range) = lambda {
        let f = cfg.nonlinearity()?;
        let line = LineFamily::new(cfg.p.clone())?;
        let rows = lambda_scan(f, &cfg.h, &line, &range, cfg.substeps)?;
        let csv = sink.write_with("lambda_scan.csv", |b| write_scan_csv(b, "lambda", &rows))?;
        summary.insert(
            "lambda".into(),
            json!({ "range": range, "monotonicity": monotonicity(&rows) }),
        );
        main_csv = Some(csv);
    }
    if let Some(range) = omega {
        let rows = omega_scan(&range)?;
        let csv = sink.write_with("omega_scan.csv", |b| write_scan_csv(b, "omega", &rows))?;
        summary.insert(
            "omega".into(),
            json!({ "range": range, "monotonicity": monotonicity(&rows) }),
        );
        main_csv.get_or_insert(csv);
    }
    finish(cfg, sink, &summary, main_csv)
}

pub fn verify(cfg: &Resolved, sink: &Sink, only: Option<Group>) -> Result<Outcome, CliError> {
    let groups: Vec<Group> = only.map_or_else(|| Group::ALL.to_vec(), |g| vec![g]);
    let results = verify::run(&groups, &VerifyOptions::new(cfg.grid, cfg.substeps))?;
    let failed = results.iter().filter(|r| !r.passed).count();
    #[derive(Serialize)]
    struct Summary<'a> {
        n: usize,
        substeps: usize,
        passed: usize,
        failed: usize,
        checks: &'a [CheckResult],
    }
    let summary = Summary {
        n: cfg.grid.intervals(),
        substeps: cfg.substeps,
        passed: results.len() - failed,
        failed,
        checks: &results,
    };
    sink.write("summary.json", to_json(&summary)?.as_bytes())?;
    let width = results
        .iter()
        .map(|r| r.group.name().len() + r.name.len() + 2)
        .max()
        .unwrap_or(0);
    let mut table = String::new();
    for r in &results {
        let label = format!("{}: {}", r.group, r.name);
        let status = if r.passed { "PASS" } else { "FAIL" };
        table += &format!("{status}  {label:<width$}  {}\n", r.detail);
    }
    table += &format!("{} passed, {failed} failed\n", results.len() - failed);
    Ok(Outcome {
        stdout: table,
        failed: failed > 0,
    })
}

pub fn count(cfg: &Resolved, sink: &Sink) -> Result<Outcome, CliError> {
    let f = cfg.nonlinearity()?;
    let g = cfg
        .g
        .as_ref()
        .ok_or_else(|| CliError::Input("count needs `inputs.g`".into()))?;
    let d = CountOptions::default();
    let opts = CountOptions {
        window: cfg.raw.slopes.unwrap_or(d.window),
        substeps: cfg.substeps,
        root_tol: cfg.raw.root_tol.unwrap_or(d.root_tol),
        tangent_tol: cfg.raw.tangent_tol.unwrap_or(d.tangent_tol),
    };
    let set = count_solutions(f, g, &opts)?;
    if set.blow_ups > 0 {
        eprintln!(
            "warning: {} of {} slopes blew up before t = pi; counts are within the window only",
            set.blow_ups,
            set.scan.len()
        );
    }
    let csv = sink.write_with("shooting_scan.csv", |b| set.write_scan_csv(b))?;
    sink.write("solutions.json", to_json(&set.solutions)?.as_bytes())?;
    #[derive(Serialize)]
    struct Summary<'a> {
        count: usize,
        blow_ups: usize,
        window: ScanRange,
        solutions: &'a [Solution],
    }
    let summary = Summary {
        count: set.count(),
        blow_ups: set.blow_ups,
        window: opts.window,
        solutions: &set.solutions,
    };
    finish(cfg, sink, &summary, Some(csv))
}
