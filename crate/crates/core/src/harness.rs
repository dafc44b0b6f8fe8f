//! Validation and sweep runs behind the command-line tool.
//!
//! Both produce text in a fixed layout: a `#` metadata block, one header
//! row, then comma-separated data rows with `\n` line endings. Nothing
//! depends on the clock, the locale or the thread count, so repeated runs
//! with the same configuration are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analytic::{evaluate, outage_floor, AnalyticOptions, AnalyticValue};
use crate::channel::SystemParams;
use crate::config::{Chain, RunConfig};
use crate::error::Result;
use crate::iqi::IqiProfile;
use crate::metric::Metric;
use crate::monte_carlo::{self, McOptions, MetricEstimate, RNG_ALGORITHM};

/// Agreement bound used alongside the z-score.
pub const ABS_TOLERANCE: f64 = 5e-4;
pub const Z_LIMIT: f64 = 3.0;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
/// Any error that stops a run before it produces output.
pub const EXIT_CONFIG_ERROR: i32 = 2;

fn prob(x: f64) -> String {
    format!("{x:.5e}")
}

fn se(x: f64) -> String {
    format!("{x:.2e}")
}

fn mc_options(cfg: &RunConfig) -> McOptions {
    McOptions {
        trials: cfg.trials,
        seed: cfg.seed,
        workers: cfg.workers,
    }
}

fn analytic_options(cfg: &RunConfig) -> AnalyticOptions {
    AnalyticOptions {
        quadrature_n: cfg.quadrature_n,
        near_intercept: cfg.near_intercept,
        ..AnalyticOptions::default()
    }
}

fn metadata(cfg: &RunConfig, kind: &str, profiles: &[(&str, IqiProfile)]) -> String {
    let p = &cfg.params;
    let t = &p.thresholds;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "# {k} = {v}");
    };
    kv("run", kind.to_string());
    kv("axis", cfg.axis.id().to_string());
    kv("a1", p.a1.to_string());
    kv("beta", p.beta.to_string());
    kv("snr_db", p.snr_db().to_string());
    for (k, l) in p.lambdas.numbered().iter().enumerate() {
        kv(&format!("lambda{}", k + 1), l.to_string());
    }
    for (k, v) in [
        ("th_x2", t.x2),
        ("th_x1", t.x1),
        ("th_c", t.c),
        ("th_e_far", t.eve_far),
        ("th_e_near", t.eve_near),
        ("th_e_bd", t.eve_bd),
    ] {
        kv(k, v.to_string());
    }
    for (label, prof) in profiles {
        let chains = [
            prof.source_tx,
            prof.bd_tx,
            prof.bd_rx,
            prof.near_rx,
            prof.far_rx,
            prof.eve_rx,
        ];
        let desc: Vec<String> = Chain::ALL
            .iter()
            .zip(chains)
            .map(|(c, m)| format!("{}:{}/{}deg", c.id(), m.epsilon(), m.phi().to_degrees()))
            .collect();
        kv(&format!("iqi.{label}"), desc.join(" "));
    }
    let ids: Vec<&str> = cfg.metrics.iter().map(|m| m.id()).collect();
    kv("metrics", ids.join(","));
    kv("trials", cfg.trials.to_string());
    kv("seed", cfg.seed.to_string());
    kv("quadrature_n", cfg.quadrature_n.to_string());
    kv(
        "near_intercept",
        match cfg.near_intercept {
            crate::analytic::NearInterceptForm::SinrConsistent => "sinr",
            crate::analytic::NearInterceptForm::DirectOnly => "direct",
        }
        .to_string(),
    );
    kv("common_random_numbers", cfg.common_random_numbers.to_string());
    kv("rng", RNG_ALGORITHM.to_string());
    out
}

/// One analytic-vs-simulation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub case: &'static str,
    pub x: f64,
    pub metric: Metric,
    pub analytic: f64,
    pub mc: MetricEstimate,
    pub z: f64,
    pub pass: bool,
}

impl ValidationRow {
    fn new(case: &'static str, x: f64, metric: Metric, analytic: f64, mc: MetricEstimate) -> Self {
        let gap = analytic - mc.value;
        let z = gap / mc.std_error;
        ValidationRow {
            case,
            x,
            metric,
            analytic,
            mc,
            z,
            pass: z.abs() <= Z_LIMIT || gap.abs() <= ABS_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    text: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VALIDATION_FAILED
        }
    }

    /// The report as written to disk or stdout.
    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Compares every configured metric's closed form against simulation.
pub fn run_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let opts = analytic_options(cfg);
    run_validate_with(cfg, |m, p| evaluate(m, p, &opts).map(|v| v.probability))
}

/// [`run_validate`] with a substitute for the closed forms.
pub fn run_validate_with<F>(cfg: &RunConfig, analytic: F) -> Result<ValidationReport>
where
    F: Fn(Metric, &SystemParams) -> Result<f64>,
{
    cfg.validate()?;
    let profiles = cfg.profiles()?;
    let grid = cfg.grid_values();
    let mc = mc_options(cfg);
    let axis = cfg.axis.id();

    let mut rows = Vec::new();
    for &(case, profile) in &profiles {
        let base = cfg.params.with_iqi(profile);
        let points = monte_carlo::sweep(&base, cfg.axis, &grid, &mc, cfg.common_random_numbers)?;
        for pt in points {
            for &m in &cfg.metrics {
                let a = analytic(m, &pt.params)?;
                rows.push(ValidationRow::new(case, pt.x, m, a, pt.estimates.get(m)));
            }
        }
    }

    let mut text = metadata(cfg, "validate", &profiles);
    let _ = writeln!(text, "case,{axis},metric,analytic,mc,mc_se,z,status");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{:.3},{}",
            r.case,
            r.x,
            r.metric,
            prob(r.analytic),
            prob(r.mc.value),
            se(r.mc.std_error),
            r.z,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(text, "# summary = {} of {} checks passed", rows.len() - failures, rows.len());
    Ok(ValidationReport { rows, text })
}

/// Analytic and simulated curves along the configured axis, as CSV text.
///
/// Columns: the axis value, then `analytic_<id>`, `mc_<id>`, `mc_se_<id>`
/// for each metric, then `floor_<id>` for each outage metric when floors
/// are requested.
pub fn run_sweep(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let profiles = cfg.profiles()?;
    let (_, profile) = profiles[0];
    let base = cfg.params.with_iqi(profile);
    let grid = cfg.grid_values();
    let opts = analytic_options(cfg);
    let points = monte_carlo::sweep(&base, cfg.axis, &grid, &mc_options(cfg), cfg.common_random_numbers)?;
    let floors: Vec<Metric> = if cfg.emit_floors {
        cfg.metrics.iter().copied().filter(|m| m.is_outage()).collect()
    } else {
        Vec::new()
    };

    let mut head = vec![cfg.axis.id().to_string()];
    for m in &cfg.metrics {
        head.extend([format!("analytic_{m}"), format!("mc_{m}"), format!("mc_se_{m}")]);
    }
    head.extend(floors.iter().map(|m| format!("floor_{m}")));

    let mut guards = String::new();
    let mut body = String::new();
    for pt in &points {
        let mut row = vec![pt.x.to_string()];
        for &m in &cfg.metrics {
            let a: AnalyticValue = evaluate(m, &pt.params, &opts)?;
            if let Some(reason) = a.feasibility.reason {
                let _ = writeln!(guards, "# guard = {}={} {m}: {}", cfg.axis.id(), pt.x, reason.describe());
            }
            let e = pt.estimates.get(m);
            row.extend([prob(a.probability), prob(e.value), se(e.std_error)]);
        }
        for &m in &floors {
            let f = outage_floor(m, &pt.params)?.map_or(f64::NAN, |v| v.probability);
            row.push(prob(f));
        }
        body.push_str(&row.join(","));
        body.push('\n');
    }
    let mut text = metadata(cfg, "sweep", &profiles);
    text.push_str(&guards);
    text.push_str(&head.join(","));
    text.push('\n');
    text.push_str(&body);
    Ok(text)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}
