//! Run configuration: a `key = value` file, one setting per line.
//!
//! `#` starts a comment. Omitted keys take their defaults, unknown keys and
//! repeated keys are errors. Grids are either `lo:hi:step` (inclusive) or a
//! comma-separated list.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analytic::NearInterceptForm;
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::iqi::{IqiProfile, MismatchParams};
use crate::metric::Metric;
use crate::monte_carlo::{SweepAxis, DEFAULT_TRIALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Validate,
    Sweep,
}

/// Which front-end assumption a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqiCases {
    Ideal,
    NonIdeal,
    Both,
}

/// One of the six I/Q chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chain {
    SourceTx,
    BdTx,
    BdRx,
    NearRx,
    FarRx,
    EveRx,
}

impl Chain {
    pub const ALL: [Chain; 6] = [
        Chain::SourceTx,
        Chain::BdTx,
        Chain::BdRx,
        Chain::NearRx,
        Chain::FarRx,
        Chain::EveRx,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Chain::SourceTx => "source_tx",
            Chain::BdTx => "bd_tx",
            Chain::BdRx => "bd_rx",
            Chain::NearRx => "near_rx",
            Chain::FarRx => "far_rx",
            Chain::EveRx => "eve_rx",
        }
    }
}

/// Mismatch levels for the non-ideal case: one shared `(ε, φ)` with
/// optional per-chain overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct IqiSettings {
    pub amplitude: f64,
    pub phase_deg: f64,
    pub chain_amplitude: [Option<f64>; 6],
    pub chain_phase_deg: [Option<f64>; 6],
}

impl Default for IqiSettings {
    fn default() -> Self {
        IqiSettings {
            amplitude: 1.05,
            phase_deg: 20.0,
            chain_amplitude: [None; 6],
            chain_phase_deg: [None; 6],
        }
    }
}

impl IqiSettings {
    pub fn chain(&self, chain: Chain) -> Result<MismatchParams> {
        let k = chain as usize;
        MismatchParams::from_degrees(
            self.chain_amplitude[k].unwrap_or(self.amplitude),
            self.chain_phase_deg[k].unwrap_or(self.phase_deg),
        )
    }

    pub fn profile(&self) -> Result<IqiProfile> {
        Ok(IqiProfile {
            source_tx: self.chain(Chain::SourceTx)?,
            bd_tx: self.chain(Chain::BdTx)?,
            bd_rx: self.chain(Chain::BdRx)?,
            near_rx: self.chain(Chain::NearRx)?,
            far_rx: self.chain(Chain::FarRx)?,
            eve_rx: self.chain(Chain::EveRx)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Operating point; `params.iqi` is ignored in favour of `iqi` and `cases`.
    pub params: SystemParams,
    pub iqi: IqiSettings,
    /// `None` picks the mode default: both cases to validate, non-ideal to sweep.
    pub cases: Option<IqiCases>,
    pub axis: SweepAxis,
    /// Explicit grid per axis, indexed by [`axis_slot`]; `None` picks the default.
    pub grids: [Option<Vec<f64>>; 3],
    pub metrics: Vec<Metric>,
    pub trials: u64,
    pub seed: u64,
    pub quadrature_n: usize,
    pub near_intercept: NearInterceptForm,
    pub common_random_numbers: bool,
    pub emit_floors: bool,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            params: SystemParams::default(),
            iqi: IqiSettings::default(),
            cases: None,
            axis: SweepAxis::SnrDb,
            grids: [None, None, None],
            metrics: Metric::ALL.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 1,
            quadrature_n: 200,
            near_intercept: NearInterceptForm::SinrConsistent,
            common_random_numbers: false,
            emit_floors: false,
            workers: None,
            output: None,
        }
    }

    pub fn iqi_cases(&self) -> IqiCases {
        self.cases.unwrap_or(match self.mode {
            Mode::Validate => IqiCases::Both,
            Mode::Sweep => IqiCases::NonIdeal,
        })
    }

    /// `(label, profile)` for every case the run covers.
    pub fn profiles(&self) -> Result<Vec<(&'static str, IqiProfile)>> {
        let nonideal = || self.iqi.profile().map(|p| ("nonideal", p));
        Ok(match self.iqi_cases() {
            IqiCases::Ideal => vec![("ideal", IqiProfile::IDEAL)],
            IqiCases::NonIdeal => vec![nonideal()?],
            IqiCases::Both => vec![("ideal", IqiProfile::IDEAL), nonideal()?],
        })
    }

    pub fn grid_values(&self) -> Vec<f64> {
        if let Some(g) = &self.grids[axis_slot(self.axis)] {
            return g.clone();
        }
        match (self.axis, self.mode) {
            (SweepAxis::SnrDb, Mode::Validate) => vec![0.0, 10.0, 20.0, 30.0, 40.0],
            (SweepAxis::SnrDb, Mode::Sweep) => range_grid(0.0, 60.0, 5.0),
            (SweepAxis::Beta, _) => range_grid(0.02, 0.2, 0.02),
            (SweepAxis::A1, _) => range_grid(0.05, 0.45, 0.05),
        }
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::invalid("metrics", "metric list is empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.quadrature_n == 0 {
            return Err(Error::invalid("quadrature_n", "need at least one node"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "need at least one worker"));
        }
        if self.mode == Mode::Sweep && self.iqi_cases() == IqiCases::Both {
            return Err(Error::invalid("iqi", "a sweep covers one case: ideal or nonideal"));
        }
        self.params.validate()?;
        let grid = self.grid_values();
        if grid.is_empty() {
            return Err(Error::invalid(grid_key(self.axis), "grid is empty"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(grid_key(self.axis), "grid must be strictly increasing"));
        }
        let key = grid_key(self.axis);
        for &x in &grid {
            self.axis
                .apply(&self.params, x)
                .validate()
                .map_err(|e| Error::invalid(key, format!("grid value {x}: {e}")))?;
        }
        self.profiles()?;
        Ok(())
    }
}

pub fn axis_slot(axis: SweepAxis) -> usize {
    match axis {
        SweepAxis::SnrDb => 0,
        SweepAxis::Beta => 1,
        SweepAxis::A1 => 2,
    }
}

fn grid_key(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::SnrDb => "snr_db_grid",
        SweepAxis::Beta => "beta_grid",
        SweepAxis::A1 => "a1_grid",
    }
}

/// Drops float noise such as `0.06000000000000001` from computed grid points.
fn tidy(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap_or(x)
}

/// `lo, lo + step, …` up to and including `hi`.
pub fn range_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| tidy(lo + k as f64 * step)).collect()
}

/// Parses `lo:hi:step` or `a, b, c`.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("range grid `{text}` must be lo:hi:step"));
        };
        let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
        if !(step > 0.0) {
            return Err(format!("grid step must be > 0, got {step}"));
        }
        if hi < lo {
            return Err(format!("grid end {hi} is below its start {lo}"));
        }
        return Ok(range_grid(lo, hi, step));
    }
    text.split(',').map(number).collect()
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn integer<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

pub fn parse_metrics(s: &str) -> std::result::Result<Vec<Metric>, String> {
    let s = s.trim();
    if s == "all" {
        return Ok(Metric::ALL.to_vec());
    }
    let mut out = Vec::new();
    for id in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m: Metric = id.parse().map_err(|e: Error| e.to_string())?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

/// Applies one `key = value` setting.
fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    let p = &mut cfg.params;
    let t = &mut p.thresholds;
    match key {
        "mode" => {
            cfg.mode = match value {
                "validate" => Mode::Validate,
                "sweep" => Mode::Sweep,
                _ => return Err(format!("mode must be validate or sweep, got `{value}`")),
            }
        }
        "a1" => p.a1 = number(value)?,
        "beta" => p.beta = number(value)?,
        "snr_db" => *p = p.with_snr_db(number(value)?),
        "th_x2" => t.x2 = number(value)?,
        "th_x1" => t.x1 = number(value)?,
        "th_c" => t.c = number(value)?,
        "th_e_far" => t.eve_far = number(value)?,
        "th_e_near" => t.eve_near = number(value)?,
        "th_e_bd" => t.eve_bd = number(value)?,
        "iqi" => {
            cfg.cases = Some(match value {
                "ideal" => IqiCases::Ideal,
                "nonideal" => IqiCases::NonIdeal,
                "both" => IqiCases::Both,
                _ => return Err(format!("iqi must be ideal, nonideal or both, got `{value}`")),
            })
        }
        "amplitude" => cfg.iqi.amplitude = number(value)?,
        "phase_deg" => cfg.iqi.phase_deg = number(value)?,
        "axis" => cfg.axis = value.parse().map_err(|e: Error| e.to_string())?,
        "snr_db_grid" | "beta_grid" | "a1_grid" => {
            let axis: SweepAxis = key
                .trim_end_matches("_grid")
                .parse()
                .map_err(|e: Error| e.to_string())?;
            cfg.grids[axis_slot(axis)] = Some(parse_grid(value)?);
        }
        "metrics" => cfg.metrics = parse_metrics(value)?,
        "trials" => cfg.trials = integer(value)?,
        "seed" => cfg.seed = integer(value)?,
        "quadrature_n" => cfg.quadrature_n = integer(value)?,
        "near_intercept" => {
            cfg.near_intercept = match value {
                "sinr" => NearInterceptForm::SinrConsistent,
                "direct" => NearInterceptForm::DirectOnly,
                _ => return Err(format!("near_intercept must be sinr or direct, got `{value}`")),
            }
        }
        "common_random_numbers" => cfg.common_random_numbers = boolean(value)?,
        "emit_floors" => cfg.emit_floors = boolean(value)?,
        "workers" => cfg.workers = Some(integer(value)?),
        "output" => cfg.output = Some(PathBuf::from(value)),
        _ => {
            if let Some(k) = key.strip_prefix("lambda") {
                let idx: usize = k.parse().map_err(|_| format!("unknown key `{key}`"))?;
                if !(1..=7).contains(&idx) {
                    return Err(format!("unknown key `{key}`; variances are lambda1..lambda7"));
                }
                let mut l = p.lambdas.numbered();
                l[idx - 1] = number(value)?;
                p.lambdas = crate::channel::ChannelVariances::from_numbered(l);
                return Ok(());
            }
            for chain in Chain::ALL {
                if let Some(rest) = key.strip_prefix(chain.id()).and_then(|r| r.strip_prefix('_')) {
                    let k = chain as usize;
                    match rest {
                        "amplitude" => cfg.iqi.chain_amplitude[k] = Some(number(value)?),
                        "phase_deg" => cfg.iqi.chain_phase_deg[k] = Some(number(value)?),
                        _ => return Err(format!("unknown key `{key}`")),
                    }
                    return Ok(());
                }
            }
            return Err(format!("unknown key `{key}`"));
        }
    }
    Ok(())
}

/// Config key that most likely caused a validation failure on `name`.
fn key_for(name: &str) -> &str {
    match name {
        "snr" => "snr_db",
        "epsilon" => "amplitude",
        "phi" => "phase_deg",
        other => other,
    }
}

/// Parses config text; `path` is only used in error messages.
pub fn parse_config_str(text: &str, path: &Path, mode: Mode) -> Result<RunConfig> {
    let err = |line: usize, message: String| Error::Config {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut cfg = RunConfig::new(mode);
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, format!("expected `key = value`, got `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err(line, "missing key before `=`".into()));
        }
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(err(line, format!("`{key}` already set on line {first}")));
        }
        apply(&mut cfg, key, value).map_err(|m| err(line, m))?;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { ref name, .. } => {
            let line = seen.get(key_for(name)).copied().unwrap_or(0);
            err(line, e.to_string())
        }
        other => err(0, other.to_string()),
    })?;
    Ok(cfg)
}

/// Reads and parses a config file. `mode` applies unless the file sets one.
pub fn parse_config(path: &Path, mode: Mode) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        line: 0,
        message: format!("cannot read config: {e}"),
    })?;
    parse_config_str(&text, path, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("test.cfg"), Mode::Sweep)
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("# nothing here\n\n").unwrap();
        assert_eq!(cfg, RunConfig::new(Mode::Sweep));
        assert_eq!(cfg.params, SystemParams::default());
        assert_eq!(cfg.grid_values().len(), 13);
    }

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("0:60:5").unwrap().len(), 13);
        assert_eq!(parse_grid("0.02:0.2:0.02").unwrap()[2], 0.06);
        assert_eq!(parse_grid("0.02:0.2:0.02").unwrap().len(), 10);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert!(parse_grid("0:10").is_err());
        assert!(parse_grid("0:10:0").is_err());
        assert!(parse_grid("10:0:1").is_err());
        assert!(parse_grid("1,x").is_err());
    }

    #[test]
    fn settings_apply() {
        let cfg = parse(
            "a1 = 0.2\nbeta=0.3 # trailing comment\nlambda5 = 0.4\nsnr_db = 30\n\
             metrics = op_far, ip_bd\naxis = beta\nbeta_grid = 0.1,0.2\n\
             bd_tx_amplitude = 1.2\nphase_deg = 5\ntrials = 1000\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.params.a1, 0.2);
        assert_eq!(cfg.params.beta, 0.3);
        assert_eq!(cfg.params.lambdas.lambda(5), Some(0.4));
        assert!((cfg.params.snr - 1000.0).abs() < 1e-9);
        assert_eq!(cfg.metrics, vec![Metric::OpFar, Metric::IpBd]);
        assert_eq!(cfg.grid_values(), vec![0.1, 0.2]);
        let prof = cfg.iqi.profile().unwrap();
        assert_eq!(prof.bd_tx.epsilon(), 1.2);
        assert_eq!(prof.bd_rx.epsilon(), 1.05);
        assert!((prof.near_rx.phi() - 5f64.to_radians()).abs() < 1e-15);
        assert_eq!((cfg.trials, cfg.seed), (1000, 9));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("\n\nbogus = 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("a1 = 0.1\nno equals sign\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("trials = lots\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("beta = 0.1\nbeta = 0.2\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("lambda8 = 1\n").unwrap_err()), 1);
    }

    #[test]
    fn range_violations() {
        let e = parse("seed = 1\na1 = 0.6\n").unwrap_err();
        assert_eq!(line_of(e), 2);
        assert!(parse("metrics = \n").is_err());
        assert!(parse("iqi = both\n").is_err());
        assert!(parse("amplitude = 0\n").is_err());
        assert!(parse("axis = a1\na1_grid = 0.1:0.6:0.1\n").is_err());
        assert!(parse("snr_db_grid = 10, 0\n").is_err());
    }

    #[test]
    fn mode_dependent_defaults() {
        let v = RunConfig::new(Mode::Validate);
        assert_eq!(v.iqi_cases(), IqiCases::Both);
        assert_eq!(v.grid_values(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(v.profiles().unwrap().len(), 2);
        let s = RunConfig::new(Mode::Sweep);
        assert_eq!(s.profiles().unwrap()[0].0, "nonideal");
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let e = parse_config(Path::new("/definitely/not/here.cfg"), Mode::Validate).unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
    }
}
