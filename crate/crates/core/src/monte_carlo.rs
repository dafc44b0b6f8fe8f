//! Seeded Monte Carlo estimates of all six metrics.
//!
//! Trials are split into fixed batches of [`BATCH_SIZE`]. Batch `k` of grid
//! point `j` draws from a ChaCha8 generator seeded with the run seed and
//! switched to stream `(j << 32) | k`, so every sample is fixed by
//! `(seed, j, k)` alone. Batches only contribute integer hit counts, which
//! makes the totals independent of how batches are spread over threads.
//!
//! Intercept events are single-threshold: the eavesdropper wiretaps a
//! signal when its SINR for that signal clears the threshold, whether or not
//! earlier SIC stages succeeded. Imperfect cancellation is already in the
//! SINR's residual terms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_fading, Receiver, SystemParams};
use crate::error::{Error, Result};
use crate::iqi::ReceiverComposites;
use crate::metric::{Metric, User};
use crate::sinr::{sinr_c, sinr_x1, sinr_x2};

pub const BATCH_SIZE: u64 = 65_536;
pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha-0.9";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub metric: Metric,
    pub value: f64,
    /// Binomial standard error, or the rule-of-three bound `3/n` when no
    /// trial (or every trial) hit.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MetricEstimate {
    fn from_count(metric: Metric, hits: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let value = hits as f64 / n;
        let std_error = if hits == 0 || hits == trials {
            3.0 / n
        } else {
            (value * (1.0 - value) / n).sqrt()
        };
        MetricEstimate {
            metric,
            value,
            std_error,
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses every core. Ignored without the
    /// `parallel` feature.
    pub workers: Option<usize>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: DEFAULT_TRIALS,
            seed: 1,
            workers: None,
        }
    }
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// All six estimates from one shared set of fading samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates([MetricEstimate; 6]);

impl Estimates {
    pub fn get(&self, metric: Metric) -> MetricEstimate {
        self.0[metric.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MetricEstimate> {
        self.0.iter()
    }
}

struct EventCounter {
    p: SystemParams,
    near: ReceiverComposites,
    far: ReceiverComposites,
    eve: ReceiverComposites,
}

impl EventCounter {
    fn new(p: &SystemParams) -> Self {
        EventCounter {
            p: *p,
            near: p.composites(Receiver::Near),
            far: p.composites(Receiver::Far),
            eve: p.composites(Receiver::Eve),
        }
    }

    fn batch(&self, seed: u64, stream: u64, len: u64) -> [u64; 6] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (p, t) = (&self.p, &self.p.thresholds);
        let mut hits = [0u64; 6];
        for _ in 0..len {
            let s = sample_fading(p, &mut rng);
            let far_ok = sinr_x2(Receiver::Far, &s, &self.far, p) > t.x2;
            let near_ok = sinr_x2(Receiver::Near, &s, &self.near, p) > t.x2
                && sinr_x1(Receiver::Near, &s, &self.near, p) > t.x1;
            let tag_ok = near_ok && sinr_c(Receiver::Near, &s, &self.near, p) > t.c;
            let events = [
                !far_ok,
                !near_ok,
                !tag_ok,
                sinr_x2(Receiver::Eve, &s, &self.eve, p) > t.eve_far,
                sinr_x1(Receiver::Eve, &s, &self.eve, p) > t.eve_near,
                sinr_c(Receiver::Eve, &s, &self.eve, p) > t.eve_bd,
            ];
            for (h, e) in hits.iter_mut().zip(events) {
                *h += e as u64;
            }
        }
        hits
    }
}

fn add(mut a: [u64; 6], b: [u64; 6]) -> [u64; 6] {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn check(p: &SystemParams, opts: &McOptions) -> Result<()> {
    p.validate()?;
    if opts.trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    if opts.workers == Some(0) {
        return Err(Error::invalid("workers", "need at least one worker"));
    }
    Ok(())
}

fn count(p: &SystemParams, opts: &McOptions, point: u32) -> [u64; 6] {
    let counter = EventCounter::new(p);
    let batches = opts.trials.div_ceil(BATCH_SIZE);
    let run = |k: u64| {
        let len = BATCH_SIZE.min(opts.trials - k * BATCH_SIZE);
        counter.batch(opts.seed, (u64::from(point) << 32) | k, len)
    };
    run_batches(batches, opts.workers, run)
}

#[cfg(feature = "parallel")]
fn run_batches<F>(batches: u64, workers: Option<usize>, run: F) -> [u64; 6]
where
    F: Fn(u64) -> [u64; 6] + Sync,
{
    use rayon::prelude::*;
    let reduce = || {
        (0..batches)
            .into_par_iter()
            .map(&run)
            .reduce(|| [0; 6], add)
    };
    match workers {
        Some(1) => (0..batches).map(&run).fold([0; 6], add),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(reduce),
            Err(_) => reduce(),
        },
        None => reduce(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_batches<F>(batches: u64, _workers: Option<usize>, run: F) -> [u64; 6]
where
    F: Fn(u64) -> [u64; 6],
{
    (0..batches).map(run).fold([0; 6], add)
}

fn estimates(hits: [u64; 6], opts: &McOptions) -> Estimates {
    Estimates(Metric::ALL.map(|m| {
        MetricEstimate::from_count(m, hits[m.index()], opts.trials, opts.seed)
    }))
}

/// Estimates every metric from one run of `opts.trials` fading samples.
pub fn simulate(p: &SystemParams, opts: &McOptions) -> Result<Estimates> {
    check(p, opts)?;
    Ok(estimates(count(p, opts, 0), opts))
}

pub fn estimate(metric: Metric, p: &SystemParams, opts: &McOptions) -> Result<MetricEstimate> {
    Ok(simulate(p, opts)?.get(metric))
}

pub fn estimate_op_far(p: &SystemParams, opts: &McOptions) -> Result<MetricEstimate> {
    estimate(Metric::OpFar, p, opts)
}

pub fn estimate_op_near(p: &SystemParams, opts: &McOptions) -> Result<MetricEstimate> {
    estimate(Metric::OpNear, p, opts)
}

pub fn estimate_op_bd(p: &SystemParams, opts: &McOptions) -> Result<MetricEstimate> {
    estimate(Metric::OpBd, p, opts)
}

pub fn estimate_ip(user: User, p: &SystemParams, opts: &McOptions) -> Result<MetricEstimate> {
    estimate(Metric::intercept(user), p, opts)
}

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    Beta,
    A1,
}

impl SweepAxis {
    pub fn id(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Beta => "beta",
            SweepAxis::A1 => "a1",
        }
    }

    pub fn apply(self, p: &SystemParams, value: f64) -> SystemParams {
        match self {
            SweepAxis::SnrDb => p.with_snr_db(value),
            SweepAxis::Beta => p.with_beta(value),
            SweepAxis::A1 => p.with_a1(value),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_db" | "gamma_db" => Ok(SweepAxis::SnrDb),
            "beta" => Ok(SweepAxis::Beta),
            "a1" => Ok(SweepAxis::A1),
            _ => Err(Error::invalid("axis", format!("unknown axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub params: SystemParams,
    pub estimates: Estimates,
}

/// One [`simulate`] per grid value.
///
/// With `common_random_numbers` every point reuses the fading stream of a
/// single-point run, which smooths the curve; otherwise point `j` gets its
/// own streams.
pub fn sweep(
    p: &SystemParams,
    axis: SweepAxis,
    grid: &[f64],
    opts: &McOptions,
    common_random_numbers: bool,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "sweep grid is empty"));
    }
    if grid.len() > u32::MAX as usize {
        return Err(Error::invalid("grid", "too many grid points"));
    }
    let points: Vec<SystemParams> = grid.iter().map(|&x| axis.apply(p, x)).collect();
    for q in &points {
        check(q, opts)?;
    }
    Ok(grid
        .iter()
        .zip(points)
        .enumerate()
        .map(|(j, (&x, q))| {
            let stream = if common_random_numbers { 0 } else { j as u32 };
            SweepPoint {
                x,
                params: q,
                estimates: estimates(count(&q, opts, stream), opts),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_of_three_at_the_edges() {
        let e = MetricEstimate::from_count(Metric::OpFar, 0, 1000, 7);
        assert_eq!(e.value, 0.0);
        assert_eq!(e.std_error, 0.003);
        let e = MetricEstimate::from_count(Metric::OpFar, 1000, 1000, 7);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.003);
        let e = MetricEstimate::from_count(Metric::OpFar, 250, 1000, 7);
        assert!((e.std_error - (0.25f64 * 0.75 / 1000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn partial_last_batch_counts_every_trial() {
        let p = SystemParams::default();
        let opts = McOptions::new(BATCH_SIZE + 17, 3);
        let e = simulate(&p, &opts).unwrap();
        for m in e.iter() {
            assert_eq!(m.trials, BATCH_SIZE + 17);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let p = SystemParams::default();
        assert!(simulate(&p, &McOptions::new(0, 1)).is_err());
        assert!(simulate(&p, &McOptions::new(10, 1).with_workers(0)).is_err());
        assert!(sweep(&p, SweepAxis::Beta, &[], &McOptions::new(10, 1), false).is_err());
        assert!(sweep(&p, SweepAxis::A1, &[0.1, 0.6], &McOptions::new(10, 1), false).is_err());
    }

    #[test]
    fn axis_ids_parse() {
        for a in [SweepAxis::SnrDb, SweepAxis::Beta, SweepAxis::A1] {
            assert_eq!(a.id().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("lambda".parse::<SweepAxis>().is_err());
    }
}
