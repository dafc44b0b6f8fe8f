//! Browser bindings: each export takes plain numbers and returns a JSON
//! string the page plots directly.

use ambc_core::analytic::{evaluate, outage_floor, AnalyticOptions};
use ambc_core::config::range_grid;
use ambc_core::monte_carlo::{simulate, McOptions};
use ambc_core::{IqiProfile, Metric, MismatchParams, SystemParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Series {
    metric: &'static str,
    case: &'static str,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct Curves {
    axis: &'static str,
    x: Vec<f64>,
    series: Vec<Series>,
    /// High-SNR outage floors per case, `[op_far, op_near, op_bd]`.
    floors: Vec<(&'static str, [f64; 3])>,
}

#[derive(Serialize)]
struct PointEstimate {
    metric: &'static str,
    analytic: f64,
    mc: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct McPoint {
    trials: u64,
    seed: u64,
    estimates: Vec<PointEstimate>,
}

fn cases(amplitude: f64, phase_deg: f64) -> Result<[(&'static str, IqiProfile); 2], String> {
    let m = MismatchParams::from_degrees(amplitude, phase_deg).map_err(|e| e.to_string())?;
    Ok([("ideal", IqiProfile::IDEAL), ("iqi", IqiProfile::uniform(m))])
}

fn base(beta: f64, a1: f64) -> Result<SystemParams, String> {
    let p = SystemParams::default().with_beta(beta).with_a1(a1);
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

fn curves(
    axis: &'static str,
    x: Vec<f64>,
    amplitude: f64,
    phase_deg: f64,
    at: impl Fn(f64) -> SystemParams,
) -> Result<String, String> {
    if x.is_empty() || x.len() > 2_000 {
        return Err("grid must have between 1 and 2000 points".into());
    }
    let opts = AnalyticOptions::default();
    let mut series = Vec::new();
    let mut floors = Vec::new();
    for (case, prof) in cases(amplitude, phase_deg)? {
        for m in Metric::ALL {
            let values = x
                .iter()
                .map(|&v| {
                    let p = at(v).with_iqi(prof);
                    evaluate(m, &p, &opts).map(|a| a.probability)
                })
                .collect::<ambc_core::Result<Vec<f64>>>()
                .map_err(|e| e.to_string())?;
            series.push(Series {
                metric: m.id(),
                case,
                values,
            });
        }
        let p = at(x[0]).with_iqi(prof);
        let mut f = [0.0; 3];
        for (slot, m) in f.iter_mut().zip([Metric::OpFar, Metric::OpNear, Metric::OpBd]) {
            *slot = outage_floor(m, &p)
                .map_err(|e| e.to_string())?
                .map_or(f64::NAN, |v| v.probability);
        }
        floors.push((case, f));
    }
    serde_json::to_string(&Curves {
        axis,
        x,
        series,
        floors,
    })
    .map_err(|e| e.to_string())
}

/// Closed-form curves over SNR in dB, ideal and with the given imbalance.
pub fn snr_curves_json(
    lo_db: f64,
    hi_db: f64,
    step_db: f64,
    beta: f64,
    a1: f64,
    amplitude: f64,
    phase_deg: f64,
) -> Result<String, String> {
    if !(step_db > 0.0 && hi_db >= lo_db) {
        return Err("need step > 0 and hi >= lo".into());
    }
    let p = base(beta, a1)?;
    curves("snr_db", range_grid(lo_db, hi_db, step_db), amplitude, phase_deg, |x| {
        p.with_snr_db(x)
    })
}

/// Closed-form curves over β ∈ {0.02, 0.04, …, 0.2}.
pub fn beta_curves_json(snr_db: f64, a1: f64, amplitude: f64, phase_deg: f64) -> Result<String, String> {
    let p = base(0.1, a1)?.with_snr_db(snr_db);
    curves("beta", range_grid(0.02, 0.2, 0.02), amplitude, phase_deg, |x| {
        p.with_beta(x)
    })
}

/// Monte Carlo estimates at one point, next to the closed forms.
pub fn monte_carlo_json(
    snr_db: f64,
    beta: f64,
    a1: f64,
    amplitude: f64,
    phase_deg: f64,
    trials: u32,
    seed: u32,
) -> Result<String, String> {
    let m = MismatchParams::from_degrees(amplitude, phase_deg).map_err(|e| e.to_string())?;
    let p = base(beta, a1)?
        .with_snr_db(snr_db)
        .with_iqi(IqiProfile::uniform(m));
    let opts = McOptions::new(u64::from(trials), u64::from(seed));
    let est = simulate(&p, &opts).map_err(|e| e.to_string())?;
    let analytic = AnalyticOptions::default();
    let estimates = Metric::ALL
        .into_iter()
        .map(|metric| {
            let e = est.get(metric);
            Ok(PointEstimate {
                metric: metric.id(),
                analytic: evaluate(metric, &p, &analytic)?.probability,
                mc: e.value,
                std_error: e.std_error,
            })
        })
        .collect::<ambc_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&McPoint {
        trials: opts.trials,
        seed: opts.seed,
        estimates,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = snrCurves)]
pub fn snr_curves(
    lo_db: f64,
    hi_db: f64,
    step_db: f64,
    beta: f64,
    a1: f64,
    amplitude: f64,
    phase_deg: f64,
) -> Result<String, JsError> {
    snr_curves_json(lo_db, hi_db, step_db, beta, a1, amplitude, phase_deg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = betaCurves)]
pub fn beta_curves(snr_db: f64, a1: f64, amplitude: f64, phase_deg: f64) -> Result<String, JsError> {
    beta_curves_json(snr_db, a1, amplitude, phase_deg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = monteCarlo)]
pub fn monte_carlo(
    snr_db: f64,
    beta: f64,
    a1: f64,
    amplitude: f64,
    phase_deg: f64,
    trials: u32,
    seed: u32,
) -> Result<String, JsError> {
    monte_carlo_json(snr_db, beta, a1, amplitude, phase_deg, trials, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn snr_curves_shape() {
        let v: Value = serde_json::from_str(&snr_curves_json(0.0, 40.0, 10.0, 0.1, 0.1, 1.05, 20.0).unwrap()).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 5);
        let series = v["series"].as_array().unwrap();
        assert_eq!(series.len(), 12);
        for s in series {
            for p in s["values"].as_array().unwrap() {
                let p = p.as_f64().unwrap();
                assert!((0.0..=1.0).contains(&p));
            }
        }
        let ideal_far = v["floors"][0][1][0].as_f64().unwrap();
        assert!((ideal_far - 0.00980577).abs() < 1e-7);
    }

    #[test]
    fn beta_curves_cover_ten_points() {
        let v: Value = serde_json::from_str(&beta_curves_json(25.0, 0.1, 1.1, 5.0).unwrap()).unwrap();
        assert_eq!(v["axis"], "beta");
        assert_eq!(v["x"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn monte_carlo_point_agrees() {
        let v: Value = serde_json::from_str(&monte_carlo_json(20.0, 0.1, 0.1, 1.1, 5.0, 50_000, 3).unwrap()).unwrap();
        for e in v["estimates"].as_array().unwrap() {
            let (a, m, s) = (e["analytic"].as_f64().unwrap(), e["mc"].as_f64().unwrap(), e["std_error"].as_f64().unwrap());
            assert!((a - m).abs() <= (4.0 * s).max(1e-3), "{e}");
        }
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(snr_curves_json(0.0, 10.0, 0.0, 0.1, 0.1, 1.0, 0.0).is_err());
        assert!(beta_curves_json(25.0, 0.7, 1.0, 0.0).is_err());
        assert!(monte_carlo_json(10.0, 0.1, 0.1, -1.0, 0.0, 100, 1).is_err());
        assert!(monte_carlo_json(10.0, 0.1, 0.1, 1.0, 0.0, 0, 1).is_err());
    }
}
