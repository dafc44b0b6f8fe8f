//! Closed forms against probabilities obtained by integrating the SINR
//! events directly over the joint fading density (adaptive quadrature in
//! double precision, independent of this crate's special functions).

use ambc_core::analytic::{evaluate, AnalyticOptions};
use ambc_core::{IqiProfile, Metric, MismatchParams, SystemParams};

struct Case {
    snr_db: f64,
    eps: f64,
    phi_deg: f64,
    beta: f64,
    a1: f64,
    /// op_far, op_near, op_bd, ip_far, ip_near, ip_bd
    expected: [f64; 6],
}

const CASES: &[Case] = &[
    Case { snr_db: 20.0, eps: 1.0, phi_deg: 0.0, beta: 0.1, a1: 0.1,
        expected: [0.126156660239, 0.189297533465, 0.890326385028, 0.984430314729, 0.903034938811, 1.47247978652e-05] },
    Case { snr_db: 10.0, eps: 1.0, phi_deg: 0.0, beta: 0.1, a1: 0.1,
        expected: [0.716304603662, 0.865991783603, 0.999946402327, 0.857140264769, 0.367146607806, 6.08026128994e-17] },
    Case { snr_db: 30.0, eps: 1.1, phi_deg: 5.0, beta: 0.1, a1: 0.1,
        expected: [0.0234649777968, 0.0433255352705, 0.839773550499, 0.998195926607, 0.986335585393, 0.00347214109945] },
    Case { snr_db: 20.0, eps: 1.1, phi_deg: 5.0, beta: 0.3, a1: 0.15,
        expected: [0.214647893938, 0.210081979893, 0.665259897402, 0.97961329745, 0.919526353618, 0.0193617656979] },
    Case { snr_db: 40.0, eps: 1.05, phi_deg: 20.0, beta: 0.1, a1: 0.1,
        expected: [0.0138018676694, 1.0, 1.0, 0.999427421468, 0.990633559017, 0.00296535586284] },
    Case { snr_db: 25.0, eps: 1.1, phi_deg: 5.0, beta: 0.1, a1: 0.1,
        expected: [0.04750371454, 0.0970440057178, 0.899030324968, 0.99513108696, 0.96347538589, 0.000447363201917] },
    Case { snr_db: 5.0, eps: 1.1, phi_deg: 5.0, beta: 0.5, a1: 0.1,
        expected: [0.979206555395, 0.999842002242, 0.999997944581, 0.631797835806, 0.0303209208065, 1.4837804509e-05] },
    Case { snr_db: 50.0, eps: 1.0, phi_deg: 0.0, beta: 0.1, a1: 0.1,
        expected: [0.00992953786971, 0.0100037903699, 0.0221367316263, 0.999677117101, 0.997908156575, 0.873741769893] },
    Case { snr_db: 60.0, eps: 1.1, phi_deg: 5.0, beta: 0.1, a1: 0.1,
        expected: [0.0121547948696, 0.0174388384039, 0.790125130205, 0.999615108, 0.997079705208, 0.0174873454367] },
    Case { snr_db: 45.0, eps: 1.1, phi_deg: 5.0, beta: 0.2, a1: 0.1,
        expected: [0.0457830043388, 0.0642754447869, 0.587523753094, 0.998424730064, 0.988220046289, 0.0623769814498] },
    Case { snr_db: 0.0, eps: 1.1, phi_deg: 5.0, beta: 0.1, a1: 0.1,
        expected: [0.999990258744, 0.999999999998, 1.0, 0.241100286466, 1.94468890395e-05, 8.47911707974e-52] },
];

#[test]
fn closed_forms_match_direct_integration() {
    let opts = AnalyticOptions::default();
    let mut failures = Vec::new();
    for case in CASES {
        let m = MismatchParams::from_degrees(case.eps, case.phi_deg).unwrap();
        let p = SystemParams::default()
            .with_snr_db(case.snr_db)
            .with_beta(case.beta)
            .with_a1(case.a1)
            .with_iqi(IqiProfile::uniform(m));
        for (metric, want) in Metric::ALL.into_iter().zip(case.expected) {
            let got = evaluate(metric, &p, &opts).unwrap().probability;
            let tol = 1e-8_f64.max(1e-7 * want);
            if (got - want).abs() > tol {
                failures.push(format!(
                    "{metric} at {} dB, eps {}, phi {}, beta {}, a1 {}: got {got:e}, want {want:e}",
                    case.snr_db, case.eps, case.phi_deg, case.beta, case.a1
                ));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
