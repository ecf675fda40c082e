//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string so the page can stay plain JavaScript.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;
use weylroof::weyl::{depolarizing_max, weyl_kraus_weights};
use weylroof::{
    chi_dep_closed_form, choi, compose, depolarizing, estimate_chi, lambda_for_params, phase_damping, qc_channel,
    verify_bound, weyl_channel, BoundConfig, ChoiMatrix, OptimizerConfig, WeylParams,
};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Kraus weights and decomposition residuals of the Weyl channel `(d, r, p)`.
pub fn channel_summary_json(d: usize, r: f64, p: f64) -> weylroof::Result<String> {
    let params = WeylParams::new(d, r, p)?;
    let ch = weyl_channel(&params)?;
    let target = choi(&ch);
    let q = params.depolarizing_parameter();
    let lambda = lambda_for_params(&params).ok();
    let residuals = match lambda {
        Some(l) => {
            let dep = depolarizing(d, q)?;
            let mix = ChoiMatrix::combination(&[(l, &choi(&dep)), (1.0 - l, &choi(&qc_channel(d, q)?))]);
            let chain = compose(&phase_damping(d, l)?, &dep)?;
            Some((target.distance(&mix), target.distance(&choi(&chain))))
        }
        None => None,
    };
    let weights: Vec<_> = weyl_kraus_weights(&params)
        .into_iter()
        .map(|(m, n, w)| json!({"m": m, "n": n, "weight": w}))
        .collect();
    Ok(json!({
        "d": d,
        "weights": weights,
        "qDep": q,
        "lambda": lambda,
        "tpDefect": ch.tp_defect(),
        "choiMinEigenvalue": target.min_eigenvalue(),
        "mixtureResidual": residuals.map(|r| r.0),
        "compositionResidual": residuals.map(|r| r.1),
    })
    .to_string())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ChiCurve {
    q: Vec<f64>,
    closed_form: Vec<f64>,
    numeric: Vec<f64>,
}

/// Holevo quantity of the depolarizing channel over `points` values of q,
/// closed form next to the numerical estimate.
pub fn chi_curve_json(d: usize, points: usize, restarts: usize, seed: u64) -> weylroof::Result<String> {
    let qmax = depolarizing_max(d);
    let cfg = OptimizerConfig::default().with_restarts(restarts).with_seed(seed);
    let mut curve = ChiCurve {
        q: Vec::new(),
        closed_form: Vec::new(),
        numeric: Vec::new(),
    };
    for i in 0..points.max(2) {
        let q = qmax * i as f64 / (points.max(2) - 1) as f64;
        curve.q.push(q);
        curve.closed_form.push(chi_dep_closed_form(d, q)?);
        curve.numeric.push(estimate_chi(&depolarizing(d, q)?, &cfg)?.value);
    }
    Ok(serde_json::to_string(&curve).expect("plain data serializes"))
}

/// Left- and right-hand sides of the MUB entropy bound on random states.
pub fn bound_scatter_json(d: usize, q: f64, dim_k: usize, samples: usize, seed: u64) -> weylroof::Result<String> {
    let report = verify_bound(&BoundConfig::new(d, q, dim_k, samples, seed))?;
    Ok(json!({
        "samples": report.samples,
        "minGap": report.min_gap,
        "violations": report.violations,
    })
    .to_string())
}

#[wasm_bindgen(js_name = channelSummary)]
pub fn channel_summary(d: usize, r: f64, p: f64) -> Result<String, JsError> {
    channel_summary_json(d, r, p).map_err(js_err)
}

#[wasm_bindgen(js_name = chiCurve)]
pub fn chi_curve(d: usize, points: usize, restarts: usize, seed: u32) -> Result<String, JsError> {
    chi_curve_json(d, points, restarts, seed.into()).map_err(js_err)
}

#[wasm_bindgen(js_name = boundScatter)]
pub fn bound_scatter(d: usize, q: f64, dim_k: usize, samples: usize, seed: u32) -> Result<String, JsError> {
    bound_scatter_json(d, q, dim_k, samples, seed.into()).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn summary_of_worked_point() {
        let v = parse(channel_summary_json(2, 0.25, 0.125).unwrap());
        assert_eq!(v["lambda"], 0.5);
        assert_eq!(v["weights"].as_array().unwrap().len(), 4);
        assert!(v["mixtureResidual"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn summary_outside_regime() {
        let v = parse(channel_summary_json(3, 0.01, 0.05).unwrap());
        assert!(v["lambda"].is_null());
        assert!(v["compositionResidual"].is_null());
        assert!(channel_summary_json(2, 0.9, 0.4).is_err());
    }

    #[test]
    fn chi_curve_tracks_closed_form() {
        let v = parse(chi_curve_json(2, 5, 2, 1).unwrap());
        let closed = v["closedForm"].as_array().unwrap();
        let numeric = v["numeric"].as_array().unwrap();
        assert_eq!(closed.len(), 5);
        for (a, b) in closed.iter().zip(numeric) {
            assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn scatter_has_no_violations() {
        let v = parse(bound_scatter_json(3, 0.5, 2, 20, 4).unwrap());
        assert_eq!(v["samples"].as_array().unwrap().len(), 20);
        assert_eq!(v["violations"], 0);
        assert!(bound_scatter_json(4, 0.5, 2, 1, 0).is_err());
    }
}
