//! WebAssembly entry points for the static page in `www/`.
//!
//! Every function is plain Rust as well, so the same code is tested natively.

use mpp_thinning::analytic_hardcore::bounds_curve;
use mpp_thinning::analytic_poisson::{d_star, lemma1_bound, s_inf, v_star_poisson};
use mpp_thinning::dynamics::{calibrate_activity, sample_hardcore_gibbs, Kernel};
use mpp_thinning::integrate::IntegrationSpec;
use mpp_thinning::simulate::{default_horizon, estimate_value, SimConfig};
use mpp_thinning::{ModelParams, Pattern, PolicySpec, RngStream};
use wasm_bindgen::prelude::*;

const GIBBS_SWEEPS: usize = 300;

fn model(k: f64, lambda: f64, p_d: f64, alpha: f64, beta: f64) -> Result<ModelParams, String> {
    let p = ModelParams {
        k,
        lambda,
        p_d,
        alpha,
        beta,
        ..ModelParams::reference()
    };
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct ThresholdCurve {
    pub marks: Vec<f64>,
    /// `s(m)`, the best discounted size reachable from mark `m`.
    pub values: Vec<f64>,
    pub d_star: f64,
    pub d_star_index: u32,
}

/// `s(m)` on `points` evenly spaced marks in `[0, K]`, with the optimal threshold.
#[wasm_bindgen(js_name = thresholdCurve)]
pub fn threshold_curve(k: f64, lambda: f64, p_d: f64, alpha: f64, points: usize) -> Result<ThresholdCurve, String> {
    let p = model(k, lambda, p_d, alpha, 1.0)?;
    let points = points.clamp(2, 10_000);
    let marks: Vec<f64> = (0..points).map(|i| k * i as f64 / (points - 1) as f64).collect();
    let values = marks
        .iter()
        .map(|&m| s_inf(m, &p).map(|a| a.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let d = d_star(&p).map_err(|e| e.to_string())?;
    Ok(ThresholdCurve {
        marks,
        values,
        d_star: d.value,
        d_star_index: d.index,
    })
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct HardcoreBounds {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub marks: Vec<f64>,
    pub activity: f64,
    /// `ṽ_n` for `n = 1..=n_max`.
    pub lower: Vec<f64>,
    /// `v̂_n` for `n = 1..=n_max`.
    pub upper: Vec<f64>,
}

/// A hard-core initial pattern at the given intensity and its bound curves.
#[wasm_bindgen(js_name = hardcoreBounds)]
pub fn hardcore_bounds(intensity: f64, n_max: u32, seed: u64) -> Result<HardcoreBounds, String> {
    let p = ModelParams::reference().with_beta(intensity);
    p.validate().map_err(|e| e.to_string())?;
    if !(intensity > 0.0) {
        return Err("intensity must be positive".into());
    }
    let stream = RngStream::new(seed, 0);
    let activity = calibrate_activity(p.window, intensity, p.k, stream).map_err(|e| e.to_string())?;
    let x = sample_hardcore_gibbs(p.window, activity, p.k, GIBBS_SWEEPS, &p.mark_law, p.k, stream)
        .map_err(|e| e.to_string())?
        .pattern;
    let curve = bounds_curve(&x, n_max.clamp(1, 500), &p, &p.logistic_growth(), IntegrationSpec::monte_carlo(seed))
        .map_err(|e| e.to_string())?;
    Ok(HardcoreBounds {
        xs: x.iter().map(|q| q.location.x).collect(),
        ys: x.iter().map(|q| q.location.y).collect(),
        marks: x.marks().collect(),
        activity,
        lower: curve.lower,
        upper: curve.upper,
    })
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct PolicyEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub horizon: u32,
    pub truncation_bound: f64,
    /// Closed-form optimum from the empty pattern.
    pub optimum: f64,
    pub lemma1_bound: f64,
    /// Mean undiscounted harvest per epoch.
    pub per_epoch: Vec<f64>,
}

/// Monte Carlo value of a policy from the empty pattern under Poisson births.
#[wasm_bindgen(js_name = simulatePolicy)]
pub fn simulate_policy(spec: &str, beta: f64, replications: u32, seed: u64) -> Result<PolicyEstimate, String> {
    let p = ModelParams::reference().with_beta(beta);
    p.validate().map_err(|e| e.to_string())?;
    let spec: PolicySpec = spec.parse().map_err(|e: mpp_thinning::Error| e.to_string())?;
    let x = Pattern::empty();
    let horizon = default_horizon(&x, &p);
    let kernel = Kernel::poisson(p).map_err(|e| e.to_string())?;
    let policy = spec.build(&p, &kernel.growth, horizon).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(kernel, policy, x.clone(), horizon, replications.clamp(2, 100_000), seed).with_label(spec.to_string());
    let r = estimate_value(&cfg).map_err(|e| e.to_string())?;
    let optimum = v_star_poisson(&x, &p, IntegrationSpec::default()).map_err(|e| e.to_string())?.total;
    Ok(PolicyEstimate {
        mean: r.mean,
        std_error: r.std_error,
        horizon: r.horizon,
        truncation_bound: r.truncation_bound,
        optimum,
        lemma1_bound: lemma1_bound(&x, &p),
        per_epoch: r.per_epoch_means,
    })
}
