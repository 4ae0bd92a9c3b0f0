//! Closed-form optimal values and thresholds for Poisson births with logistic growth.
//!
//! With `c = α(1 - p_d)` and `g` the logistic map, a point of mark `m` is worth
//!
//! * `s_k(m) = max_{0 <= i < k} c^i g^(i)(m)` with `k` epochs to go, and
//! * `s(m) = sup_{i >= 0} c^i g^(i)(m)` over an infinite horizon.
//!
//! The optimal `n`-epoch policy removes every point with mark at least `d_n`, and
//! the optimal stationary policy removes every mark at least `d*`. Values add a
//! birth-stream term `R β |W| Σ_k α^k ∫ s_{n-k} dν` to the per-point sum.
//!
//! Suprema over infinite index sets are evaluated by enumeration with a certified
//! stop: every term from index `i` on is bounded by `K c^i` (times a constant for
//! the thresholds), so enumeration ends once that envelope falls strictly below
//! the running maximum. Ties go to the smallest index.

use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::integrate::{law_expectation_vec, mark_samples, mean_and_se, IntegrationSpec};
use crate::model::ModelParams;
use crate::pattern::Pattern;

/// Hard cap on enumerated terms; the certified stop fires long before for valid parameters.
pub const ENUMERATION_CAP: u32 = 10_000;

/// A maximum together with the (smallest) index attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attained {
    pub value: f64,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueMethod {
    ClosedForm,
    MonteCarloIntegral { samples: usize, seed: u64 },
}

impl From<IntegrationSpec> for ValueMethod {
    fn from(spec: IntegrationSpec) -> Self {
        match spec {
            IntegrationSpec::Quadrature { .. } => ValueMethod::ClosedForm,
            IntegrationSpec::MonteCarlo { samples, seed } => ValueMethod::MonteCarloIntegral { samples, seed },
        }
    }
}

/// A value split into the contribution of the points present now and of all future births.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueReport {
    pub total: f64,
    pub initial_generation_term: f64,
    pub birth_stream_term: f64,
    pub method: ValueMethod,
    /// Standard error of the birth-stream term; zero under quadrature.
    pub integral_std_error: f64,
}

impl ValueReport {
    fn new(initial: f64, birth: f64, method: ValueMethod, se: f64) -> Self {
        Self {
            total: initial + birth,
            initial_generation_term: initial,
            birth_stream_term: birth,
            method,
            integral_std_error: se,
        }
    }
}

fn check_mark(m: f64, p: &ModelParams) -> Result<()> {
    if m >= 0.0 && m <= p.k {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "mark",
            value: m,
            lo: 0.0,
            hi: p.k,
        })
    }
}

/// Running maxima of `c^i g^(i)(m) - penalty · Σ_{j<i} c^j` for `i = 0..count`.
///
/// Entry `n - 1` is the `n`-epoch value `max_{i < n}` of the terms.
pub(crate) fn penalized_prefix_max(gf: &GrowthFunction, m: f64, c: f64, penalty: f64, count: usize) -> Result<Vec<Attained>> {
    let mut out = Vec::with_capacity(count);
    let mut best = Attained {
        value: f64::NEG_INFINITY,
        index: 0,
    };
    let mut geometric = 0.0;
    for (i, g) in gf.orbit(m)?.take(count).enumerate() {
        let i = i as u32;
        let term = c.powi(i as i32) * g - penalty * geometric;
        if term > best.value {
            best = Attained { value: term, index: i };
        }
        out.push(best);
        geometric += c.powi(i as i32);
    }
    Ok(out)
}

/// Certified supremum over `i >= 0` of `c^i g^(i)(m) - penalty · Σ_{j<i} c^j`.
pub(crate) fn penalized_sup(gf: &GrowthFunction, m: f64, c: f64, penalty: f64) -> Result<Attained> {
    let k = gf.cap();
    let mut best = Attained { value: m, index: 0 };
    if m == 0.0 {
        // Every later term is at most c^i · 0 minus a nonnegative penalty.
        return Ok(best);
    }
    let mut geometric = 0.0;
    for (i, g) in gf.orbit(m)?.enumerate().take(ENUMERATION_CAP as usize + 1) {
        let i = i as u32;
        let disc = c.powi(i as i32);
        if i > 0 {
            if k * disc < best.value {
                return Ok(best);
            }
            let term = disc * g - penalty * geometric;
            if term > best.value {
                best = Attained { value: term, index: i };
            }
        }
        geometric += disc;
    }
    Err(Error::Enumeration { cap: ENUMERATION_CAP })
}

/// `s_k(m)`, the best discounted harvest of a single mark-`m` point with `k >= 1` epochs left.
pub fn s_k(m: f64, k: u32, p: &ModelParams) -> Result<Attained> {
    check_mark(m, p)?;
    if k == 0 {
        return Err(Error::Parameter {
            key: "k",
            msg: "horizon must be at least 1".into(),
        });
    }
    let seq = penalized_prefix_max(&p.logistic_growth(), m, p.survival_discount(), 0.0, k as usize)?;
    Ok(seq[k as usize - 1])
}

/// `s_1(m), ..., s_count(m)` in one pass.
pub fn s_sequence(m: f64, count: usize, p: &ModelParams) -> Result<Vec<f64>> {
    check_mark(m, p)?;
    Ok(penalized_prefix_max(&p.logistic_growth(), m, p.survival_discount(), 0.0, count)?
        .into_iter()
        .map(|a| a.value)
        .collect())
}

/// `s(m) = sup_i c^i g^(i)(m)` and the epoch at which harvesting the point is optimal.
pub fn s_inf(m: f64, p: &ModelParams) -> Result<Attained> {
    check_mark(m, p)?;
    penalized_sup(&p.logistic_growth(), m, p.survival_discount(), 0.0)
}

fn threshold_term(n: u32, p: &ModelParams) -> f64 {
    let nl = n as f64 * p.lambda;
    let c = p.survival_discount().powi(n as i32);
    p.k * (c - (-nl).exp()) / -(-nl).exp_m1()
}

/// `d_n = max{0, K (c^j - e^{-jλ}) / (1 - e^{-jλ}) : 1 <= j < n}`; `d_1 = 0`.
pub fn d_n(n: u32, p: &ModelParams) -> f64 {
    (1..n).map(|j| threshold_term(j, p)).fold(0.0, f64::max)
}

/// `d*`, the supremum over `n >= 1` of the threshold terms floored at 0.
///
/// `index` is the attaining `n`, or 0 when the floor is the maximum.
pub fn d_star(p: &ModelParams) -> Result<Attained> {
    let c = p.survival_discount();
    let e = (-p.lambda).exp();
    let mut best = Attained { value: 0.0, index: 0 };
    if c <= e {
        // c^n <= e^{-nλ} for every n, so all terms are nonpositive.
        return Ok(best);
    }
    let scale = p.k / -(-p.lambda).exp_m1();
    for n in 1..=ENUMERATION_CAP {
        if scale * c.powi(n as i32) < best.value {
            return Ok(best);
        }
        let t = threshold_term(n, p);
        if t > best.value {
            best = Attained { value: t, index: n };
        }
    }
    Err(Error::Enumeration { cap: ENUMERATION_CAP })
}

/// Optimal `n`-epoch value. Birth integrals follow `integ`.
pub fn v_n_poisson(x: &Pattern, n: u32, p: &ModelParams, integ: IntegrationSpec) -> Result<ValueReport> {
    if n == 0 {
        return Err(Error::Parameter {
            key: "n",
            msg: "horizon must be at least 1".into(),
        });
    }
    let n = n as usize;
    let mut initial = 0.0;
    for pt in x {
        initial += s_sequence(pt.mark, n, p)?[n - 1];
    }
    let initial = p.r * initial;
    let scale = p.r * p.birth_mass();
    // weights[k] = α^k for k = 1..n-1, paired with s_{n-k}.
    let combine = |seq: &[f64]| -> f64 { (1..n).map(|k| p.alpha.powi(k as i32) * seq[n - k - 1]).sum() };

    if n == 1 {
        return Ok(ValueReport::new(initial, 0.0, integ.into(), 0.0));
    }
    match integ {
        IntegrationSpec::Quadrature { rel_tol } => {
            let mut failure = None;
            let integrals = law_expectation_vec(&p.mark_law, p.k, n - 1, rel_tol, |m, out| match s_sequence(m, n - 1, p) {
                Ok(seq) => out.copy_from_slice(&seq),
                Err(e) => failure = Some(e),
            });
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(ValueReport::new(initial, scale * combine(&integrals), integ.into(), 0.0))
        }
        IntegrationSpec::MonteCarlo { samples, seed } => {
            let values = mark_samples(&p.mark_law, p.k, samples, seed)
                .into_iter()
                .map(|l| s_sequence(l, n - 1, p).map(|seq| combine(&seq)))
                .collect::<Result<Vec<_>>>()?;
            let (mean, se) = mean_and_se(&values);
            Ok(ValueReport::new(initial, scale * mean, integ.into(), scale * se))
        }
    }
}

/// Optimal discounted value `v*(x) = R Σ s(m) + R β |W| α/(1-α) ∫ s dν`.
pub fn v_star_poisson(x: &Pattern, p: &ModelParams, integ: IntegrationSpec) -> Result<ValueReport> {
    let mut initial = 0.0;
    for pt in x {
        initial += s_inf(pt.mark, p)?.value;
    }
    let initial = p.r * initial;
    let scale = p.r * p.birth_mass() * p.alpha / (1.0 - p.alpha);
    match integ {
        IntegrationSpec::Quadrature { rel_tol } => {
            let mut failure = None;
            let integral = law_expectation_vec(&p.mark_law, p.k, 1, rel_tol, |m, out| match s_inf(m, p) {
                Ok(a) => out[0] = a.value,
                Err(e) => failure = Some(e),
            });
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(ValueReport::new(initial, scale * integral[0], integ.into(), 0.0))
        }
        IntegrationSpec::MonteCarlo { samples, seed } => {
            let values = mark_samples(&p.mark_law, p.k, samples, seed)
                .into_iter()
                .map(|l| s_inf(l, p).map(|a| a.value))
                .collect::<Result<Vec<_>>>()?;
            let (mean, se) = mean_and_se(&values);
            Ok(ValueReport::new(initial, scale * mean, integ.into(), scale * se))
        }
    }
}

/// Upper bound on the discounted value of any policy from `x`.
pub fn lemma1_bound(x: &Pattern, p: &ModelParams) -> f64 {
    let c = p.survival_discount();
    let points = p.r * p.k * x.len() as f64 / (1.0 - c);
    let births = p.r * p.k * p.birth_mass() / p.p_d * p.alpha / (1.0 - p.alpha);
    points + births
}

/// Upper bound on the expected discounted reward earned strictly after epoch `t`.
pub fn tail_bound(x: &Pattern, t: u32, p: &ModelParams) -> f64 {
    let c = p.survival_discount();
    let e = (t + 1) as i32;
    let points = p.r * p.k * x.len() as f64 * c.powi(e) / (1.0 - c);
    let births = p.r * p.k * p.birth_mass() / p.p_d * p.alpha.powi(e) / (1.0 - p.alpha);
    points + births
}
