//! Monte Carlo evaluation of thinning policies.
//!
//! Epoch `i` of replication `rep` draws its transition from stream
//! `rep·T + i` of the base seed and any policy randomness from the same index
//! with the top bit set, so the two never share draws.

use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::analytic_poisson::{lemma1_bound, tail_bound};
use crate::dynamics::Kernel;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pattern::{reward, Pattern};
use crate::policy::Policy;
use crate::rng::RngStream;

const POLICY_STREAM_BIT: u64 = 1 << 63;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub horizon: u32,
    pub replications: u32,
    pub base_seed: u64,
    pub kernel: Kernel,
    pub policy: Policy,
    pub initial: Pattern,
    /// Name written in the `policy` column of result CSVs.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub policy: String,
    pub mean: f64,
    pub std_error: f64,
    pub replications: u32,
    pub horizon: u32,
    pub truncation_bound: f64,
    /// Undiscounted mean reward at each epoch.
    pub per_epoch_means: Vec<f64>,
}

impl SimResult {
    pub const CSV_HEADER: &'static str = "policy,mean,std_error,replications,horizon,truncation_bound";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{},{},{:?}",
            self.policy, self.mean, self.std_error, self.replications, self.horizon, self.truncation_bound
        )
    }

    pub fn write_csv<W: Write>(results: &[SimResult], mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in results {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub n: u32,
    pub mean: f64,
    pub std_error: f64,
}

impl SimConfig {
    pub fn new(kernel: Kernel, policy: Policy, initial: Pattern, horizon: u32, replications: u32, base_seed: u64) -> Self {
        let label = format!("{policy:?}");
        Self {
            horizon,
            replications,
            base_seed,
            kernel,
            policy,
            initial,
            label,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.kernel.params
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Parameter {
                key: "horizon",
                msg: "must be at least 1".into(),
            });
        }
        let p = self.params();
        self.initial.validate(&p.window, p.k)?;
        if let Some(hc) = self.kernel.hardcore_distance() {
            crate::pattern::check_hardcore(&self.initial, hc)?;
        }
        Ok(())
    }
}

/// Smallest `T` whose omitted tail (epochs `T` onwards) is below `1e-3` of the
/// crude value bound `lemma1_bound`.
pub fn default_horizon(x: &Pattern, p: &ModelParams) -> u32 {
    let target = 1e-3 * lemma1_bound(x, p);
    if target <= 0.0 {
        return 1;
    }
    (1..=100_000u32)
        .find(|&t| tail_bound(x, t - 1, p) < target)
        .unwrap_or(100_000)
}

/// Expected reward omitted by stopping after `horizon` epochs.
pub fn truncation_bound(x: &Pattern, horizon: u32, p: &ModelParams) -> f64 {
    tail_bound(x, horizon.saturating_sub(1), p)
}

/// Undiscounted reward earned at each of the first `epochs` epochs of one replication.
fn epoch_rewards(cfg: &SimConfig, rep_id: u32, epochs: u32) -> Result<Vec<f64>> {
    let t = cfg.horizon as u64;
    let r = cfg.params().r;
    let mut x = cfg.initial.clone();
    let mut out = Vec::with_capacity(epochs as usize);
    for i in 0..epochs {
        let idx = (rep_id as u64).wrapping_mul(t).wrapping_add(i as u64);
        let mut policy_rng = RngStream::new(cfg.base_seed, idx | POLICY_STREAM_BIT).rng();
        let action = cfg.policy.decide(&x, epochs - i, &mut policy_rng)?;
        out.push(reward(&x, &action, r)?);
        if i + 1 < epochs {
            let kept = action.apply(&x)?;
            x = cfg.kernel.step(&kept, &mut RngStream::new(cfg.base_seed, idx).rng())?;
        }
    }
    Ok(out)
}

fn discounted(rewards: &[f64], alpha: f64) -> f64 {
    let mut w = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += w * r;
        w *= alpha;
    }
    total
}

/// Realised discounted reward of replication `rep_id`.
pub fn run_trajectory(cfg: &SimConfig, rep_id: u32) -> Result<f64> {
    cfg.validate()?;
    Ok(discounted(&epoch_rewards(cfg, rep_id, cfg.horizon)?, cfg.params().alpha))
}

fn map_reps<T: Send, F>(reps: u32, f: F) -> Result<Vec<T>>
where
    F: Fn(u32) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..reps).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(f).collect()
    }
}

/// Neumaier-compensated sum, accumulated in slice order.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    if let Some(&first) = values.first() {
        if values.iter().all(|&v| v == first) {
            return (first, 0.0);
        }
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

pub fn estimate_value(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if cfg.replications < 2 {
        return Err(Error::Parameter {
            key: "replications",
            msg: "at least two replications are needed for a standard error".into(),
        });
    }
    let alpha = cfg.params().alpha;
    let runs = map_reps(cfg.replications, |rep| epoch_rewards(cfg, rep, cfg.horizon))?;
    let totals: Vec<f64> = runs.iter().map(|r| discounted(r, alpha)).collect();
    let (mean, std_error) = mean_se(&totals);
    let per_epoch_means = (0..cfg.horizon as usize)
        .map(|i| compensated_sum(runs.iter().map(|r| r[i])) / runs.len() as f64)
        .collect();
    Ok(SimResult {
        policy: cfg.label.clone(),
        mean,
        std_error,
        replications: cfg.replications,
        horizon: cfg.horizon,
        truncation_bound: truncation_bound(&cfg.initial, cfg.horizon, cfg.params()),
        per_epoch_means,
    })
}

/// Estimated `n`-horizon discounted reward for `n = 1..=n_max`.
///
/// Stationary policies use prefix sums of the same `n_max`-epoch trajectories.
/// Horizon-dependent policies act differently for each `n`, so every `n` gets
/// its own run with horizon `n`.
pub fn value_curve(cfg: &SimConfig, n_max: u32) -> Result<Vec<CurvePoint>> {
    if n_max == 0 {
        return Err(Error::Parameter {
            key: "n_max",
            msg: "must be at least 1".into(),
        });
    }
    let alpha = cfg.params().alpha;
    if cfg.policy.is_horizon_dependent() {
        return (1..=n_max)
            .map(|n| {
                let sub = SimConfig { horizon: n, ..cfg.clone() };
                sub.validate()?;
                let totals = map_reps(cfg.replications, |rep| Ok(discounted(&epoch_rewards(&sub, rep, n)?, alpha)))?;
                let (mean, std_error) = mean_se(&totals);
                Ok(CurvePoint { n, mean, std_error })
            })
            .collect();
    }
    let sub = SimConfig {
        horizon: n_max,
        ..cfg.clone()
    };
    sub.validate()?;
    let runs = map_reps(cfg.replications, |rep| epoch_rewards(&sub, rep, n_max))?;
    let mut prefix: Vec<f64> = vec![0.0; runs.len()];
    let mut weight = 1.0;
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        for (acc, r) in prefix.iter_mut().zip(&runs) {
            *acc += weight * r[n as usize - 1];
        }
        weight *= alpha;
        let (mean, std_error) = mean_se(&prefix);
        out.push(CurvePoint { n, mean, std_error });
    }
    Ok(out)
}
