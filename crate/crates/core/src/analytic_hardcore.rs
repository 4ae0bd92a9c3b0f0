//! Computable bounds on the optimal value when births respect a hard core of radius `K`.
//!
//! The upper kernel `ŝ_n(m)` is the Poisson-model kernel for a general growth map.
//! The lower kernel `s̃_n(x, m)` charges every epoch a point is kept for the births
//! it blocks: `α K β |b(x, K) ∩ W|` per epoch, discounted like the harvest itself.
//! Both kernels feed the same value functional, with the birth-stream integral
//! taken over `ν` for the upper bound and over `W × ν` for the lower bound.
//!
//! Under Monte Carlo integration both curves reuse one frozen sample set
//! `(w_s, l_s)`. Because `s̃_j(w, l) <= ŝ_j(l)` term by term and both bounds are
//! assembled by the same floating-point expression, `ṽ_n <= v̂_n` holds exactly.

use std::collections::HashMap;

use crate::analytic_poisson::{penalized_prefix_max, penalized_sup};
use crate::error::{Error, Result};
use crate::geometry::{ball_window_area, Point};
use crate::growth::GrowthFunction;
use crate::integrate::{law_expectation_vec, mark_samples, site_samples, window_grid, IntegrationSpec};
use crate::model::ModelParams;
use crate::pattern::Pattern;

/// Per-epoch blocking penalty `α K β |b(loc, K) ∩ W|`.
pub fn blocking_penalty(loc: Point, p: &ModelParams) -> f64 {
    p.alpha * p.k * p.beta * ball_window_area(loc, p.k, &p.window)
}

fn kernel_sequence(m: f64, count: usize, penalty: f64, p: &ModelParams, gf: &GrowthFunction) -> Result<Vec<f64>> {
    Ok(penalized_prefix_max(gf, m, p.survival_discount(), penalty, count)?
        .into_iter()
        .map(|a| a.value)
        .collect())
}

/// `ŝ_n(m)`; `ŝ_0 = 0`.
pub fn s_hat_n(m: f64, n: u32, p: &ModelParams, gf: &GrowthFunction) -> Result<f64> {
    if n == 0 {
        gf.orbit(m)?;
        return Ok(0.0);
    }
    Ok(kernel_sequence(m, n as usize, 0.0, p, gf)?[n as usize - 1])
}

/// `s̃_n(loc, m)`; `s̃_0 = 0`.
pub fn s_tilde_n(loc: Point, m: f64, n: u32, p: &ModelParams, gf: &GrowthFunction) -> Result<f64> {
    if n == 0 {
        gf.orbit(m)?;
        return Ok(0.0);
    }
    Ok(kernel_sequence(m, n as usize, blocking_penalty(loc, p), p, gf)?[n as usize - 1])
}

/// `ŝ(m) = sup_n ŝ_n(m)`.
pub fn s_hat_inf(m: f64, p: &ModelParams, gf: &GrowthFunction) -> Result<f64> {
    Ok(penalized_sup(gf, m, p.survival_discount(), 0.0)?.value)
}

/// `s̃(loc, m) = sup_n s̃_n(loc, m)`.
pub fn s_tilde_inf(loc: Point, m: f64, p: &ModelParams, gf: &GrowthFunction) -> Result<f64> {
    Ok(penalized_sup(gf, m, p.survival_discount(), blocking_penalty(loc, p))?.value)
}

/// Lower and upper bound curves `ṽ_n`, `v̂_n` for `n = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsCurve {
    pub n_values: Vec<u32>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integration: IntegrationSpec,
}

impl BoundsCurve {
    /// `(v̂_n - ṽ_n) / v̂_n` at horizon `n`.
    pub fn relative_gap(&self, n: u32) -> Option<f64> {
        let i = self.n_values.iter().position(|&v| v == n)?;
        Some((self.upper[i] - self.lower[i]) / self.upper[i])
    }

    /// First horizon where the sandwich fails, if any.
    pub fn first_breach(&self) -> Option<u32> {
        self.n_values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .find(|(_, (lo, hi))| lo > hi)
            .map(|(n, _)| *n)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,v_tilde,v_hat")?;
        for ((n, lo), hi) in self.n_values.iter().zip(&self.lower).zip(&self.upper) {
            writeln!(out, "{n},{lo:?},{hi:?}")?;
        }
        Ok(())
    }
}

/// Birth-stream integrals of the kernels: `hat[j-1] ≈ ∫ ŝ_j dν` and
/// `tilde[j-1] ≈ |W|⁻¹ ∫_W ∫ s̃_j dν dw` for `j = 1..count`.
struct KernelIntegrals {
    hat: Vec<f64>,
    tilde: Vec<f64>,
}

fn kernel_integrals(count: usize, p: &ModelParams, gf: &GrowthFunction, integ: IntegrationSpec) -> Result<KernelIntegrals> {
    if count == 0 {
        return Ok(KernelIntegrals {
            hat: vec![],
            tilde: vec![],
        });
    }
    match integ {
        IntegrationSpec::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Parameter {
                    key: "mc_samples",
                    msg: "at least one sample is required".into(),
                });
            }
            let marks = mark_samples(&p.mark_law, p.k, samples, seed);
            let sites = site_samples(&p.window, samples, seed);
            let mut hat = vec![0.0; count];
            let mut tilde = vec![0.0; count];
            for (l, w) in marks.iter().zip(&sites) {
                let h = kernel_sequence(*l, count, 0.0, p, gf)?;
                let t = kernel_sequence(*l, count, blocking_penalty(*w, p), p, gf)?;
                for j in 0..count {
                    hat[j] += h[j];
                    tilde[j] += t[j];
                }
            }
            let inv = samples as f64;
            hat.iter_mut().for_each(|v| *v /= inv);
            tilde.iter_mut().for_each(|v| *v /= inv);
            Ok(KernelIntegrals { hat, tilde })
        }
        IntegrationSpec::Quadrature { rel_tol } => {
            let expect = |penalty: f64| -> Result<Vec<f64>> {
                let mut failure = None;
                let v = law_expectation_vec(&p.mark_law, p.k, count, rel_tol, |m, out| {
                    match kernel_sequence(m, count, penalty, p, gf) {
                        Ok(seq) => out.copy_from_slice(&seq),
                        Err(e) => failure = Some(e),
                    }
                });
                failure.map_or(Ok(v), Err)
            };
            let hat = expect(0.0)?;
            let grid = window_grid(&p.window);
            let mut by_penalty: HashMap<u64, (f64, usize)> = HashMap::new();
            for w in &grid {
                let pen = blocking_penalty(*w, p);
                by_penalty.entry(pen.to_bits()).or_insert((pen, 0)).1 += 1;
            }
            let mut groups: Vec<(f64, usize)> = by_penalty.into_values().collect();
            groups.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut tilde = vec![0.0; count];
            for (pen, cells) in groups {
                let e = expect(pen)?;
                for j in 0..count {
                    tilde[j] += cells as f64 * e[j];
                }
            }
            let cells = grid.len() as f64;
            tilde.iter_mut().for_each(|v| *v /= cells);
            Ok(KernelIntegrals { hat, tilde })
        }
    }
}

/// `ṽ_n` and `v̂_n` for every `n = 1..=n_max` from one set of kernel integrals.
pub fn bounds_curve(x: &Pattern, n_max: u32, p: &ModelParams, gf: &GrowthFunction, integ: IntegrationSpec) -> Result<BoundsCurve> {
    if n_max == 0 {
        return Err(Error::Parameter {
            key: "n_max",
            msg: "must be at least 1".into(),
        });
    }
    let count = n_max as usize;
    let mut point_hat = vec![0.0; count];
    let mut point_tilde = vec![0.0; count];
    for pt in x {
        let h = kernel_sequence(pt.mark, count, 0.0, p, gf)?;
        let t = kernel_sequence(pt.mark, count, blocking_penalty(pt.location, p), p, gf)?;
        for j in 0..count {
            point_hat[j] += h[j];
            point_tilde[j] += t[j];
        }
    }
    let integrals = kernel_integrals(count - 1, p, gf, integ)?;
    let scale = p.r * p.beta * p.window.area();
    let birth = |kernel: &[f64], n: usize| -> f64 {
        let s: f64 = (1..n).map(|k| p.alpha.powi(k as i32) * kernel[n - k - 1]).sum();
        scale * s
    };
    let mut lower = Vec::with_capacity(count);
    let mut upper = Vec::with_capacity(count);
    for n in 1..=count {
        upper.push(p.r * point_hat[n - 1] + birth(&integrals.hat, n));
        lower.push(p.r * point_tilde[n - 1] + birth(&integrals.tilde, n));
    }
    Ok(BoundsCurve {
        n_values: (1..=n_max).collect(),
        lower,
        upper,
        integration: integ,
    })
}

/// Upper bound `v̂_n(x)` on the optimal `n`-epoch value.
pub fn v_hat_n(x: &Pattern, n: u32, p: &ModelParams, gf: &GrowthFunction, integ: IntegrationSpec) -> Result<f64> {
    Ok(*bounds_curve(x, n, p, gf, integ)?.upper.last().expect("n >= 1"))
}

/// Lower bound `ṽ_n(x)` on the optimal `n`-epoch value.
pub fn v_tilde_n(x: &Pattern, n: u32, p: &ModelParams, gf: &GrowthFunction, integ: IntegrationSpec) -> Result<f64> {
    Ok(*bounds_curve(x, n, p, gf, integ)?.lower.last().expect("n >= 1"))
}
