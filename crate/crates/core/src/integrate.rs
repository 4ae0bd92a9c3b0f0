//! Expectations against the mark law `ν` and the window, by adaptive
//! Gauss–Kronrod quadrature or by seeded Monte Carlo sampling.

use crate::geometry::{Point, Window};
use crate::model::MarkLaw;
use crate::rng::RngStream;
use rand::Rng;

/// Stream ids reserved for integration samples, disjoint from simulation streams.
const MARK_SAMPLE_STREAM: u64 = 0x4d41_524b_0000_0000;
const SITE_SAMPLE_STREAM: u64 = 0x5349_5445_0000_0000;

const MAX_INTERVALS: usize = 4_000;
const ABS_FLOOR: f64 = 1e-300;

/// Side of the midpoint grid used for window integrals in quadrature mode.
pub const WINDOW_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrationSpec {
    Quadrature { rel_tol: f64 },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        IntegrationSpec::Quadrature { rel_tol: 1e-9 }
    }
}

impl IntegrationSpec {
    /// 1,000 shared samples, the size used for the published bound curves.
    pub fn monte_carlo(seed: u64) -> Self {
        IntegrationSpec::MonteCarlo { samples: 1_000, seed }
    }
}

// 15-point Kronrod abscissae (positive half, descending) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [f64], f: &mut F| {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(x, buf);
        for i in 0..dim {
            kron[i] += wk * buf[i];
            gauss[i] += wg * buf[i];
        }
    };
    add(c, WGK[7], WG[3], buf, f);
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        let dx = h * XGK[j];
        add(c - dx, WGK[j], wg, buf, f);
        add(c + dx, WGK[j], wg, buf, f);
    }
    let value: Vec<f64> = kron.iter().map(|v| v * h).collect();
    let error = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * h).abs()).collect();
    Panel { a, b, value, error }
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of a vector-valued integrand on `[a, b]`.
///
/// `f(x, out)` writes the `dim` components at `x` into a zeroed `out`. Refinement
/// stops once every component's summed error estimate is within `rel_tol` of its
/// magnitude, or after a fixed panel budget.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(mut f: F, a: f64, b: f64, dim: usize, rel_tol: f64) -> Vec<f64> {
    let mut buf = vec![0.0; dim];
    let mut panels = vec![gk15(&mut f, a, b, dim, &mut buf)];
    loop {
        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                total[i] += p.value[i];
                err[i] += p.error[i];
            }
        }
        let tol: Vec<f64> = total.iter().map(|t| (rel_tol * t.abs()).max(ABS_FLOOR)).collect();
        let converged = err.iter().zip(&tol).all(|(e, t)| e <= t);
        if converged || panels.len() >= MAX_INTERVALS {
            return total;
        }
        let worst = panels
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let score: f64 = p.error.iter().zip(&tol).map(|(e, t)| e / t).sum();
                (idx, score)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(idx, _)| idx)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            panels.push(p);
            return panels.iter().fold(vec![0.0; dim], |mut acc, p| {
                acc.iter_mut().zip(&p.value).for_each(|(a, v)| *a += v);
                acc
            });
        }
        panels.push(gk15(&mut f, p.a, mid, dim, &mut buf));
        panels.push(gk15(&mut f, mid, p.b, dim, &mut buf));
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate_vec(|x, out| out[0] = f(x), a, b, 1, rel_tol)[0]
}

/// `∫ f dν` for a vector-valued `f`, by quadrature against the law's density.
pub fn law_expectation_vec<F: FnMut(f64, &mut [f64])>(
    law: &MarkLaw,
    k: f64,
    dim: usize,
    rel_tol: f64,
    mut f: F,
) -> Vec<f64> {
    match (law, law.density(k)) {
        (MarkLaw::PointMass(m), _) => {
            let mut out = vec![0.0; dim];
            f(*m, &mut out);
            out
        }
        (_, Some(density)) => integrate_vec(
            |m, out| {
                let w = density(m);
                if w > 0.0 {
                    f(m, out);
                    out.iter_mut().for_each(|v| *v *= w);
                }
            },
            0.0,
            k,
            dim,
            rel_tol,
        ),
        (_, None) => unreachable!("only the point mass lacks a density"),
    }
}

/// `samples` i.i.d. marks from `ν`, the shared sample set for one seed.
pub fn mark_samples(law: &MarkLaw, k: f64, samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, MARK_SAMPLE_STREAM).rng();
    (0..samples).map(|_| law.sample(k, &mut rng)).collect()
}

/// `samples` i.i.d. uniform sites in `w`, paired index-wise with [`mark_samples`].
pub fn site_samples(w: &Window, samples: usize, seed: u64) -> Vec<Point> {
    let mut rng = RngStream::new(seed, SITE_SAMPLE_STREAM).rng();
    (0..samples)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            w.point_at(u, v)
        })
        .collect()
}

/// Cell centres of the `WINDOW_GRID × WINDOW_GRID` midpoint grid; each cell has area `|W| / WINDOW_GRID²`.
pub fn window_grid(w: &Window) -> Vec<Point> {
    let n = WINDOW_GRID;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(w.point_at((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64));
        }
    }
    out
}

/// Sample mean and standard error of the mean (zero for fewer than two values).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
