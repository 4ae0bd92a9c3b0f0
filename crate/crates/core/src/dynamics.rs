//! One-epoch transition kernels and the hard-core Gibbs sampler for initial states.
//!
//! Both kernels apply, after the thinning action has produced the retained set `a`:
//!
//! 1. independent deaths with probability `p_d`, survivors grow `m -> g(m)`;
//! 2. births from a Poisson process of intensity `β` on `W` with i.i.d. `ν` marks.
//!
//! The hard-core kernel discards every birth within distance `K` of a point of
//! `a` and then keeps the remaining proposals by sequential inhibition: a proposal
//! survives iff it is more than `K` from every proposal kept before it. Proposals
//! are i.i.d., so generation order is a uniformly random order.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::growth::GrowthFunction;
use crate::model::{MarkLaw, ModelParams};
use crate::pattern::{check_hardcore, MarkedPoint, Pattern};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    PoissonBdg,
    HardcoreBdg,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    pub kind: KernelKind,
    pub params: ModelParams,
    pub growth: GrowthFunction,
}

impl Kernel {
    /// Poisson births with logistic growth.
    pub fn poisson(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            kind: KernelKind::PoissonBdg,
            growth: params.logistic_growth(),
            params,
        })
    }

    /// Hard-core births (distance `K`) with an arbitrary growth map capped at `K`.
    pub fn hardcore(params: ModelParams, growth: GrowthFunction) -> Result<Self> {
        params.validate()?;
        if growth.cap() != params.k {
            return Err(Error::Parameter {
                key: "K",
                msg: format!("growth cap {} differs from the model cap {}", growth.cap(), params.k),
            });
        }
        Ok(Self {
            kind: KernelKind::HardcoreBdg,
            params,
            growth,
        })
    }

    /// Hard-core distance enforced by the kernel, if any.
    pub fn hardcore_distance(&self) -> Option<f64> {
        match self.kind {
            KernelKind::HardcoreBdg => Some(self.params.k),
            KernelKind::PoissonBdg => None,
        }
    }

    /// Next state given the post-action pattern `retained`.
    pub fn step<R: Rng + ?Sized>(&self, retained: &Pattern, rng: &mut R) -> Result<Pattern> {
        if let Some(hc) = self.hardcore_distance() {
            check_hardcore(retained, hc)?;
        }
        let mut next = self.survivors(retained, rng);
        let proposals = self.birth_proposals(rng);
        match self.kind {
            KernelKind::PoissonBdg => proposals.into_iter().for_each(|b| next.push(b)),
            KernelKind::HardcoreBdg => {
                let k = self.params.k;
                let mut kept: Vec<MarkedPoint> = Vec::new();
                for b in proposals {
                    let blocked = retained.iter().any(|a| a.location.distance(&b.location) <= k)
                        || kept.iter().any(|q| q.location.distance(&b.location) <= k);
                    if !blocked {
                        kept.push(b);
                    }
                }
                kept.into_iter().for_each(|b| next.push(b));
            }
        }
        Ok(next)
    }

    fn survivors<R: Rng + ?Sized>(&self, retained: &Pattern, rng: &mut R) -> Pattern {
        let p_d = self.params.p_d;
        let mut out = Pattern::empty();
        for pt in retained {
            let u: f64 = rng.random();
            if u >= p_d {
                let m = self.growth.step_unchecked(pt.mark.clamp(0.0, self.params.k));
                out.push(MarkedPoint {
                    location: pt.location,
                    mark: m,
                });
            }
        }
        out
    }

    fn birth_proposals<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<MarkedPoint> {
        let p = &self.params;
        let count = poisson_count(p.birth_mass(), rng);
        (0..count)
            .map(|_| {
                let loc = uniform_point(&p.window, rng);
                let mark = p.mark_law.sample(p.k, rng);
                MarkedPoint { location: loc, mark }
            })
            .collect()
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn uniform_point<R: Rng + ?Sized>(w: &Window, rng: &mut R) -> Point {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    w.point_at(u, v)
}

/// A draw from `ν` on `[0, k]`.
pub fn sample_mark(law: &MarkLaw, k: f64, stream: RngStream) -> f64 {
    law.sample(k, &mut stream.rng())
}

pub fn step_poisson(retained: &Pattern, kernel: &Kernel, stream: RngStream) -> Result<Pattern> {
    if kernel.kind != KernelKind::PoissonBdg {
        return Err(Error::Parameter {
            key: "kernel",
            msg: "expected the Poisson birth-death-growth kernel".into(),
        });
    }
    kernel.step(retained, &mut stream.rng())
}

pub fn step_hardcore(retained: &Pattern, kernel: &Kernel, stream: RngStream) -> Result<Pattern> {
    if kernel.kind != KernelKind::HardcoreBdg {
        return Err(Error::Parameter {
            key: "kernel",
            msg: "expected the hard-core birth-death-growth kernel".into(),
        });
    }
    kernel.step(retained, &mut stream.rng())
}

/// Uniform bucket grid over the window for hard-core neighbour queries.
struct CellGrid {
    window: Window,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl CellGrid {
    const MAX_CELLS_PER_AXIS: usize = 256;

    fn new(window: Window, hc: f64) -> Self {
        let longest = window.width().max(window.height());
        let cell = hc.max(longest / Self::MAX_CELLS_PER_AXIS as f64);
        let nx = ((window.width() / cell).ceil() as usize).max(1);
        let ny = ((window.height() / cell).ceil() as usize).max(1);
        Self {
            window,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    fn coords(&self, p: &Point) -> (usize, usize) {
        let i = ((p.x - self.window.x_min()) / self.cell) as usize;
        let j = ((p.y - self.window.y_min()) / self.cell) as usize;
        (i.min(self.nx - 1), j.min(self.ny - 1))
    }

    fn bucket_mut(&mut self, p: &Point) -> &mut Vec<usize> {
        let (i, j) = self.coords(p);
        &mut self.buckets[i * self.ny + j]
    }

    /// True when some stored point lies within `hc` of `p`.
    fn conflicts(&self, p: &Point, hc: f64, points: &[Point]) -> bool {
        let (i, j) = self.coords(p);
        let reach = (hc / self.cell).ceil() as usize;
        let (i0, i1) = (i.saturating_sub(reach), (i + reach).min(self.nx - 1));
        let (j0, j1) = (j.saturating_sub(reach), (j + reach).min(self.ny - 1));
        for a in i0..=i1 {
            for b in j0..=j1 {
                if self.buckets[a * self.ny + b].iter().any(|&q| points[q].distance(p) <= hc) {
                    return true;
                }
            }
        }
        false
    }
}

/// Birth-death Metropolis–Hastings chain for the hard-core Gibbs process.
struct GibbsChain {
    window: Window,
    activity: f64,
    hc: f64,
    points: Vec<Point>,
    grid: CellGrid,
}

impl GibbsChain {
    fn new(window: Window, activity: f64, hc: f64) -> Self {
        Self {
            window,
            activity,
            hc,
            points: Vec::new(),
            grid: CellGrid::new(window, hc),
        }
    }

    fn proposals_per_sweep(&self) -> usize {
        2 * (self.activity * self.window.area()).ceil() as usize + 2
    }

    fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mass = self.activity * self.window.area();
        let n = self.points.len();
        let birth: bool = rng.random_bool(0.5);
        let u: f64 = rng.random();
        if birth {
            let p = uniform_point(&self.window, rng);
            if u < (mass / (n + 1) as f64).min(1.0) && !self.grid.conflicts(&p, self.hc, &self.points) {
                self.grid.bucket_mut(&p).push(n);
                self.points.push(p);
            }
        } else if n > 0 {
            let i = rng.random_range(0..n);
            if u < (n as f64 / mass).min(1.0) {
                self.remove(i);
            }
        }
    }

    fn remove(&mut self, i: usize) {
        let p = self.points[i];
        let bucket = self.grid.bucket_mut(&p);
        let pos = bucket.iter().position(|&q| q == i).expect("indexed point");
        bucket.swap_remove(pos);
        let last = self.points.len() - 1;
        if i != last {
            let moved = self.points[last];
            let bucket = self.grid.bucket_mut(&moved);
            let pos = bucket.iter().position(|&q| q == last).expect("indexed point");
            bucket[pos] = i;
        }
        self.points.swap_remove(i);
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for _ in 0..self.proposals_per_sweep() {
            self.propose(rng);
        }
    }
}

#[derive(Debug, Clone)]
pub struct GibbsSample {
    pub pattern: Pattern,
    pub activity: f64,
    /// `n / |W|` of the returned pattern.
    pub intensity: f64,
}

/// Approximate draw from the hard-core Gibbs process after `sweeps` sweeps from the
/// empty state; marks are then drawn i.i.d. from `law`.
pub fn sample_hardcore_gibbs(
    window: Window,
    activity: f64,
    hc: f64,
    sweeps: usize,
    law: &MarkLaw,
    k: f64,
    stream: RngStream,
) -> Result<GibbsSample> {
    if !(activity > 0.0 && activity.is_finite()) || !(hc > 0.0) || sweeps == 0 {
        return Err(Error::Parameter {
            key: "gibbs",
            msg: format!("activity {activity}, hard core {hc} and sweeps {sweeps} must be positive"),
        });
    }
    let mut rng = stream.rng();
    let mut chain = GibbsChain::new(window, activity, hc);
    for _ in 0..sweeps {
        chain.sweep(&mut rng);
    }
    let pattern: Pattern = chain
        .points
        .iter()
        .map(|p| MarkedPoint {
            location: *p,
            mark: law.sample(k, &mut rng),
        })
        .collect();
    Ok(GibbsSample {
        intensity: pattern.len() as f64 / window.area(),
        pattern,
        activity,
    })
}

/// Long-run average intensity of the chain: `burn_in` sweeps discarded, then the
/// point count averaged after each of `sweeps` sweeps.
pub fn gibbs_mean_intensity(window: Window, activity: f64, hc: f64, burn_in: usize, sweeps: usize, stream: RngStream) -> f64 {
    let mut rng = stream.rng();
    let mut chain = GibbsChain::new(window, activity, hc);
    for _ in 0..burn_in {
        chain.sweep(&mut rng);
    }
    let mut total = 0usize;
    for _ in 0..sweeps {
        chain.sweep(&mut rng);
        total += chain.points.len();
    }
    total as f64 / (sweeps.max(1) as f64 * window.area())
}

const PILOT_BURN_IN: usize = 200;
const PILOT_SWEEPS: usize = 1_500;
const CALIBRATION_TOLERANCE: f64 = 0.02;
const CALIBRATION_STEPS: usize = 40;

/// Activity whose pilot-run intensity is within 2% of `target`, by bisection.
///
/// Every pilot run uses the same random stream, so the pilot intensity is a
/// deterministic function of the activity.
pub fn calibrate_activity(window: Window, target: f64, hc: f64, stream: RngStream) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Parameter {
            key: "intensity",
            msg: format!("target intensity {target} must be positive"),
        });
    }
    let pilot = |a: f64| gibbs_mean_intensity(window, a, hc, PILOT_BURN_IN, PILOT_SWEEPS, stream);
    let close = |v: f64| (v - target).abs() <= CALIBRATION_TOLERANCE * target;

    let mut lo = target;
    let at_lo = pilot(lo);
    if close(at_lo) {
        return Ok(lo);
    }
    let mut hi = 2.0 * target;
    let mut doublings = 0;
    loop {
        let v = pilot(hi);
        if close(v) {
            return Ok(hi);
        }
        if v > target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 30 {
            return Err(Error::Parameter {
                key: "intensity",
                msg: format!("target intensity {target} is not reachable with hard core {hc}"),
            });
        }
    }
    for _ in 0..CALIBRATION_STEPS {
        let mid = 0.5 * (lo + hi);
        let v = pilot(mid);
        if close(v) {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::mean_and_se;
    use crate::pattern::is_hardcore;

    fn poisson_kernel(p: ModelParams) -> Kernel {
        Kernel::poisson(p).unwrap()
    }

    fn hardcore_kernel(p: ModelParams) -> Kernel {
        Kernel::hardcore(p, p.logistic_growth()).unwrap()
    }

    #[test]
    fn mark_sampling() {
        assert_eq!(sample_mark(&MarkLaw::PointMass(0.05), 0.1, RngStream::new(1, 1)), 0.05);

        let law = MarkLaw::ScaledBeta { a: 2.0, b: 20.0 };
        let mut rng = RngStream::new(2, 0).rng();
        let draws: Vec<f64> = (0..1_000_000).map(|_| law.sample(0.1, &mut rng)).collect();
        assert!(draws.iter().all(|&m| (0.0..=0.1).contains(&m)));
        let (mean, se) = mean_and_se(&draws);
        assert!((mean - 0.1 * 2.0 / 22.0).abs() < 3.0 * se, "{mean} ± {se}");

        // Kolmogorov–Smirnov against U[0, 0.1] at the 1% level.
        let mut rng = RngStream::new(3, 0).rng();
        let mut u: Vec<f64> = (0..100_000).map(|_| MarkLaw::Uniform.sample(0.1, &mut rng)).collect();
        u.sort_by(f64::total_cmp);
        let n = u.len() as f64;
        let d = u
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = v / 0.1;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn poisson_birth_count_moments() {
        let k = poisson_kernel(ModelParams::reference());
        let counts: Vec<f64> = (0..10_000)
            .map(|i| step_poisson(&Pattern::empty(), &k, RngStream::new(1, i)).unwrap().len() as f64)
            .collect();
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 25.0).abs() < 3.0 * se, "{mean} ± {se}");
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
        // Var of the sample variance of a Poisson(25) count is about (2·25² + 25) / n.
        let var_se = ((2.0 * 625.0 + 25.0) / counts.len() as f64).sqrt();
        assert!((var - 25.0).abs() < 3.0 * var_se, "variance {var}");
    }

    #[test]
    fn deaths_and_growth() {
        let p = ModelParams::reference().with_beta(0.0);
        let k = poisson_kernel(p);
        let one = Pattern::new(vec![MarkedPoint::new(1.0, 1.0, 0.05)]);
        let grown = p.logistic_growth().step(0.05).unwrap();
        let trials = 100_000;
        let mut alive = 0;
        for i in 0..trials {
            let next = step_poisson(&one, &k, RngStream::new(5, i)).unwrap();
            if let Some(pt) = next.points().first() {
                assert_eq!(pt.mark, grown);
                assert_eq!(pt.location, one.points()[0].location);
                alive += 1;
            }
        }
        let freq = alive as f64 / trials as f64;
        let se = (0.95 * 0.05 / trials as f64).sqrt();
        assert!((freq - 0.95).abs() < 3.0 * se);

        let doomed = poisson_kernel(ModelParams { p_d: 1.0 - 1e-12, ..p });
        let many: Pattern = (0..50).map(|i| MarkedPoint::new(0.1 * i as f64, 1.0, 0.02)).collect();
        assert!(step_poisson(&many, &doomed, RngStream::new(6, 0)).unwrap().is_empty());
    }

    #[test]
    fn newborn_mark_mass() {
        let p = ModelParams::reference();
        let k = poisson_kernel(p);
        let sums: Vec<f64> = (0..10_000)
            .map(|i| crate::pattern::mark_sum(&step_poisson(&Pattern::empty(), &k, RngStream::new(7, i)).unwrap()))
            .collect();
        let (mean, se) = mean_and_se(&sums);
        assert!((mean - p.birth_mass() * p.mark_law.mean(p.k)).abs() < 3.0 * se);
    }

    #[test]
    fn steps_are_deterministic() {
        let p = ModelParams::reference().with_beta(4.3);
        for kern in [poisson_kernel(p), hardcore_kernel(p)] {
            let x = Pattern::new(vec![MarkedPoint::new(1.0, 1.0, 0.05), MarkedPoint::new(3.0, 3.0, 0.01)]);
            let a = kern.step(&x, &mut RngStream::new(8, 3).rng()).unwrap();
            let b = kern.step(&x, &mut RngStream::new(8, 3).rng()).unwrap();
            assert!(a.same_points(&b));
            assert!(a.iter().all(|pt| (0.0..=p.k).contains(&pt.mark)));
        }
    }

    #[test]
    fn hardcore_output_respects_the_core() {
        let p = ModelParams::reference().with_beta(4.3);
        let kern = hardcore_kernel(p);
        let mut x = Pattern::empty();
        for i in 0..10_000u64 {
            x = step_hardcore(&x, &kern, RngStream::new(9, i)).unwrap();
            assert!(is_hardcore(&x, p.k), "step {i}");
        }
        assert!(!x.is_empty());
    }

    #[test]
    fn hardcore_rejects_invalid_retained_set() {
        let kern = hardcore_kernel(ModelParams::reference());
        let bad = Pattern::new(vec![MarkedPoint::new(1.0, 1.0, 0.0), MarkedPoint::new(1.05, 1.0, 0.0)]);
        assert!(matches!(
            step_hardcore(&bad, &kern, RngStream::new(1, 1)),
            Err(Error::HardcoreViolation { .. })
        ));
        assert!(step_poisson(&Pattern::empty(), &kern, RngStream::new(1, 1)).is_err());
    }

    #[test]
    fn covered_window_has_no_births() {
        let p = ModelParams {
            window: Window::square(0.3).unwrap(),
            p_d: 1e-12,
            ..ModelParams::reference().with_beta(50.0)
        };
        let kern = hardcore_kernel(p);
        // Points 0.101 apart on a lattice leave no site farther than K from all of them.
        let cover: Pattern = (0..4)
            .flat_map(|i| (0..4).map(move |j| MarkedPoint::new(0.101 * i as f64, 0.101 * j as f64, 0.01)))
            .collect();
        assert!(is_hardcore(&cover, p.k));
        for i in 0..200 {
            let next = step_hardcore(&cover, &kern, RngStream::new(10, i)).unwrap();
            assert!(next.len() <= cover.len());
        }
    }

    #[test]
    fn sparse_hardcore_births_match_poisson() {
        let p = ModelParams::reference().with_beta(0.01 / 25.0);
        let hc = hardcore_kernel(p);
        let pk = poisson_kernel(p);
        let mut same = 0;
        for i in 0..2_000 {
            let a = step_hardcore(&Pattern::empty(), &hc, RngStream::new(11, i)).unwrap();
            let b = step_poisson(&Pattern::empty(), &pk, RngStream::new(11, i)).unwrap();
            same += a.same_points(&b) as usize;
        }
        assert_eq!(same, 2_000);
    }

    #[test]
    fn gibbs_limits() {
        let w = Window::square(5.0).unwrap();
        let law = MarkLaw::ScaledBeta { a: 2.0, b: 20.0 };
        let s = sample_hardcore_gibbs(w, 1e-9, 0.1, 50, &law, 0.1, RngStream::new(12, 0)).unwrap();
        assert!(s.pattern.is_empty());
        for seed in 0..5 {
            let s = sample_hardcore_gibbs(w, 3.0, 10.0, 50, &law, 0.1, RngStream::new(13, seed)).unwrap();
            assert!(s.pattern.len() <= 1);
        }
        let s = sample_hardcore_gibbs(w, 1.0, 0.1, 300, &law, 0.1, RngStream::new(14, 0)).unwrap();
        assert!(is_hardcore(&s.pattern, 0.1));
        assert!(s.pattern.iter().all(|p| (0.0..=0.1).contains(&p.mark) && w.contains(&p.location)));
    }

    #[test]
    fn gibbs_poisson_limit() {
        let w = Window::square(5.0).unwrap();
        let counts: Vec<f64> = (0..400)
            .map(|i| {
                sample_hardcore_gibbs(w, 1.0, 1e-6, 60, &MarkLaw::Uniform, 0.1, RngStream::new(15, i))
                    .unwrap()
                    .pattern
                    .len() as f64
            })
            .collect();
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 25.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn calibration_hits_target_intensity() {
        let w = Window::square(5.0).unwrap();
        for target in [1.0, 4.3] {
            let a = calibrate_activity(w, target, 0.1, RngStream::new(16, 0)).unwrap();
            assert!(a >= target);
            let v = gibbs_mean_intensity(w, a, 0.1, 200, 1_500, RngStream::new(16, 0));
            assert!((v - target).abs() <= 0.02 * target);
            let independent = gibbs_mean_intensity(w, a, 0.1, 200, 3_000, RngStream::new(17, 1));
            assert!((independent - target).abs() <= 0.05 * target, "{independent}");
        }
    }
}
