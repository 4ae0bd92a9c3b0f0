//! Stationary thinning rules, plus a horizon-matched French rule for finite horizons.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::analytic_hardcore::{blocking_penalty, s_tilde_n};
use crate::analytic_poisson::{d_n, d_star};
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::model::ModelParams;
use crate::pattern::{Action, Pattern};
use crate::rng::RngStream;

pub type CustomRule = Arc<dyn Fn(&Pattern) -> Action + Send + Sync>;

#[derive(Clone)]
pub enum Policy {
    /// Remove every point with mark `>= d`.
    French(f64),
    /// French thinning at `thresholds[r - 1]` when `r` epochs remain; the last
    /// entry is reused for longer remaining horizons.
    FrenchHorizon(Vec<f64>),
    /// Remove each point with mark `<= d` independently with probability `f`.
    German { d: f64, f: f64 },
    /// The rule that maximises the lower bound `ṽ_{n+1}` one step ahead.
    TildeRule {
        n: u32,
        params: ModelParams,
        growth: GrowthFunction,
    },
    KeepAll,
    RemoveAll,
    Custom(CustomRule),
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::French(d) => write!(f, "French({d})"),
            Policy::FrenchHorizon(t) => write!(f, "FrenchHorizon({} thresholds)", t.len()),
            Policy::German { d, f: frac } => write!(f, "German {{ d: {d}, f: {frac} }}"),
            Policy::TildeRule { n, .. } => write!(f, "TildeRule {{ n: {n} }}"),
            Policy::KeepAll => write!(f, "KeepAll"),
            Policy::RemoveAll => write!(f, "RemoveAll"),
            Policy::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Policy {
    /// Thresholds `d_1, ..., d_horizon` for the model's Poisson dynamics.
    pub fn french_horizon(p: &ModelParams, horizon: u32) -> Self {
        Policy::FrenchHorizon((1..=horizon.max(1)).map(|n| d_n(n, p)).collect())
    }

    pub fn tilde_rule(n: u32, params: ModelParams, growth: GrowthFunction) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter {
                key: "n",
                msg: "the lower-bound rule needs a horizon n >= 1".into(),
            });
        }
        Ok(Policy::TildeRule { n, params, growth })
    }

    /// True when the decision depends on the number of remaining epochs.
    pub fn is_horizon_dependent(&self) -> bool {
        matches!(self, Policy::FrenchHorizon(_))
    }

    /// True when [`Policy::decide`] draws from its random stream.
    pub fn is_randomized(&self) -> bool {
        matches!(self, Policy::German { f, .. } if *f > 0.0 && *f < 1.0)
    }

    /// Action for state `x` with `remaining >= 1` epochs left, including this one.
    pub fn decide<R: Rng + ?Sized>(&self, x: &Pattern, remaining: u32, rng: &mut R) -> Result<Action> {
        Ok(match self {
            Policy::French(d) => french(x, *d),
            Policy::FrenchHorizon(t) => {
                let idx = (remaining.max(1) as usize).min(t.len()) - 1;
                french(x, t[idx])
            }
            Policy::German { d, f } => german_with(x, *d, *f, rng),
            Policy::TildeRule { n, params, growth } => tilde_rule(x, *n, params, growth)?,
            Policy::KeepAll => Action::keep_all(x),
            Policy::RemoveAll => Action::remove_all(x),
            Policy::Custom(rule) => {
                let a = rule(x);
                Action::new(a.retained().to_vec(), x)?
            }
        })
    }
}

pub fn french(x: &Pattern, d: f64) -> Action {
    Action::from_removal(x, |_, p| p.mark >= d)
}

pub fn german(x: &Pattern, d: f64, f: f64, stream: RngStream) -> Action {
    german_with(x, d, f, &mut stream.rng())
}

fn german_with<R: Rng + ?Sized>(x: &Pattern, d: f64, f: f64, rng: &mut R) -> Action {
    let f = f.clamp(0.0, 1.0);
    Action::from_removal(x, |_, p| {
        // One draw per eligible point keeps the stream layout independent of f.
        p.mark <= d && rng.random::<f64>() < f
    })
}

/// Removes `(loc, m)` iff `m >= α[(1 − p_d) s̃_n(loc, g(m)) − K β |b(loc, K) ∩ W|]`.
pub fn tilde_rule(x: &Pattern, n: u32, p: &ModelParams, gf: &GrowthFunction) -> Result<Action> {
    let mut keep = Vec::with_capacity(x.len());
    for (i, pt) in x.iter().enumerate() {
        let grown = gf.step(pt.mark)?;
        let future = s_tilde_n(pt.location, grown, n, p, gf)?;
        let hold = (1.0 - p.p_d) * p.alpha * future - blocking_penalty(pt.location, p);
        if pt.mark < hold {
            keep.push(i);
        }
    }
    Action::new(keep, x)
}

/// Parsed form of a policy specification string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    French(f64),
    FrenchDstar,
    FrenchHorizon,
    German { d: f64, f: f64 },
    Tilde(u32),
    KeepAll,
    RemoveAll,
}

impl PolicySpec {
    /// Concrete policy for model `p`; `horizon` sizes the horizon-matched thresholds.
    pub fn build(&self, p: &ModelParams, gf: &GrowthFunction, horizon: u32) -> Result<Policy> {
        Ok(match *self {
            PolicySpec::French(d) => Policy::French(d),
            PolicySpec::FrenchDstar => Policy::French(d_star(p)?.value),
            PolicySpec::FrenchHorizon => Policy::french_horizon(p, horizon),
            PolicySpec::German { d, f } => Policy::German { d, f },
            PolicySpec::Tilde(n) => Policy::tilde_rule(n, *p, gf.clone())?,
            PolicySpec::KeepAll => Policy::KeepAll,
            PolicySpec::RemoveAll => Policy::RemoveAll,
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::French(d) => write!(f, "french:{d}"),
            PolicySpec::FrenchDstar => write!(f, "french:dstar"),
            PolicySpec::FrenchHorizon => write!(f, "french:horizon"),
            PolicySpec::German { d, f: frac } => write!(f, "german:{d}:{frac}"),
            PolicySpec::Tilde(n) => write!(f, "tilde:{n}"),
            PolicySpec::KeepAll => write!(f, "keepall"),
            PolicySpec::RemoveAll => write!(f, "removeall"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::PolicySpec { spec: s.to_string() };
        let real = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0);
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["keepall"] => Ok(PolicySpec::KeepAll),
            ["removeall"] => Ok(PolicySpec::RemoveAll),
            ["french", "dstar"] => Ok(PolicySpec::FrenchDstar),
            ["french", "horizon"] => Ok(PolicySpec::FrenchHorizon),
            ["french", d] => real(d).map(PolicySpec::French).ok_or_else(bad),
            ["german", d, f] => match (real(d), real(f)) {
                (Some(d), Some(f)) if f <= 1.0 => Ok(PolicySpec::German { d, f }),
                _ => Err(bad()),
            },
            ["tilde", n] => match n.trim().parse::<u32>() {
                Ok(n) if n >= 1 => Ok(PolicySpec::Tilde(n)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::mean_and_se;
    use crate::pattern::MarkedPoint;
    use proptest::prelude::*;

    fn marks(ms: &[f64]) -> Pattern {
        ms.iter().enumerate().map(|(i, &m)| MarkedPoint::new(0.5 * i as f64, 1.0, m)).collect()
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        RngStream::new(0, 0).rng()
    }

    #[test]
    fn french_examples() {
        let x = marks(&[0.0, 0.05, 0.09, 0.1]);
        assert_eq!(french(&x, 0.0).removed_count(), 4);
        assert_eq!(french(&x, 0.11).removed_count(), 0);
        let y = marks(&[0.05, 0.09]);
        let a = french(&y, 0.0832306);
        assert_eq!(a.retained(), &[0]);
        // Ties are removed.
        assert_eq!(french(&y, 0.05).removed_count(), 2);
    }

    #[test]
    fn german_examples() {
        let x = marks(&[0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]);
        assert_eq!(german(&x, 0.05, 0.0, RngStream::new(1, 1)).removed_count(), 0);
        assert_eq!(german(&x, 0.05, 1.0, RngStream::new(1, 1)).removed(&x).unwrap().marks().collect::<Vec<_>>(), vec![
            0.01, 0.02, 0.03, 0.04, 0.05
        ]);
        let counts: Vec<f64> = (0..100_000u64)
            .map(|i| {
                let a = german(&x, 0.05, 0.5, RngStream::new(2, i));
                assert!(a.removed(&x).unwrap().iter().all(|p| p.mark <= 0.05));
                a.removed_count() as f64
            })
            .collect();
        let (mean, se) = mean_and_se(&counts);
        assert!((mean - 2.5).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn tilde_rule_examples() {
        let p = ModelParams::reference();
        let g = p.logistic_growth();
        let x = marks(&[0.0, 0.01, 0.05, 0.09]);
        // A huge birth intensity makes every holding value negative.
        let heavy = p.with_beta(1e4);
        assert_eq!(tilde_rule(&x, 1, &heavy, &g).unwrap().removed_count(), 4);
        for n in [1, 3, 10] {
            let a = tilde_rule(&x, n, &p, &g).unwrap();
            // g(0) = 0, so a zero mark meets the removal test with equality or better.
            assert!(!a.retained().contains(&0));
            assert!(a.retained().contains(&1));
        }
        let none = p.with_beta(0.0);
        assert!(!tilde_rule(&x, 5, &none, &g).unwrap().retained().contains(&0));
    }

    #[test]
    fn tilde_rule_vanishing_births_matches_one_step_comparison() {
        let p = ModelParams::reference().with_beta(1e-12);
        let g = p.logistic_growth();
        let c = p.survival_discount();
        let x: Pattern = (0..=1000)
            .map(|i| MarkedPoint::new(2.5, 2.5, p.k * i as f64 / 1000.0))
            .collect();
        let a = tilde_rule(&x, 1, &p, &g).unwrap();
        let expected = Action::from_removal(&x, |_, pt| pt.mark >= c * g.step(pt.mark).unwrap());
        let kept = a.retained().len();
        let diffs = a.retained().iter().filter(|i| !expected.retained().contains(i)).count()
            + expected.retained().iter().filter(|i| !a.retained().contains(i)).count();
        assert!(diffs <= 1, "{diffs} differences, {kept} kept");

        // With n = 1 the one-step rule keeps exactly the marks below d_2.
        let d2 = d_n(2, &p);
        let french_d2 = french(&x, d2);
        let diffs = a.retained().iter().filter(|i| !french_d2.retained().contains(i)).count()
            + french_d2.retained().iter().filter(|i| !a.retained().contains(i)).count();
        assert!(diffs <= 1);
    }

    #[test]
    fn horizon_thresholds() {
        let p = ModelParams::reference();
        let pol = Policy::french_horizon(&p, 5);
        let x = marks(&[0.0, 0.05, 0.09]);
        let mut r = rng();
        assert_eq!(pol.decide(&x, 1, &mut r).unwrap().removed_count(), 3);
        assert_eq!(pol.decide(&x, 2, &mut r).unwrap().retained(), &[0, 1]);
        assert_eq!(pol.decide(&x, 50, &mut r).unwrap().retained(), &[0, 1]);
        assert!(pol.is_horizon_dependent());
    }

    #[test]
    fn custom_rules_are_validated() {
        let x = marks(&[0.01, 0.02]);
        let odd = Policy::Custom(Arc::new(|x: &Pattern| Action::from_removal(x, |i, _| i % 2 == 1)));
        assert_eq!(odd.decide(&x, 1, &mut rng()).unwrap().retained(), &[0]);
    }

    #[test]
    fn spec_strings() {
        for s in ["french:0.05", "french:dstar", "french:horizon", "german:0.05:0.5", "tilde:10", "keepall", "removeall"] {
            let spec: PolicySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        for s in ["french", "french:-1", "german:0.05:1.5", "tilde:0", "harvest", "german:0.1", "french:nan"] {
            assert!(matches!(s.parse::<PolicySpec>(), Err(Error::PolicySpec { .. })), "{s}");
        }
        let p = ModelParams::reference();
        let g = p.logistic_growth();
        let built = PolicySpec::FrenchDstar.build(&p, &g, 10).unwrap();
        assert!(matches!(built, Policy::French(d) if (d - 0.0832305).abs() < 1e-6));
    }

    proptest! {
        #[test]
        fn french_partition_and_nesting(ms in prop::collection::vec(0.0..=0.1f64, 0..30), d in 0.0..0.12f64, e in 0.0..0.12f64) {
            let x = marks(&ms);
            let a = french(&x, d);
            let kept = a.apply(&x).unwrap();
            prop_assert!(kept.iter().all(|p| p.mark < d));
            prop_assert!(a.removed(&x).unwrap().iter().all(|p| p.mark >= d));
            prop_assert_eq!(french(&kept, d).removed_count(), 0);
            let (lo, hi) = if d <= e { (d, e) } else { (e, d) };
            let small = french(&x, lo);
            let large = french(&x, hi);
            prop_assert!(small.retained().iter().all(|i| large.retained().contains(i)));
        }
    }
}
