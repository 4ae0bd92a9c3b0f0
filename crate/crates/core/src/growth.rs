//! Mark growth: the logistic (Verhulst) flow and general bounded growth maps.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

const CUSTOM_GRID_POINTS: usize = 10_001;

type StepFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum GrowthFunction {
    /// Logistic growth with rate `lambda` towards the cap `k`.
    Logistic { lambda: f64, k: f64 },
    /// A single-step map `g: [0, k] → [0, k]` with `m <= g(m) <= k`.
    Custom { k: f64, step: Arc<StepFn> },
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Logistic { lambda, k } => f
                .debug_struct("Logistic")
                .field("lambda", lambda)
                .field("k", k)
                .finish(),
            Self::Custom { k, .. } => f.debug_struct("Custom").field("k", k).finish_non_exhaustive(),
        }
    }
}

impl GrowthFunction {
    pub fn logistic(lambda: f64, k: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter {
                key: "lambda",
                msg: format!("{lambda} must be positive"),
            });
        }
        check_cap(k)?;
        Ok(Self::Logistic { lambda, k })
    }

    /// Wraps a growth map after checking `m <= g(m) <= k` on a uniform grid of `[0, k]`.
    pub fn custom<F>(k: f64, g: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_cap(k)?;
        for i in 0..CUSTOM_GRID_POINTS {
            let m = k * i as f64 / (CUSTOM_GRID_POINTS - 1) as f64;
            let gm = g(m);
            if !(gm >= m && gm <= k) {
                return Err(Error::Growth { m, gm });
            }
        }
        Ok(Self::Custom { k, step: Arc::new(g) })
    }

    pub fn cap(&self) -> f64 {
        match self {
            Self::Logistic { k, .. } | Self::Custom { k, .. } => *k,
        }
    }

    fn check_mark(&self, m: f64) -> Result<()> {
        let k = self.cap();
        if m >= 0.0 && m <= k {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "mark",
                value: m,
                lo: 0.0,
                hi: k,
            })
        }
    }

    /// One epoch of growth.
    pub fn step(&self, m: f64) -> Result<f64> {
        self.check_mark(m)?;
        Ok(self.step_unchecked(m))
    }

    pub(crate) fn step_unchecked(&self, m: f64) -> f64 {
        match self {
            Self::Logistic { lambda, k } => logistic_closed(m, 1, *lambda, *k),
            Self::Custom { step, k } => step(m).clamp(m, *k),
        }
    }

    /// `g^(n)(m)`, the `n`-fold composition.
    pub fn iterate(&self, m: f64, n: u32) -> Result<f64> {
        self.check_mark(m)?;
        Ok(match self {
            Self::Logistic { lambda, k } => logistic_closed(m, n, *lambda, *k),
            Self::Custom { .. } => (0..n).fold(m, |acc, _| self.step_unchecked(acc)),
        })
    }

    /// The orbit `g^(0)(m), g^(1)(m), ...`.
    ///
    /// Logistic orbits are evaluated in closed form at each index rather than by
    /// repeated stepping.
    pub fn orbit(&self, m: f64) -> Result<Orbit<'_>> {
        self.check_mark(m)?;
        Ok(Orbit {
            growth: self,
            start: m,
            current: m,
            index: 0,
        })
    }
}

fn check_cap(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            key: "K",
            msg: format!("{k} must be positive"),
        })
    }
}

pub struct Orbit<'a> {
    growth: &'a GrowthFunction,
    start: f64,
    current: f64,
    index: u32,
}

impl Iterator for Orbit<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let value = match self.growth {
            GrowthFunction::Logistic { lambda, k } => logistic_closed(self.start, self.index, *lambda, *k),
            GrowthFunction::Custom { .. } => {
                if self.index > 0 {
                    self.current = self.growth.step_unchecked(self.current);
                }
                self.current
            }
        };
        self.index = self.index.saturating_add(1);
        Some(value)
    }
}

fn logistic_closed(m0: f64, n: u32, lambda: f64, k: f64) -> f64 {
    if m0 == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return m0;
    }
    let v = k / (1.0 + (k / m0 - 1.0) * (-lambda * n as f64).exp());
    v.clamp(m0, k)
}

/// Mark after `n` epochs of logistic growth from `m0`; `g^(n)(0) = 0`.
pub fn logistic_n(m0: f64, n: u32, lambda: f64, k: f64) -> Result<f64> {
    if !(m0 >= 0.0 && m0 <= k) {
        return Err(Error::Domain {
            what: "mark",
            value: m0,
            lo: 0.0,
            hi: k,
        });
    }
    Ok(logistic_closed(m0, n, lambda, k))
}
