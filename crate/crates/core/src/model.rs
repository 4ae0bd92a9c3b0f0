//! Model constants and the newborn mark law.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::growth::GrowthFunction;

/// Distribution `ν` of newborn marks on `[0, K]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkLaw {
    /// `K · Beta(a, b)`.
    ScaledBeta { a: f64, b: f64 },
    Uniform,
    PointMass(f64),
}

impl MarkLaw {
    pub fn validate(&self, k: f64) -> Result<()> {
        match *self {
            MarkLaw::ScaledBeta { a, b } if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                Err(Error::Parameter {
                    key: "mark_law",
                    msg: format!("beta shape parameters ({a}, {b}) must be positive"),
                })
            }
            MarkLaw::PointMass(m) if !(m >= 0.0 && m <= k) => Err(Error::Domain {
                what: "mark_law point mass",
                value: m,
                lo: 0.0,
                hi: k,
            }),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: f64, rng: &mut R) -> f64 {
        match *self {
            MarkLaw::ScaledBeta { a, b } => {
                // Parameters are validated on construction of ModelParams.
                let beta = Beta::new(a, b).expect("valid beta parameters");
                (k * beta.sample(rng)).clamp(0.0, k)
            }
            MarkLaw::Uniform => k * rng.random::<f64>(),
            MarkLaw::PointMass(m) => m,
        }
    }

    pub fn mean(&self, k: f64) -> f64 {
        match *self {
            MarkLaw::ScaledBeta { a, b } => k * a / (a + b),
            MarkLaw::Uniform => 0.5 * k,
            MarkLaw::PointMass(m) => m,
        }
    }

    /// Density with respect to Lebesgue measure on `(0, K)`; `None` for the point mass.
    pub fn density(&self, k: f64) -> Option<impl Fn(f64) -> f64> {
        let (a, b, uniform) = match *self {
            MarkLaw::ScaledBeta { a, b } => (a, b, false),
            MarkLaw::Uniform => (1.0, 1.0, true),
            MarkLaw::PointMass(_) => return None,
        };
        let log_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) - k.ln();
        Some(move |m: f64| {
            if uniform {
                return 1.0 / k;
            }
            let u = m / k;
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            (log_norm + (a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p()).exp()
        })
    }
}

impl fmt::Display for MarkLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkLaw::ScaledBeta { a, b } => write!(f, "beta:{a:?}:{b:?}"),
            MarkLaw::Uniform => write!(f, "uniform"),
            MarkLaw::PointMass(m) => write!(f, "point:{m:?}"),
        }
    }
}

impl FromStr for MarkLaw {
    type Err = String;

    /// `beta:<a>:<b>`, `uniform` or `point:<m>`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        match parts.as_slice() {
            ["beta", a, b] => Ok(MarkLaw::ScaledBeta { a: num(a)?, b: num(b)? }),
            ["uniform"] => Ok(MarkLaw::Uniform),
            ["point", m] => Ok(MarkLaw::PointMass(num(m)?)),
            _ => Err(format!("`{s}` is not one of beta:<a>:<b>, uniform, point:<m>")),
        }
    }
}

/// All constants of the birth-death-growth decision process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mark cap `K`; also the hard-core distance.
    pub k: f64,
    /// Logistic growth rate.
    pub lambda: f64,
    /// Per-epoch death probability.
    pub p_d: f64,
    /// Birth intensity, points per unit area per epoch.
    pub beta: f64,
    /// Discount factor.
    pub alpha: f64,
    /// Reward per unit of harvested mark.
    pub r: f64,
    pub window: Window,
    pub mark_law: MarkLaw,
}

impl ModelParams {
    /// The canonical configuration: `W = [0,5]²`, `λ = 2`, `K = 0.1`, `p_d = 0.05`,
    /// `α = 0.9`, `R = 1`, marks `K · Beta(2, 20)`, birth intensity 1.
    pub fn reference() -> Self {
        Self {
            k: 0.1,
            lambda: 2.0,
            p_d: 0.05,
            beta: 1.0,
            alpha: 0.9,
            r: 1.0,
            window: Window::square(5.0).expect("valid window"),
            mark_law: MarkLaw::ScaledBeta { a: 2.0, b: 20.0 },
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_mark_law(mut self, law: MarkLaw) -> Self {
        self.mark_law = law;
        self
    }

    /// Range checks. `beta = 0` is accepted so birth-free dynamics can be simulated.
    pub fn validate(&self) -> Result<()> {
        fn bad(key: &'static str, msg: String) -> Result<()> {
            Err(Error::Parameter { key, msg })
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad("K", format!("{} must be positive", self.k));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", format!("{} must be positive", self.lambda));
        }
        if !(self.p_d > 0.0 && self.p_d < 1.0) {
            return bad("p_d", format!("{} must lie in (0, 1)", self.p_d));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", format!("{} must be nonnegative", self.beta));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return bad("alpha", format!("{} must lie in [0, 1)", self.alpha));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return bad("R", format!("{} must be positive", self.r));
        }
        self.mark_law.validate(self.k)
    }

    /// `α (1 - p_d)`, the per-epoch discounted survival factor.
    pub fn survival_discount(&self) -> f64 {
        self.alpha * (1.0 - self.p_d)
    }

    /// Expected births per epoch, `β |W|`.
    pub fn birth_mass(&self) -> f64 {
        self.beta * self.window.area()
    }

    pub fn logistic_growth(&self) -> GrowthFunction {
        GrowthFunction::Logistic {
            lambda: self.lambda,
            k: self.k,
        }
    }
}
