//! Flat `key = value` run configuration with `#` comments.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::integrate::IntegrationSpec;
use crate::model::{MarkLaw, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Poisson,
    Hardcore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub kernel: KernelChoice,
    pub integration: IntegrationSpec,
    /// `None` picks the certified default horizon.
    pub horizon: Option<u32>,
    pub replications: u32,
    pub seed: u64,
    pub out: Option<String>,
    pub sparse_intensity: f64,
    pub dense_intensity: f64,
    pub gibbs_sweeps: usize,
    pub figure_n_max: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::reference(),
            kernel: KernelChoice::Poisson,
            integration: IntegrationSpec::default(),
            horizon: None,
            replications: 1_000,
            seed: 1,
            out: None,
            sparse_intensity: 1.0,
            dense_intensity: 4.3,
            gibbs_sweeps: 500,
            figure_n_max: 100,
        }
    }
}

pub const KEYS: [&str; 20] = [
    "K",
    "lambda",
    "p_d",
    "beta",
    "alpha",
    "R",
    "window",
    "mark_law",
    "kernel",
    "integration",
    "rel_tol",
    "samples",
    "horizon",
    "replications",
    "seed",
    "out",
    "sparse_intensity",
    "dense_intensity",
    "gibbs_sweeps",
    "figure_n_max",
];

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config {
        line,
        msg: format!("{key}: cannot parse '{v}'"),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut samples: Option<usize> = None;
        let mut rel_tol: Option<f64> = None;
        let mut mode = "quadrature".to_string();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected key = value, found '{body}'"),
            })?;
            cfg.set_inner(line, key.trim(), value.trim(), &mut mode, &mut samples, &mut rel_tol)?;
        }
        cfg.integration = integration_from(0, &mode, samples, rel_tol, cfg.seed)?;
        cfg.params.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` override, as given on the command line.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            msg: format!("expected key=value, found '{assignment}'"),
        })?;
        let (mut mode, mut samples, mut rel_tol) = match self.integration {
            IntegrationSpec::Quadrature { rel_tol } => ("quadrature".to_string(), None, Some(rel_tol)),
            IntegrationSpec::MonteCarlo { samples, .. } => ("montecarlo".to_string(), Some(samples), None),
        };
        self.set_inner(0, key.trim(), value.trim(), &mut mode, &mut samples, &mut rel_tol)?;
        self.integration = integration_from(0, &mode, samples, rel_tol, self.seed)?;
        self.params.validate()
    }

    /// Replaces the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let IntegrationSpec::MonteCarlo { samples, .. } = self.integration {
            self.integration = IntegrationSpec::MonteCarlo { samples, seed };
        }
        self
    }

    fn set_inner(
        &mut self,
        line: usize,
        key: &str,
        v: &str,
        mode: &mut String,
        samples: &mut Option<usize>,
        rel_tol: &mut Option<f64>,
    ) -> Result<()> {
        let p = &mut self.params;
        match key {
            "K" => p.k = parse_num(line, key, v)?,
            "lambda" => p.lambda = parse_num(line, key, v)?,
            "p_d" => p.p_d = parse_num(line, key, v)?,
            "beta" => p.beta = parse_num(line, key, v)?,
            "alpha" => p.alpha = parse_num(line, key, v)?,
            "R" => p.r = parse_num(line, key, v)?,
            "window" => {
                let parts: Vec<f64> = v
                    .split(',')
                    .map(|s| parse_num(line, key, s.trim()))
                    .collect::<Result<_>>()?;
                if parts.len() != 4 {
                    return Err(Error::Config {
                        line,
                        msg: "window: expected x_min,y_min,x_max,y_max".into(),
                    });
                }
                p.window = Window::new(parts[0], parts[1], parts[2], parts[3]).map_err(|e| Error::Config {
                    line,
                    msg: format!("window: {e}"),
                })?;
            }
            "mark_law" => {
                p.mark_law = v.parse::<MarkLaw>().map_err(|e| Error::Config {
                    line,
                    msg: format!("mark_law: {e}"),
                })?
            }
            "kernel" => {
                self.kernel = match v {
                    "poisson" => KernelChoice::Poisson,
                    "hardcore" => KernelChoice::Hardcore,
                    _ => {
                        return Err(Error::Config {
                            line,
                            msg: format!("kernel: expected poisson or hardcore, found '{v}'"),
                        })
                    }
                }
            }
            "integration" => match v {
                "quadrature" | "montecarlo" => *mode = v.to_string(),
                _ => {
                    return Err(Error::Config {
                        line,
                        msg: format!("integration: expected quadrature or montecarlo, found '{v}'"),
                    })
                }
            },
            "rel_tol" => *rel_tol = Some(parse_num(line, key, v)?),
            "samples" => *samples = Some(parse_num(line, key, v)?),
            "horizon" => {
                self.horizon = if v == "auto" {
                    None
                } else {
                    Some(parse_num(line, key, v)?)
                }
            }
            "replications" => self.replications = parse_num(line, key, v)?,
            "seed" => self.seed = parse_num(line, key, v)?,
            "out" => self.out = if v.is_empty() { None } else { Some(v.to_string()) },
            "sparse_intensity" => self.sparse_intensity = parse_num(line, key, v)?,
            "dense_intensity" => self.dense_intensity = parse_num(line, key, v)?,
            "gibbs_sweeps" => self.gibbs_sweeps = parse_num(line, key, v)?,
            "figure_n_max" => self.figure_n_max = parse_num(line, key, v)?,
            _ => {
                return Err(Error::Config {
                    line,
                    msg: format!("unknown key '{key}'"),
                })
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let p = &self.params;
        let w = &p.window;
        let mut s = String::new();
        let _ = writeln!(s, "K = {:?}", p.k);
        let _ = writeln!(s, "lambda = {:?}", p.lambda);
        let _ = writeln!(s, "p_d = {:?}", p.p_d);
        let _ = writeln!(s, "beta = {:?}", p.beta);
        let _ = writeln!(s, "alpha = {:?}", p.alpha);
        let _ = writeln!(s, "R = {:?}", p.r);
        let _ = writeln!(s, "window = {:?},{:?},{:?},{:?}", w.x_min(), w.y_min(), w.x_max(), w.y_max());
        let _ = writeln!(s, "mark_law = {}", p.mark_law);
        let kernel = match self.kernel {
            KernelChoice::Poisson => "poisson",
            KernelChoice::Hardcore => "hardcore",
        };
        let _ = writeln!(s, "kernel = {kernel}");
        let (mode, rel_tol, samples) = match self.integration {
            IntegrationSpec::Quadrature { rel_tol } => ("quadrature", rel_tol, 1_000),
            IntegrationSpec::MonteCarlo { samples, .. } => ("montecarlo", 1e-9, samples),
        };
        let _ = writeln!(s, "integration = {mode}");
        let _ = writeln!(s, "rel_tol = {rel_tol:?}");
        let _ = writeln!(s, "samples = {samples}");
        match self.horizon {
            Some(h) => {
                let _ = writeln!(s, "horizon = {h}");
            }
            None => {
                let _ = writeln!(s, "horizon = auto");
            }
        }
        let _ = writeln!(s, "replications = {}", self.replications);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out = {}", self.out.as_deref().unwrap_or(""));
        let _ = writeln!(s, "sparse_intensity = {:?}", self.sparse_intensity);
        let _ = writeln!(s, "dense_intensity = {:?}", self.dense_intensity);
        let _ = writeln!(s, "gibbs_sweeps = {}", self.gibbs_sweeps);
        let _ = writeln!(s, "figure_n_max = {}", self.figure_n_max);
        s
    }
}

fn integration_from(line: usize, mode: &str, samples: Option<usize>, rel_tol: Option<f64>, seed: u64) -> Result<IntegrationSpec> {
    match mode {
        "montecarlo" => {
            let samples = samples.unwrap_or(1_000);
            if samples == 0 {
                return Err(Error::Config {
                    line,
                    msg: "samples: must be positive".into(),
                });
            }
            Ok(IntegrationSpec::MonteCarlo { samples, seed })
        }
        _ => {
            let rel_tol = rel_tol.unwrap_or(1e-9);
            if !(rel_tol > 0.0 && rel_tol < 1.0) {
                return Err(Error::Config {
                    line,
                    msg: "rel_tol: must lie in (0, 1)".into(),
                });
            }
            Ok(IntegrationSpec::Quadrature { rel_tol })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        for key in KEYS {
            assert!(text.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key}");
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse("# model\n\nbeta = 4.3  # dense\nintegration = montecarlo\nsamples = 200\nseed = 9\n").unwrap();
        assert_eq!(cfg.params.beta, 4.3);
        assert_eq!(cfg.integration, IntegrationSpec::MonteCarlo { samples: 200, seed: 9 });
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = RunConfig::parse("alpha = 0.9\np_d = 1.2\n").unwrap_err();
        assert!(e.to_string().contains("p_d"), "{e}");
        let e = RunConfig::parse("alpha = 0.9\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = RunConfig::parse("K = abc\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        assert!(RunConfig::parse("window = 0,0,5\n").is_err());
        assert!(RunConfig::parse("kernel = matern\n").is_err());
        assert!(RunConfig::parse("just words\n").is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = RunConfig::default();
        cfg.set("beta=0").unwrap();
        cfg.set("kernel=hardcore").unwrap();
        assert_eq!(cfg.params.beta, 0.0);
        assert_eq!(cfg.kernel, KernelChoice::Hardcore);
        assert!(cfg.set("alpha=1.5").is_err());
        let cfg = RunConfig::parse("integration = montecarlo\n").unwrap().with_seed(77);
        assert_eq!(cfg.integration, IntegrationSpec::MonteCarlo { samples: 1_000, seed: 77 });
    }

    proptest! {
        #[test]
        fn random_configs_round_trip(
            k in 0.01..1.0f64, lambda in 0.01..10.0f64, p_d in 0.001..0.999f64, beta in 0.0..10.0f64,
            alpha in 0.0..0.999f64, r in 0.1..5.0f64, side in 0.5..20.0f64, a in 0.5..30.0f64, b in 0.5..30.0f64,
            mc in any::<bool>(), samples in 1usize..5000, horizon in proptest::option::of(1u32..500),
            seed in any::<u64>(), reps in 2u32..10_000,
        ) {
            let mut params = ModelParams {
                k, lambda, p_d, beta, alpha, r,
                window: Window::new(-1.0, 0.5, side, side + 0.5).unwrap(),
                ..ModelParams::reference()
            };
            params.mark_law = MarkLaw::ScaledBeta { a, b };
            let cfg = RunConfig {
                params,
                kernel: if mc { KernelChoice::Hardcore } else { KernelChoice::Poisson },
                integration: if mc { IntegrationSpec::MonteCarlo { samples, seed } } else { IntegrationSpec::Quadrature { rel_tol: 1e-7 } },
                horizon,
                replications: reps,
                seed,
                out: Some("results/run".into()),
                ..RunConfig::default()
            };
            let again = RunConfig::parse(&cfg.serialize()).unwrap();
            prop_assert_eq!(&again, &cfg);
            prop_assert_eq!(again.serialize(), cfg.serialize());
        }
    }
}
