//! Subcommand implementations behind the `thinning` binary.
//!
//! Each command renders its CSV output to a string that starts with a
//! `# seed=<seed>` comment line; the binary prints it and optionally saves it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analytic_hardcore::{bounds_curve, BoundsCurve};
use crate::analytic_poisson::{d_n, d_star, lemma1_bound, v_n_poisson, v_star_poisson, ValueMethod, ValueReport};
use crate::config::{KernelChoice, RunConfig};
use crate::dynamics::{calibrate_activity, sample_hardcore_gibbs, Kernel};
use crate::error::{Error, Result};
use crate::integrate::IntegrationSpec;
use crate::pattern::{check_hardcore, Pattern};
use crate::policy::PolicySpec;
use crate::rng::RngStream;
use crate::simulate::{default_horizon, estimate_value, SimConfig, SimResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "THINNING_OUT_DIR";

/// Stream ids for the initial-pattern sampler, one per regime.
const GIBBS_STREAM: u64 = 0x4749_4242_0000_0000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueMode {
    Star,
    Horizon(u32),
}

fn header(cfg: &RunConfig) -> String {
    format!("# seed={}\n", cfg.seed)
}

fn csv_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

pub fn load_pattern(path: Option<&Path>) -> Result<Pattern> {
    match path {
        None => Ok(Pattern::empty()),
        Some(p) => {
            let file = fs::File::open(p)?;
            Pattern::read_csv(file)
        }
    }
}

pub fn cmd_dstar(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let d = d_star(p)?;
    let mut s = header(cfg);
    let _ = writeln!(s, "# d_star={:?} attained_at={}", d.value, d.index);
    let _ = writeln!(s, "n,d_n");
    for n in 1..=(d.index + 1).max(2) {
        let _ = writeln!(s, "{n},{:?}", d_n(n, p));
    }
    Ok(s)
}

fn method_name(m: ValueMethod) -> String {
    match m {
        ValueMethod::ClosedForm => "closed_form".into(),
        ValueMethod::MonteCarloIntegral { samples, .. } => format!("monte_carlo_{samples}"),
    }
}

pub fn value_report(cfg: &RunConfig, x: &Pattern, mode: ValueMode) -> Result<ValueReport> {
    let p = &cfg.params;
    x.validate(&p.window, p.k)?;
    match mode {
        ValueMode::Star => v_star_poisson(x, p, cfg.integration),
        ValueMode::Horizon(n) => v_n_poisson(x, n, p, cfg.integration),
    }
}

pub fn cmd_value(cfg: &RunConfig, x: &Pattern, mode: ValueMode) -> Result<String> {
    let r = value_report(cfg, x, mode)?;
    let mut s = header(cfg);
    let _ = writeln!(s, "total,initial_generation_term,birth_stream_term,method,integral_std_error");
    let _ = writeln!(
        s,
        "{:?},{:?},{:?},{},{:?}",
        r.total,
        r.initial_generation_term,
        r.birth_stream_term,
        method_name(r.method),
        r.integral_std_error
    );
    Ok(s)
}

fn checked_curve(cfg: &RunConfig, x: &Pattern, n_max: u32, params: &crate::model::ModelParams) -> Result<BoundsCurve> {
    let curve = bounds_curve(x, n_max, params, &params.logistic_growth(), cfg.integration)?;
    if let Some(n) = curve.first_breach() {
        return Err(Error::Invariant(format!("lower bound exceeds upper bound at n = {n}")));
    }
    Ok(curve)
}

fn render_curve(cfg: &RunConfig, curve: &BoundsCurve) -> Result<String> {
    let mut buf = header(cfg).into_bytes();
    curve.write_csv(&mut buf).map_err(csv_err)?;
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

pub fn cmd_bounds(cfg: &RunConfig, x: &Pattern, n_max: u32) -> Result<String> {
    let p = &cfg.params;
    x.validate(&p.window, p.k)?;
    check_hardcore(x, p.k)?;
    let curve = checked_curve(cfg, x, n_max, p)?;
    render_curve(cfg, &curve)
}

pub fn kernel_for(cfg: &RunConfig) -> Result<Kernel> {
    match cfg.kernel {
        KernelChoice::Poisson => Kernel::poisson(cfg.params),
        KernelChoice::Hardcore => Kernel::hardcore(cfg.params, cfg.params.logistic_growth()),
    }
}

pub fn simulate_result(cfg: &RunConfig, x: &Pattern, spec: &PolicySpec) -> Result<SimResult> {
    let p = &cfg.params;
    let kernel = kernel_for(cfg)?;
    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(x, p));
    let policy = spec.build(p, &kernel.growth, horizon)?;
    let sim = SimConfig::new(kernel, policy, x.clone(), horizon, cfg.replications, cfg.seed).with_label(spec.to_string());
    estimate_value(&sim)
}

pub fn cmd_simulate(cfg: &RunConfig, x: &Pattern, spec: &PolicySpec) -> Result<String> {
    let r = simulate_result(cfg, x, spec)?;
    let mut s = header(cfg);
    let _ = writeln!(s, "# lemma1_bound={:?}", lemma1_bound(x, &cfg.params));
    let mut buf = Vec::new();
    SimResult::write_csv(&[r], &mut buf).map_err(csv_err)?;
    s.push_str(std::str::from_utf8(&buf).expect("ascii csv"));
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct Regime {
    pub name: &'static str,
    pub intensity: f64,
    pub activity: f64,
    pub pattern: Pattern,
    pub curve: BoundsCurve,
}

/// Initial hard-core patterns and bound curves for the sparse and dense regimes.
pub fn figure1_regimes(cfg: &RunConfig) -> Result<Vec<Regime>> {
    let base = cfg.params;
    let integ = match cfg.integration {
        IntegrationSpec::MonteCarlo { .. } => cfg.integration,
        IntegrationSpec::Quadrature { .. } => IntegrationSpec::monte_carlo(cfg.seed),
    };
    let run = RunConfig {
        integration: integ,
        ..cfg.clone()
    };
    [("sparse", cfg.sparse_intensity, 0u64), ("dense", cfg.dense_intensity, 1u64)]
        .into_iter()
        .map(|(name, intensity, id)| {
            let params = base.with_beta(intensity);
            let stream = RngStream::new(cfg.seed, GIBBS_STREAM | id);
            let activity = calibrate_activity(params.window, intensity, params.k, stream)?;
            let sample = sample_hardcore_gibbs(params.window, activity, params.k, cfg.gibbs_sweeps, &params.mark_law, params.k, stream)?;
            let curve = checked_curve(&run, &sample.pattern, cfg.figure_n_max, &params)?;
            Ok(Regime {
                name,
                intensity,
                activity,
                pattern: sample.pattern,
                curve,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Figure1Output {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn cmd_figure1(cfg: &RunConfig, out_dir: &Path) -> Result<Figure1Output> {
    fs::create_dir_all(out_dir)?;
    let regimes = figure1_regimes(cfg)?;
    let mut files = Vec::new();
    let mut manifest = header(cfg);
    let mut summary = header(cfg);
    let _ = writeln!(summary, "regime,relative_gap_n50");
    let _ = writeln!(manifest, "regime,intensity,activity,points,pattern_file,bounds_file");
    for r in &regimes {
        let pattern_name = format!("{}_pattern.csv", r.name);
        let bounds_name = format!("{}_bounds.csv", r.name);

        let mut buf = header(cfg).into_bytes();
        r.pattern.write_csv(&mut buf)?;
        let path = out_dir.join(&pattern_name);
        fs::write(&path, buf)?;
        files.push(path);

        let path = out_dir.join(&bounds_name);
        fs::write(&path, render_curve(cfg, &r.curve)?)?;
        files.push(path);

        let _ = writeln!(
            manifest,
            "{},{:?},{:?},{},{pattern_name},{bounds_name}",
            r.name,
            r.intensity,
            r.activity,
            r.pattern.len()
        );
        let gap = r.curve.relative_gap(50).map(|g| format!("{g:?}")).unwrap_or_else(|| "NA".into());
        let _ = writeln!(summary, "{},{gap}", r.name);
    }
    let path = out_dir.join("manifest.csv");
    fs::write(&path, manifest)?;
    files.push(path);
    Ok(Figure1Output { files, summary })
}

/// Output directory from the flag, the environment, or the config, in that order.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
}
