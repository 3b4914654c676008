use std::fmt::Write as _;

use selfsim_core::asymptotics::{converge_to_limit, leading_order_rate, HarnessGrids, ScalingFunction};
use selfsim_core::kernels::{default_rv_grid, MemoryKernel};
use selfsim_core::specfun::MittagLefflerParams;
use selfsim_core::spectral::{evolve, InitialData, ModeGrid, PD_OMEGA_MAX, PD_SAMPLES};
use selfsim_core::visco::{visco_asymptotics, ViscoKernelPair};
use selfsim_core::volterra::TimeGrid;
use selfsim_core::Hypothesis;

use crate::config::{Command, ConfigErrors, Initial, RunConfig, Scaling, TimeSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("refused: {hypothesis} fails ({detail})")]
    Refused { hypothesis: Hypothesis, detail: String },
    #[error(transparent)]
    Numerics(selfsim_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<selfsim_core::Error> for RunError {
    fn from(e: selfsim_core::Error) -> Self {
        match e {
            selfsim_core::Error::Refused { hypothesis, detail } => RunError::Refused { hypothesis, detail },
            other => RunError::Numerics(other),
        }
    }
}

impl RunError {
    /// 2 for bad input, 3 for a refused hypothesis, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => 2,
            RunError::Refused { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Csv(String),
    Report(String),
}

impl Output {
    pub fn text(&self) -> &str {
        match self {
            Output::Csv(s) | Output::Report(s) => s,
        }
    }
}

/// CSV body preceded by `#` metadata lines.
struct Table {
    meta: String,
    body: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(meta_lines: &[(&str, String)], header: &[&str]) -> Result<Self, RunError> {
        let mut meta = format!("# selfsim {VERSION}\n");
        for (k, v) in meta_lines {
            writeln!(meta, "# {k}: {v}").expect("writing to a String");
        }
        let mut body = csv::Writer::from_writer(Vec::new());
        body.write_record(header)?;
        Ok(Self { meta, body })
    }

    fn row(&mut self, values: &[f64]) -> Result<(), RunError> {
        self.body.write_record(values.iter().map(|v| format!("{v:e}")))?;
        Ok(())
    }

    fn finish(self) -> Result<Output, RunError> {
        let body = self.body.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(Output::Csv(self.meta + &String::from_utf8(body).expect("csv output is utf-8")))
    }
}

fn beta_hat(kernel: &MemoryKernel) -> Option<f64> {
    kernel
        .rv_index_estimate(&default_rv_grid())
        .ok()
        .filter(|e| e.converged)
        .map(|e| e.beta)
}

fn show(beta: Option<f64>) -> String {
    beta.map_or_else(|| "n/a".into(), |b| format!("{b:.6}"))
}

fn meta(cfg: &RunConfig, kernel: String, beta: Option<f64>) -> Vec<(&'static str, String)> {
    vec![
        ("command", cfg.command.name().into()),
        ("config-sha256", cfg.hash.clone()),
        ("kernel", kernel),
        ("beta-hat", show(beta)),
    ]
}

fn scalar_problem(cfg: &RunConfig) -> (InitialData, ModeGrid, &TimeSpec) {
    match (&cfg.initial, cfg.grid, &cfg.time) {
        (Some(Initial::Scalar(u0)), Some(g), Some(t)) => (*u0, g, t),
        _ => unreachable!("parse_config guarantees the blocks for {}", cfg.command.name()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Output, RunError> {
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Converge => converge(cfg),
        Command::Rate => rate(cfg),
        Command::Visco => visco(cfg),
        Command::ValidateKernel => Ok(validate_kernel(&cfg.kernel)),
    }
}

fn solve(cfg: &RunConfig) -> Result<Output, RunError> {
    let (u0, grid, time) = scalar_problem(cfg);
    let t_end = time.t_list.iter().cloned().fold(time.dt, f64::max);
    let tg = TimeGrid::with_step(t_end, time.dt)?;
    let fields = evolve(&cfg.kernel, &u0, &grid, &time.t_list, tg)?;
    let axes: Vec<String> = if grid.radial {
        vec!["i".into()]
    } else {
        (1..=grid.n).map(|d| format!("j{d}")).collect()
    };
    let mut header = vec!["t"];
    header.extend(axes.iter().map(String::as_str));
    header.extend(["xi_sq", "re", "im"]);
    let mut table = Table::new(&meta(cfg, cfg.kernel.description.clone(), beta_hat(&cfg.kernel)), &header)?;
    let width = if grid.radial { 1 } else { grid.n };
    for (f, &t) in fields.iter().zip(&time.t_list) {
        for i in 0..grid.len() {
            let j = grid.lattice(i);
            let mut row = vec![t];
            row.extend(j[..width].iter().map(|&v| v as f64));
            row.extend([grid.xi_sq(i), f.values[i].re, f.values[i].im]);
            table.row(&row)?;
        }
    }
    table.finish()
}

fn converge(cfg: &RunConfig) -> Result<Output, RunError> {
    let (u0, grid, time) = scalar_problem(cfg);
    // kernels without a nominal index (cosine, neg_exponential) are refused by
    // the admissibility checks before the placeholder is used
    let beta = cfg.beta.or(cfg.kernel.beta_nominal).unwrap_or(0.0);
    let sf = match cfg.scaling {
        Scaling::Canonical => ScalingFunction::canonical(cfg.kernel.clone(), beta)?,
        Scaling::Rescaled(c) => ScalingFunction::canonical(cfg.kernel.clone(), beta)?.rescaled_by(c)?,
        Scaling::Power(e) => ScalingFunction::power(cfg.kernel.clone(), beta, e)?,
    };
    let grids = HarnessGrids { modes: grid, dt: time.dt };
    let rep = converge_to_limit(&u0, &sf, &time.big_t_list, &time.t_list, cfg.s, grids)?;
    let mut lines = meta(cfg, cfg.kernel.description.clone(), Some(rep.beta_hat));
    lines.push(("beta", format!("{beta}")));
    lines.push(("s", format!("{}", cfg.s)));
    if let Some((slope, r2)) = rep.rate_fit {
        lines.push(("rate-fit", format!("slope={slope:.6} r2={r2:.6}")));
    }
    let mut table = Table::new(&lines, &["big_t", "t", "distance", "reference_norm", "relative"])?;
    for r in &rep.rows {
        table.row(&[r.big_t, r.t, r.distance, r.reference_norm, r.distance / r.reference_norm])?;
    }
    table.finish()
}

fn rate(cfg: &RunConfig) -> Result<Output, RunError> {
    let (u0, grid, time) = scalar_problem(cfg);
    let grids = HarnessGrids { modes: grid, dt: time.dt };
    let rep = leading_order_rate(&cfg.kernel, &u0, &time.t_list, cfg.s, grids)?;
    let mut lines = meta(cfg, cfg.kernel.description.clone(), beta_hat(&cfg.kernel));
    lines.push(("a-infinity", format!("{}", rep.a_infinity)));
    lines.push(("s", format!("{}", cfg.s)));
    let mut table = Table::new(&lines, &["t", "distance", "scaled"])?;
    for r in &rep.rows {
        table.row(&[r.t, r.distance, r.scaled])?;
    }
    table.finish()
}

fn visco(cfg: &RunConfig) -> Result<Output, RunError> {
    let (Some(Initial::Vector(v0)), Some(grid), Some(time), Some(bulk)) = (&cfg.initial, cfg.grid, &cfg.time, &cfg.bulk)
    else {
        unreachable!("parse_config guarantees the visco blocks")
    };
    let pair = ViscoKernelPair::new(cfg.kernel.clone(), bulk.clone());
    let rep = visco_asymptotics(&pair, v0, &time.t_list, cfg.s, &grid, time.dt)?;
    let beta = beta_hat(&pair.beta_kernel()?);
    let kernels = format!("shear {}; bulk {}", pair.shear.description, pair.bulk.description);
    let mut lines = meta(cfg, kernels, beta);
    lines.push(("stokes-a", format!("{}", rep.a_lim)));
    lines.push(("stokes-b", format!("{}", rep.b_lim)));
    lines.push(("s", format!("{}", cfg.s)));
    if rep.degenerate_mass {
        lines.push(("note", "zero momentum: the Stokes target vanishes".into()));
    }
    let momentum = v0.momentum();
    lines.push(("momentum", format!("{:e},{:e},{:e}", momentum[0], momentum[1], momentum[2])));
    let mut table = Table::new(&lines, &["t", "distance", "scaled"])?;
    for &(t, d, scaled) in &rep.rows {
        table.row(&[t, d, scaled])?;
    }
    table.finish()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Positive-definiteness and regular-variation report for one kernel.
pub fn validate_kernel(kernel: &MemoryKernel) -> Output {
    let pd = kernel.check_positive_definite(PD_OMEGA_MAX, PD_SAMPLES);
    let pd_word = if pd.certified { yes_no(pd.pass) } else { "unverified" };
    let est = kernel.rv_index_estimate(&default_rv_grid()).ok();
    let rv = est.as_ref().is_some_and(|e| e.converged);
    let mut out = String::new();
    writeln!(out, "kernel: {}", kernel.description).unwrap();
    writeln!(out, "positive-definite: {pd_word}, regularly-varying: {}", yes_no(rv)).unwrap();
    if pd.certified {
        writeln!(out, "symbol minimum: {:e} at omega = {:e}", pd.min_value, pd.argmin_omega).unwrap();
    }
    writeln!(out, "beta-hat: {}", show(est.filter(|e| e.converged).map(|e| e.beta))).unwrap();
    let a_inf = kernel.a_infinity().map_or_else(|| "n/a".into(), |a| format!("{a}"));
    writeln!(out, "a-infinity: {a_inf}").unwrap();
    Output::Report(out)
}

/// `E_α(z)` on `n` equally spaced points of `[zmin, zmax]`, `zmax ≤ 0`.
pub fn ml_table(alpha: f64, zmin: f64, zmax: f64, n: usize) -> Result<Output, RunError> {
    if !(zmin <= zmax && zmax <= 0.0) || n == 0 {
        return Err(RunError::Usage(format!(
            "ml needs zmin <= zmax <= 0 and n >= 1 (got zmin={zmin}, zmax={zmax}, n={n})"
        )));
    }
    let ml = MittagLefflerParams::new(alpha)?;
    let mut table = Table::new(&[("command", "ml".into()), ("alpha", format!("{alpha}"))], &["z", "value"])?;
    for i in 0..n {
        let z = if n == 1 {
            zmin
        } else {
            zmin + (zmax - zmin) * i as f64 / (n - 1) as f64
        };
        table.row(&[z, ml.eval(z)?])?;
    }
    table.finish()
}
