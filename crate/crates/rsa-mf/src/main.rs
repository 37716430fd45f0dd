//! Command-line driver: one subcommand per output class (landscape solves,
//! sweeps, transition lines, jumps, critical thresholds, analytic lambda = 0
//! solutions, rotor-model and finite-N checks).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rsa_mf::config::RunConfig;
use rsa_mf::error::Error;
use rsa_mf::model::AnnealPoint;
use rsa_mf::output::{Cell, Format, Table};
use rsa_mf::phase::PhaseConfig;
use rsa_mf::{ed, phase, solver, svmc};

#[derive(Parser)]
#[command(name = "rsa-mf", version, about = "Mean-field statics of reverse annealing for the p-spin model")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// All configuration is flat, so every subcommand shares one flag set;
/// each subcommand validates the fields it needs.
#[derive(Args)]
struct Flags {
    /// Flat TOML config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    c: Option<f64>,
    /// Field distribution: none, bimodal or gaussian.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Gauss-Hermite node count (gaussian field only).
    #[arg(long)]
    nodes: Option<usize>,
    /// Antiferromagnetic transverse strength; omit for the stoquastic model.
    #[arg(long)]
    nu: Option<f64>,
    /// Inverse temperature, a positive number or "inf".
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    s_min: Option<f64>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    s_step: Option<f64>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_step: Option<f64>,
    /// Comma-separated system sizes (ed-scaling).
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated inverse temperatures (svmc-check).
    #[arg(long)]
    beta_list: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stationary branches at one (s, lambda) point.
    Solve(Flags),
    /// Global-minimum magnetization and free energy along an s grid.
    Sweep(Flags),
    /// First-order transition line over a lambda grid, with breaks.
    PhaseLines(Flags),
    /// Magnetization jump along the transition line per lambda.
    Jump(Flags),
    /// Critical initial-overlap fraction where the line starts to break.
    CriticalC(Flags),
    /// Analytic solution set at lambda = 0 (bimodal field).
    Lambda0(Flags),
    /// Rotor-model equilibrium free energy vs the quantum T=0 value.
    SvmcCheck(Flags),
    /// Finite-size ground-state energies vs the mean-field limit.
    EdScaling(Flags),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Solve(_) => "solve",
            Cmd::Sweep(_) => "sweep",
            Cmd::PhaseLines(_) => "phase-lines",
            Cmd::Jump(_) => "jump",
            Cmd::CriticalC(_) => "critical-c",
            Cmd::Lambda0(_) => "lambda0",
            Cmd::SvmcCheck(_) => "svmc-check",
            Cmd::EdScaling(_) => "ed-scaling",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Cmd::Solve(f)
            | Cmd::Sweep(f)
            | Cmd::PhaseLines(f)
            | Cmd::Jump(f)
            | Cmd::CriticalC(f)
            | Cmd::Lambda0(f)
            | Cmd::SvmcCheck(f)
            | Cmd::EdScaling(f) => f,
        }
    }
}

impl Flags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            command: None,
            p: self.p,
            c: self.c,
            field: self.field.clone(),
            h0: self.h0,
            sigma: self.sigma,
            nodes: self.nodes,
            nu: self.nu,
            beta: self.beta.clone(),
            s: self.s,
            lambda: self.lambda,
            s_min: self.s_min,
            s_max: self.s_max,
            s_step: self.s_step,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            lambda_step: self.lambda_step,
            n_list: self.n_list.clone(),
            beta_list: self.beta_list.clone(),
            output: self.output.clone(),
            format: self.format.clone(),
            workers: self.workers,
        }
    }
}

fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::Parameter(format!("missing required field {key}")))
}

fn phase_config(cfg: &RunConfig) -> PhaseConfig {
    let mut pc = PhaseConfig::default();
    if let Some(step) = cfg.s_step {
        pc.s_step = step;
    }
    if let Some(step) = cfg.lambda_step {
        pc.lambda_step = step;
    }
    pc
}

fn base_table(cfg: &RunConfig, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    for (k, v) in cfg.to_metadata() {
        t.meta(&k, v);
    }
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t.meta(
        "axes",
        "s in [0,1] (target-Hamiltonian weight), lambda in [0,1] (transverse-driver weight)",
    );
    t
}

fn branch_cells(b: &solver::Branch) -> Vec<Cell> {
    vec![
        Cell::Float(b.m()),
        b.mx().map_or(Cell::Empty, Cell::Float),
        Cell::Float(b.f),
        Cell::Int(b.stable as i64),
        Cell::Str(b.source.to_string()),
    ]
}

fn run_solve(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let beta = cfg.beta()?;
    let s = require(cfg.s, "s")?;
    let lambda = require(cfg.lambda, "lambda")?;
    let point = AnnealPoint::for_spec(s, lambda, &spec)?;
    let branches = if spec.is_nonstoquastic() {
        solver::enumerate_branches_ns(&point, &spec, beta)?
    } else {
        solver::enumerate_branches(&point, &spec, beta)?
    };
    let global = solver::global_min(&point, &spec, beta)?;
    let mut t = base_table(cfg, &["m", "mx", "f", "stable", "source"]);
    t.meta("global_m", rsa_mf::output::fmt_sig(global.m()));
    t.meta("global_f", rsa_mf::output::fmt_sig(global.f));
    t.meta("degenerate", global.degenerate as i64);
    for b in &branches {
        t.row(branch_cells(b));
    }
    Ok(t)
}

fn run_sweep(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let lambda = require(cfg.lambda, "lambda")?;
    let s_grid = cfg.s_grid()?;
    let rows = phase::sweep_s_cfg(lambda, &spec, &s_grid, &phase_config(cfg))?;
    let mut t = base_table(cfg, &["s", "m", "f"]);
    for (s, b) in &rows {
        t.row(vec![Cell::Float(*s), Cell::Float(b.m()), Cell::Float(b.f)]);
    }
    Ok(t)
}

fn transition_cells(p: &phase::TransitionPoint) -> Vec<Cell> {
    vec![
        Cell::Float(p.lambda),
        Cell::Float(p.s_star),
        Cell::Str(p.order.to_string()),
        Cell::Float(p.delta_m),
        Cell::Float(p.m_low),
        Cell::Float(p.m_high),
    ]
}

fn run_phase_lines(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let lambda_grid = cfg.lambda_grid()?;
    let line = phase::trace_line_cfg(&spec, &lambda_grid, &phase_config(cfg))?;
    let mut t = base_table(cfg, &["lambda", "s_star", "order", "delta_m", "m_low", "m_high"]);
    for (i, (lo, hi)) in line.breaks.iter().enumerate() {
        t.meta(&format!("break_{i}"), format!("{lo}..{hi}"));
    }
    for p in &line.points {
        t.row(transition_cells(p));
    }
    Ok(t)
}

fn run_jump(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let lambda_grid = cfg.lambda_grid()?;
    let rows = phase::jump_profile_cfg(&spec, &lambda_grid, &phase_config(cfg))?;
    let mut t = base_table(cfg, &["lambda", "delta_m"]);
    for (lambda, dm) in &rows {
        t.row(vec![Cell::Float(*lambda), Cell::Float(*dm)]);
    }
    Ok(t)
}

fn run_critical_c(cfg: &RunConfig) -> Result<Table, Error> {
    // c is the scan variable here; the template value is irrelevant.
    let mut with_c = cfg.clone();
    with_c.c = Some(with_c.c.unwrap_or(0.9));
    let spec = with_c.model_spec()?;
    let p = require(cfg.p, "p")?;
    let c_crit = phase::critical_c_cfg(&spec, p, &phase_config(cfg))?;
    let mut t = base_table(cfg, &["c_crit"]);
    t.row(vec![Cell::Float(c_crit)]);
    Ok(t)
}

fn run_lambda0(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let s = require(cfg.s, "s")?;
    let branches = phase::lambda0_solutions(&spec, s)?;
    let mut t = base_table(cfg, &["m", "f", "source"]);
    for b in &branches {
        t.row(vec![
            Cell::Float(b.m()),
            Cell::Float(b.f),
            Cell::Str(b.source.to_string()),
        ]);
    }
    Ok(t)
}

fn run_svmc_check(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    // Coarser default grid than the phase scans: one solve per grid point.
    let mut grid_cfg = cfg.clone();
    grid_cfg.s_step = Some(cfg.s_step.unwrap_or(0.05));
    grid_cfg.lambda_step = Some(cfg.lambda_step.unwrap_or(0.05));
    let mut points = Vec::new();
    for &s in &grid_cfg.s_grid()? {
        for &lambda in &grid_cfg.lambda_grid()? {
            points.push(AnnealPoint::for_spec(s, lambda, &spec)?);
        }
    }
    let betas: Vec<f64> = RunConfig::parse_list(
        cfg.beta_list.as_deref().unwrap_or("1e2,1e3,1e4"),
        "beta_list",
    )?;
    let rows = svmc::svmc_quantum_gap(&points, &spec, &betas)?;
    let mut t = base_table(cfg, &["beta", "max_gap"]);
    for r in &rows {
        t.row(vec![Cell::Float(r.beta), Cell::Float(r.max_gap)]);
    }
    Ok(t)
}

fn run_ed_scaling(cfg: &RunConfig) -> Result<Table, Error> {
    let spec = cfg.model_spec()?;
    let s = require(cfg.s, "s")?;
    let lambda = require(cfg.lambda, "lambda")?;
    let point = AnnealPoint::for_spec(s, lambda, &spec)?;
    let sizes: Vec<usize> =
        RunConfig::parse_list(cfg.n_list.as_deref().unwrap_or("40,80,160"), "n_list")?;
    let rows = ed::scaling_report(&spec, &point, &sizes)?;
    let mut t = base_table(cfg, &["n", "energy_per_site", "mf_free_energy", "gap", "ratio"]);
    for r in &rows {
        t.row(vec![
            Cell::Int(r.n as i64),
            Cell::Float(r.energy_per_site),
            Cell::Float(r.mf_free_energy),
            Cell::Float(r.gap),
            r.ratio.map_or(Cell::Empty, Cell::Float),
        ]);
    }
    Ok(t)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let flags = cli.cmd.flags();
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    }
    .overlay(&flags.to_config());
    cfg.command = Some(cli.cmd.name().to_string());

    let workers = flags
        .workers
        .or_else(|| std::env::var("RSA_MF_WORKERS").ok().and_then(|v| v.parse().ok()))
        .or(cfg.workers);
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Parameter("workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parameter(format!("workers: {e}")))?;
    }

    let table = match &cli.cmd {
        Cmd::Solve(_) => run_solve(&cfg)?,
        Cmd::Sweep(_) => run_sweep(&cfg)?,
        Cmd::PhaseLines(_) => run_phase_lines(&cfg)?,
        Cmd::Jump(_) => run_jump(&cfg)?,
        Cmd::CriticalC(_) => run_critical_c(&cfg)?,
        Cmd::Lambda0(_) => run_lambda0(&cfg)?,
        Cmd::SvmcCheck(_) => run_svmc_check(&cfg)?,
        Cmd::EdScaling(_) => run_ed_scaling(&cfg)?,
    };

    let format: Format = cfg.format.as_deref().unwrap_or("csv").parse()?;
    table.write(cfg.output.as_deref().map(std::path::Path::new), format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parameter(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Size(_) => 2,
                Error::Convergence(_) | Error::NoThreshold(_) => 3,
                Error::Io(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}
