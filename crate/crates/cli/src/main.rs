use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stopgo::composite::{Composite, CompositeSpec};
use stopgo::experiments::{
    emit_plot_script, error_sweep, order_fit, read_records, seed_solution, verify_theorem_scalings, write_case,
    ExperimentConfig, PlotTable, SeedPolicy,
};
use stopgo::limit::{eta_star, LimitContext};
use stopgo::profile::Profile;
use stopgo::ring::{
    estimate_wave_speed, ov_residual_check, step_rk4, write_trajectories, HeadwaySeries, Reconstruction, RingState,
    Trajectories,
};
use stopgo::spectral::{continue_in_beta, io, log_ladder, ContinuationOptions};
use stopgo::{Error, OVParams, Result};

#[derive(Parser)]
#[command(name = "stopgo", version, about = "Stop-and-go traveling waves of the optimal-velocity model")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the step-limit fronts u_i, u_d and the first-order correction.
    LimitProfiles(LimitArgs),
    /// Tabulate a composite profile built from the limit fronts.
    Compose(ComposeArgs),
    /// Seed and solve for a periodic wave at one steepness.
    SolvePeriodic(SolveArgs),
    /// Continue a stored solution in the steepness parameter.
    ContinueBeta(ContinueArgs),
    /// Integrate the ring of vehicles from a perturbed uniform flow.
    Simulate(SimulateArgs),
    /// Vehicle trajectories generated by a stored periodic solution.
    Reconstruct(ReconstructArgs),
    /// Error of composites against solutions across the steepness ladder.
    ErrorSweep(ConfigArgs),
    /// Convergence order of one error curve.
    OrderFit(FitArgs),
    /// Front scaling, amplitude probe and conservation checks.
    Verify(ConfigArgs),
}

#[derive(Args, Clone, Copy)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.6)]
    a: f64,
    #[arg(long, default_value_t = 0.0336)]
    v0: f64,
    #[arg(long, default_value_t = 2.0 / 0.0223)]
    beta: f64,
    #[arg(long, default_value_t = 0.025)]
    l: f64,
    #[arg(long, default_value_t = 0.913)]
    m: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<OVParams> {
        OVParams::new(self.a, self.v0, self.beta, self.l, self.m)
    }
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Amplitude; defaults to the matched value η*.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    t_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    t_max: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Period (vehicle count) of the periodic composite.
    #[arg(long, default_value_t = 40.0)]
    n: f64,
    /// Circuit length; defaults to N·l.
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    r: f64,
    /// Build the homoclinic composite with this layer separation instead.
    #[arg(long)]
    homoclinic: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedArg {
    Simulator,
    Composite,
}

impl From<SeedArg> for SeedPolicy {
    fn from(s: SeedArg) -> Self {
        match s {
            SeedArg::Simulator => SeedPolicy::Simulator,
            SeedArg::Composite => SeedPolicy::Composite,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 40)]
    n: usize,
    /// Circuit length; defaults to N·l.
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, value_enum, default_value_t = SeedArg::Simulator)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ContinueArgs {
    /// Solution file written by `solve-periodic`.
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    to: f64,
    /// Number of logarithmically spaced targets after the start.
    #[arg(long, default_value_t = 8)]
    steps: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, default_value_t = 3000.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    /// Relative amplitude of the initial single-mode headway perturbation.
    #[arg(long, default_value_t = 0.01)]
    amp: f64,
    #[arg(long, default_value_t = 1)]
    mode: usize,
    /// Steps between written trajectory samples.
    #[arg(long, default_value_t = 50)]
    sample_every: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    periods: f64,
    #[arg(long, default_value_t = 400)]
    samples: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment file; the built-in (N, L) = (40, 1) setting when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// errors.csv written by `error-sweep`.
    #[arg(long)]
    table: PathBuf,
    /// Cutoff width to fit; the first one in the table when omitted.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [200.0, 2000.0])]
    window: Vec<f64>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
}

fn limit_profiles(args: &LimitArgs) -> Result<()> {
    let p = args.model.params()?;
    let d = eta_star(&p);
    let ctx = LimitContext::new(&p, args.eta.unwrap_or(d.eta_star))?;
    eprintln!(
        "X = {:.14}  eta* = {:.14}  c* = {:.14}  c_eta = {:.9}",
        d.x_root, d.eta_star, d.c_star, d.c_eta
    );
    eprintln!(
        "eta = {}  c0 = {:.14}  kappa = {:.14}  zeta0 = {:.6e}",
        ctx.eta,
        ctx.c0,
        ctx.kappa,
        ctx.zeta0()
    );
    let mut s = String::from("t,u_i,u_d,phi0\n");
    for t in grid(args.t_min, args.t_max, args.points) {
        let _ = writeln!(s, "{t},{},{},{}", ctx.u_i(t), ctx.u_d(t), ctx.phi0(t));
    }
    emit(args.out.as_deref(), &s)
}

fn compose(args: &ComposeArgs) -> Result<()> {
    let p = args.model.params()?;
    let (spec, lo, hi) = match args.homoclinic {
        Some(ts) => (CompositeSpec::homoclinic(0.0, ts, args.r), -2.0 * args.r - 5.0, ts + 2.0 * args.r + 5.0),
        None => {
            let d = eta_star(&p);
            let length = args.length.unwrap_or(args.n * p.l());
            let ts = stopgo::composite::t_star_from_mean(p.l(), d.eta_star, length / args.n, args.n);
            (CompositeSpec::periodic(0.0, ts, args.n, args.r), 0.0, args.n)
        }
    };
    let comp = Composite::new(&p, spec)?;
    let mut s = String::from("t,u0\n");
    for t in grid(lo, hi, args.points) {
        let _ = writeln!(s, "{t},{}", comp.value(t));
    }
    emit(args.out.as_deref(), &s)
}

fn solve_periodic(args: &SolveArgs) -> Result<()> {
    let p = args.model.params()?;
    let length = args.length.unwrap_or(args.n as f64 * p.l());
    let (sol, src) = seed_solution(&p, args.n, length, args.seed.into(), &ContinuationOptions::default())?;
    io::write_solution(&args.out, &sol)?;
    println!(
        "seed {src:?}\nbeta = {}  c = {:.12}  eta_hat = {:.10}  t*_hat = {:.4}  residual = {:.3e}  points = {}",
        sol.beta,
        sol.c,
        sol.eta_hat,
        sol.t_star_hat,
        sol.residual_inf,
        sol.u.len()
    );
    Ok(())
}

fn continue_beta(args: &ContinueArgs) -> Result<()> {
    let start = io::read_solution(&args.from)?;
    let ladder = log_ladder(start.beta, args.to, args.steps.max(1) + 1);
    std::fs::create_dir_all(&args.out_dir)?;
    let (run, err) = match continue_in_beta(start, &ladder[1..], &ContinuationOptions::default()) {
        Ok(run) => (run, None),
        Err(Error::ContinuationAborted { beta, reason, partial }) => {
            let e = Error::ContinuationAborted {
                beta,
                reason,
                partial: Box::default(),
            };
            (*partial, Some(e))
        }
        Err(e) => return Err(e),
    };
    for (k, sol) in run.solutions.iter().enumerate() {
        io::write_solution(&args.out_dir.join(format!("solution_{k:02}.csv")), sol)?;
        println!("beta = {:10.3}  c = {:.10}  residual = {:.3e}", sol.beta, sol.c, sol.residual_inf);
    }
    io::write_run(&args.out_dir.join("run.csv"), &run)?;
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let p = args.model.params()?;
    let length = args.length.unwrap_or(args.n as f64 * p.l());
    let mut s = RingState::perturbed(&p, args.n, length, args.amp, args.mode);
    let steps = (args.t_end / args.dt).round() as usize;
    let every = args.sample_every.max(1);
    let mut states = vec![s.clone()];
    for k in 1..=steps {
        s = step_rk4(&p, &s, args.dt)?;
        if k % every == 0 {
            states.push(s.clone());
        }
    }
    write_trajectories(&args.out, &Trajectories::from_states(&states))?;
    let tail: Vec<&RingState> = states.iter().filter(|s| s.time >= 0.8 * args.t_end).collect();
    let series = HeadwaySeries {
        times: tail.iter().map(|s| s.time).collect(),
        headways: tail.iter().map(|s| s.headways()).collect(),
        dt_sample: args.dt * every as f64,
        length,
    };
    match estimate_wave_speed(&series) {
        Ok(w) => println!("wave speed c = {:.6}  waves = {}  period = {:.3}", w.c, w.wave_number, w.time_period),
        Err(e) => println!("no wave speed estimate: {e}"),
    }
    Ok(())
}

fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let sol = io::read_solution(&args.solution)?;
    let profile = sol.grid.interpolant(&sol.u);
    let rec = Reconstruction::new(&sol.params, &profile, sol.c, 0.0)?;
    let samples = args.samples.max(5);
    let dt = args.periods * rec.omega() / samples as f64;
    let taus: Vec<f64> = (0..=samples).map(|i| i as f64 * dt).collect();
    let traj = rec.sample(&taus);
    write_trajectories(&args.out, &traj)?;
    let len_defect = traj
        .x
        .iter()
        .map(|x| (x[x.len() - 1] - x[0] - sol.circuit_length()).abs())
        .fold(0.0, f64::max);
    println!(
        "omega = {:.10}  periodicity defect = {:.3e}  circuit-length defect = {:.3e}  OV residual = {:.3e}",
        rec.omega(),
        rec.periodicity_defect(),
        len_defect,
        ov_residual_check(&sol.params, &traj, dt)
    );
    Ok(())
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::reference(),
    };
    if let Some(d) = &args.out_dir {
        cfg.experiment.output_dir = d.clone();
    }
    Ok(cfg)
}

fn sweep(args: &ConfigArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let dir = cfg.experiment.output_dir.clone();
    let results = error_sweep(&cfg)?;
    let mut tables = Vec::new();
    let mut partial = None;
    for res in &results {
        let path = write_case(&cfg, &dir, res)?;
        tables.push(PlotTable {
            name: res.name.clone(),
            errors_csv: PathBuf::from(&res.name).join("errors.csv"),
            profile_csv: Some(PathBuf::from(&res.name).join("overlay.csv")),
        });
        println!("{}: {} records -> {}", res.name, res.records.len(), path.display());
        for &r in &res.case.r {
            match order_fit(&res.curve(r), cfg.experiment.order_window) {
                Ok(f) => println!("  R = {r}: p = {:.3} ± {:.3} ({} points)", f.p, f.width, f.count),
                Err(e) => println!("  R = {r}: {e}"),
            }
        }
        if let Some((beta, why)) = &res.partial {
            println!("  partial table, stopped at beta = {beta}: {why}");
            partial = Some((*beta, why.clone()));
        }
    }
    let script = emit_plot_script(&dir, &tables, None)?;
    println!("plot script: {}", script.display());
    match partial {
        Some((beta, reason)) => Err(Error::ContinuationAborted {
            beta,
            reason,
            partial: Box::default(),
        }),
        None => Ok(()),
    }
}

fn fit(args: &FitArgs) -> Result<()> {
    let records = read_records(&args.table)?;
    let r = match args.r.or_else(|| records.first().map(|x| x.r)) {
        Some(r) => r,
        None => return Err(Error::DegenerateFit("empty table".into())),
    };
    let pts: Vec<(f64, f64)> = records.iter().filter(|x| x.r == r).map(|x| (x.beta, x.error_inf)).collect();
    let f = order_fit(&pts, (args.window[0], args.window[1]))?;
    println!("R = {r}: p = {:.4} ± {:.4} from {} points in [{}, {}]", f.p, f.width, f.count, args.window[0], args.window[1]);
    Ok(())
}

fn verify(args: &ConfigArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let report = verify_theorem_scalings(&cfg)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    report.into_result().map(|_| ())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Command::LimitProfiles(a) => limit_profiles(a),
        Command::Compose(a) => compose(a),
        Command::SolvePeriodic(a) => solve_periodic(a),
        Command::ContinueBeta(a) => continue_beta(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::ErrorSweep(a) => sweep(a),
        Command::OrderFit(a) => fit(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
