use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathwave::lti::{FreqGrid, RationalTf};
use pathwave::scenario::{
    emit_scenario, parse_config, preset, preset_text, report_text, run_scenario, summary_text,
    RunMode, ScenarioConfig, PRESET_NAMES,
};
use pathwave::wave::check_wtf_stability;
use pathwave::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_STABILITY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "pathwave",
    version,
    about = "Travelling-wave analysis of heterogeneous agent chains"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate, decompose and analyse a scenario; writes traces and reports.
    Run(RunArgs),
    /// Frequency-domain analysis only: boundaries, DC gains, stability, norms.
    Analyze(RunArgs),
    /// List the built-in scenarios, or print one as a config file.
    Presets { name: Option<String> },
    /// Wave-transfer-function stability test of every distinct open loop.
    CheckStability {
        #[command(flatten)]
        input: Input,
        /// Single model as ascending-power numerator coefficients.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "den", conflicts_with_all = ["config", "preset"])]
        num: Option<Vec<f64>>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            requires = "num"
        )]
        den: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
        /// Exit with code 4 when any verdict is false.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct Input {
    /// Scenario file (TOML, `schema = 1`).
    #[arg(conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    /// Lowest grid frequency in rad/s.
    #[arg(long)]
    omega_min: Option<f64>,
    /// Highest grid frequency in rad/s.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Number of log-spaced grid points.
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: Input,
    /// Simulation step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated horizon in seconds.
    #[arg(long)]
    t_final: Option<f64>,
    /// Absorber FIR kernel horizon in seconds.
    #[arg(long)]
    fir_horizon: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Output directory; overrides `output.dir`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Only run the named variants (repeatable).
    #[arg(long = "variant")]
    variants: Vec<String>,
    /// Exit with code 4 when any stability verdict is false.
    #[arg(long)]
    strict: bool,
}

fn load(input: &Input) -> Result<ScenarioConfig, Error> {
    match (&input.config, &input.preset) {
        (Some(path), None) => parse_config(&std::fs::read_to_string(path)?),
        (None, Some(name)) => preset(name),
        _ => Err(Error::Config(
            "give a scenario file or --preset NAME".into(),
        )),
    }
}

fn apply_grid(cfg: &mut ScenarioConfig, g: &GridArgs) {
    if let Some(v) = g.omega_min {
        cfg.grid.omega_min_rad_s = v;
    }
    if let Some(v) = g.omega_max {
        cfg.grid.omega_max_rad_s = v;
    }
    if let Some(v) = g.grid_points {
        cfg.grid.points = v;
    }
}

fn configure(args: &RunArgs) -> Result<ScenarioConfig, Error> {
    let mut cfg = load(&args.input)?;
    if let Some(v) = args.dt {
        cfg.sim.dt_s = v;
    }
    if let Some(v) = args.t_final {
        cfg.sim.t_final_s = v;
    }
    if let Some(v) = args.fir_horizon {
        cfg.sim.fir_horizon_s = Some(v);
    }
    apply_grid(&mut cfg, &args.grid);
    if let Some(out) = &args.out {
        cfg.output.dir = Some(out.to_string_lossy().into_owned());
    }
    if !args.variants.is_empty() {
        for v in &args.variants {
            if !cfg.variants.iter().any(|x| &x.name == v) {
                return Err(Error::Config(format!(
                    "no variant \"{v}\" in scenario \"{}\"",
                    cfg.name
                )));
            }
        }
        cfg.variants.retain(|x| args.variants.contains(&x.name));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &RunArgs, mode: RunMode) -> Result<u8, Error> {
    let cfg = configure(args)?;
    let out = run_scenario(&cfg, mode)?;
    if let Some(dir) = &cfg.output.dir {
        emit_scenario(&out, Path::new(dir))?;
    }
    match mode {
        RunMode::Full => print!("{}", summary_text(&out)?),
        RunMode::AnalyzeOnly => {
            for r in &out.runs {
                println!("# run {}", r.report.run);
                print!("{}", report_text(&r.report)?);
            }
        }
    }
    for r in &out.runs {
        for w in &r.report.warnings {
            eprintln!("warning: {}: {w}", r.report.run);
        }
    }
    if out.any_diverged() {
        eprintln!("error: simulation diverged");
        return Ok(EXIT_DIVERGENCE);
    }
    if args.strict && !out.stability_ok() {
        return Ok(EXIT_STABILITY);
    }
    Ok(0)
}

fn presets(name: Option<&str>) -> Result<u8, Error> {
    match name {
        Some(n) => print!("{}", preset_text(n)?),
        None => {
            for n in PRESET_NAMES {
                let cfg = preset(n)?;
                println!("{n}\t{}", cfg.description.unwrap_or_default());
            }
        }
    }
    Ok(0)
}

fn check_stability(
    input: &Input,
    num: Option<&[f64]>,
    den: Option<&[f64]>,
    g: &GridArgs,
    strict: bool,
) -> Result<u8, Error> {
    let mut models: Vec<(String, RationalTf, FreqGrid)> = Vec::new();
    if let (Some(num), Some(den)) = (num, den) {
        let mut cfg_grid = pathwave::scenario::GridSection::default();
        cfg_grid.omega_min_rad_s = g.omega_min.unwrap_or(cfg_grid.omega_min_rad_s);
        cfg_grid.omega_max_rad_s = g.omega_max.unwrap_or(cfg_grid.omega_max_rad_s);
        cfg_grid.points = g.grid_points.unwrap_or(cfg_grid.points);
        let m =
            RationalTf::from_coeffs(num, den).map_err(|e| Error::Config(format!("model: {e}")))?;
        models.push(("cli".into(), m, cfg_grid.grid()?));
    } else {
        let mut cfg = load(input)?;
        apply_grid(&mut cfg, g);
        cfg.validate()?;
        for plan in cfg.plans()? {
            for m in plan.chain.distinct_loops() {
                if !models.iter().any(|(_, x, _)| x.same_model(&m)) {
                    models.push((plan.name.clone(), m, plan.grid.clone()));
                }
            }
        }
    }
    let mut all = true;
    for (run, m, grid) in &models {
        let r = check_wtf_stability(m, grid);
        all &= r.verdict;
        println!(
            "run = {run:?}, model = \"{m}\", verdict = {}, proper = {}, crhp_zeros = {}, crhp_poles_nonorigin = {}, crossing_omega = {}",
            r.verdict,
            r.proper,
            r.crhp_zeros,
            r.crhp_poles_nonorigin,
            r.crossing_omega.map_or("none".to_string(), |w| w.to_string())
        );
    }
    Ok(if strict && !all { EXIT_STABILITY } else { 0 })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::Io(_) => 1,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => run(a, RunMode::Full),
        Cmd::Analyze(a) => run(a, RunMode::AnalyzeOnly),
        Cmd::Presets { name } => presets(name.as_deref()),
        Cmd::CheckStability {
            input,
            num,
            den,
            grid,
            strict,
        } => check_stability(input, num.as_deref(), den.as_deref(), grid, *strict),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
