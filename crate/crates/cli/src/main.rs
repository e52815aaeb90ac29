//! `pfa`: check, translate and simulate Process Flow Abstraction models.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pfa_core::biopepa::{check_output, generate, render};
use pfa_core::diagnostic::{has_errors, Diagnostic};
use pfa_core::sbgntext::parse;
use pfa_core::sim::{
    auto_horizon, ensemble_run, run, signalling_time, EnsembleStats, Method, ReactionNetwork,
    RunOptions, SignalSpec, SimError, Watch, ODE_STEP,
};
use pfa_core::Document;

#[derive(Parser)]
#[command(
    name = "pfa",
    version,
    about = "Process Flow Abstraction model toolchain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model.
    Check { input: PathBuf },
    /// Translate a model to Bio-PEPA.
    Translate {
        input: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Simulate a model and write trace CSVs.
    Simulate(SimArgs),
    /// Signalling-time statistics over an ensemble of stochastic runs.
    Stats(SimArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Override `entity.count=N` or `arc.property=V`; repeatable.
    #[arg(long = "set", value_name = "TARGET.FIELD=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SimArgs {
    input: PathBuf,
    #[arg(long, default_value = "direct")]
    method: Method,
    /// First seed; replica i uses seed + i. Defaults to 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of stochastic replicas. Defaults to 1 (simulate) or 10 (stats).
    #[arg(long)]
    replicas: Option<u64>,
    /// End time in seconds, or `auto` for ten times the ODE signalling time.
    #[arg(long, default_value = "auto")]
    t_end: Horizon,
    /// RK4 step for `--method ode`.
    #[arg(long, default_value_t = ODE_STEP)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    output_interval: f64,
    /// Output path. `simulate` appends `_seed<N>` per replica.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = pfa_core::corpus::MAPK_OUTPUT)]
    signal_species: String,
    /// Fraction of the species' pool that counts as signal arrival.
    /// Defaults to 1 for stochastic methods and 0.99 for the ODE.
    #[arg(long)]
    signal_fraction: Option<f64>,
    /// Maximum number of replicas run at once.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy)]
enum Horizon {
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Horizon::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(Horizon::Fixed(t)),
            _ => Err(format!(
                "expected a non-negative number or `auto`, got `{s}`"
            )),
        }
    }
}

/// Exit status 1: the model or a run failed. Exit status 2: bad usage or
/// I/O.
enum Failure {
    Model(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Model(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownSpecies(_) | SimError::Invalid(_) => Failure::Usage(e.to_string()),
            _ => Failure::Model(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { input } => cmd_check(&input),
        Command::Translate { input, out, model } => cmd_translate(&input, out.as_deref(), &model),
        Command::Simulate(args) => with_jobs(args.jobs, || cmd_simulate(&args)),
        Command::Stats(args) => with_jobs(args.jobs, || cmd_stats(&args)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Model(m) | Failure::Usage(m) if !m.is_empty() => eprintln!("pfa: {m}"),
                _ => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn with_jobs(jobs: Option<usize>, f: impl FnOnce() -> CmdResult + Send) -> CmdResult {
    match jobs {
        None => f(),
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?
            .install(f),
    }
}

fn report(file: &Path, diags: &[Diagnostic]) {
    let name = file.display().to_string();
    for d in diags {
        eprintln!("{}", d.render(&name));
    }
}

/// Read, parse, apply overrides and validate. Diagnostics go to standard
/// error.
fn load(input: &Path, model: &ModelArgs) -> Result<Document, Failure> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", input.display())))?;
    let mut doc = parse(&text).map_err(|diags| {
        report(input, &diags);
        Failure::Model(String::new())
    })?;
    for o in &model.overrides {
        doc.apply_override(o)
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let diags = doc.validate();
    report(input, &diags);
    if has_errors(&diags) {
        return Err(Failure::Model(String::new()));
    }
    Ok(doc)
}

fn cmd_check(input: &Path) -> CmdResult {
    load(
        input,
        &ModelArgs {
            overrides: Vec::new(),
        },
    )
    .map(|_| ())
}

fn cmd_translate(input: &Path, out: Option<&Path>, model: &ModelArgs) -> CmdResult {
    let doc = load(input, model)?;
    let text = render(&generate(&doc).map_err(|e| Failure::Model(e.to_string()))?);
    let diags = check_output(&text);
    let failed = has_errors(&diags);
    if !diags.is_empty() {
        report(out.unwrap_or(Path::new("<stdout>")), &diags);
    }
    match out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string()))?,
    }
    if failed {
        return Err(Failure::Model(
            "generated Bio-PEPA failed its self-check".into(),
        ));
    }
    Ok(())
}

struct Setup {
    net: ReactionNetwork,
    seeds: Vec<u64>,
    t_end: f64,
    signal: SignalSpec,
    total: f64,
}

fn setup(args: &SimArgs, default_replicas: u64) -> Result<Setup, Failure> {
    if !args.method.is_stochastic() && (args.seed.is_some() || args.replicas.is_some()) {
        return Err(Failure::Usage(
            "--seed and --replicas do not apply to --method ode".into(),
        ));
    }
    let method = match args.method {
        Method::Ode { .. } => Method::Ode { dt: args.dt },
        m => m,
    };
    let replicas = args.replicas.unwrap_or(default_replicas);
    if replicas == 0 {
        return Err(Failure::Usage("--replicas must be at least 1".into()));
    }
    let doc = load(&args.input, &args.model)?;
    let net = ReactionNetwork::compile(&doc)?;
    report(&args.input, &net.warnings);
    let signal = match args.signal_fraction {
        Some(f) => SignalSpec::new(&args.signal_species, f),
        None => SignalSpec::for_method(&args.signal_species, method),
    };
    let (species, level) = signal.level(&net)?;
    let total = level / signal.fraction;
    let t_end = match args.t_end {
        Horizon::Fixed(t) => t,
        Horizon::Auto => {
            let h = auto_horizon(&net, &args.signal_species)?;
            match h.ode_signalling_time {
                Some(t) => eprintln!("pfa: ODE signalling time {t:.4} s, horizon {} s", h.t_end),
                None => eprintln!(
                    "pfa: warning: ODE never reaches {} of `{}`; horizon capped at {} s",
                    pfa_core::sim::ODE_SIGNAL_FRACTION,
                    net.species[species],
                    h.t_end
                ),
            }
            h.t_end
        }
    };
    let first = args.seed.unwrap_or(1);
    let seeds = (0..replicas).map(|i| first.wrapping_add(i)).collect();
    Ok(Setup {
        net,
        seeds,
        t_end,
        signal,
        total,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("cannot write {}: {e}", path.display()))
}

fn cmd_simulate(args: &SimArgs) -> CmdResult {
    use rayon::prelude::*;

    let s = setup(args, 1)?;
    let method = match args.method {
        Method::Ode { .. } => Method::Ode { dt: args.dt },
        m => m,
    };
    let (species, level) = s.signal.level(&s.net)?;
    let opts = RunOptions {
        t_end: s.t_end,
        output_interval: args.output_interval,
        watch: Some(Watch {
            species,
            level,
            stop: false,
        }),
    };
    let base = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trace.csv"));

    if !method.is_stochastic() {
        let trace = run(&s.net, method, 0, &opts, &mut |_, _| {})?;
        let mut w = create(&base)?;
        trace
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_err(&base))?;
        return Ok(());
    }

    let traces = s
        .seeds
        .par_iter()
        .map(|&seed| {
            run(&s.net, method, seed, &opts, &mut |_, _| {})
                .map(|t| (seed, t))
                .map_err(|e| SimError::Replica {
                    seed,
                    source: Box::new(e),
                })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut times = Vec::new();
    for (seed, trace) in &traces {
        let path = with_suffix(&base, &format!("_seed{seed}"));
        let mut w = create(&path)?;
        trace
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_err(&path))?;
        times.push((
            *seed,
            signalling_time(trace, &args.signal_species, s.signal.fraction, s.total)?,
        ));
    }
    if traces.len() > 1 {
        let stats = EnsembleStats::from_times(s.t_end, times);
        warn_not_reached(&stats);
        let path = with_suffix(&base, "_ensemble");
        let mut w = create(&path)?;
        stats
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_err(&path))?;
    }
    Ok(())
}

fn cmd_stats(args: &SimArgs) -> CmdResult {
    if !args.method.is_stochastic() {
        return Err(Failure::Usage("stats needs a stochastic method".into()));
    }
    let s = setup(args, 10)?;
    if s.seeds.len() < 2 {
        return Err(Failure::Usage("stats needs at least two replicas".into()));
    }
    let stats = ensemble_run(&s.net, args.method, &s.seeds, s.t_end, &s.signal)?;
    warn_not_reached(&stats);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            stats
                .write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(path))
        }
        None => stats
            .write_csv(io::stdout().lock())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn warn_not_reached(stats: &EnsembleStats) {
    let missing = stats.times.len() - stats.reached();
    if missing > 0 {
        eprintln!(
            "pfa: warning: {missing} of {} replicas did not reach the signal level by t = {}; summary excludes them",
            stats.times.len(),
            stats.t_end
        );
    }
}
