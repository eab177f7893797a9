//! Command-line driver: resolves settings, runs one experiment and writes
//! `<out>.csv`, `<out>.json` and `<out>.svg`.
//!
//! Exit codes: 0 success, 1 I/O error, 2 configuration error (nothing
//! written), 3 a fit or check failed (outputs still written).

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

use config::{Command, ConfigError, Settings};
use output::Summary;

/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "MIPT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mipt", version = output::VERSION, about = "Boundary entanglement of measured 2D shallow circuits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Boundary entropy of the measured graph state over a p_x grid
    GraphScan(Flags),
    /// Entropy of every interval length at one p_x, with the alpha fit
    GraphCritical(Flags),
    /// Mutual information of random interval pairs against the cross ratio
    MutualInfo(Flags),
    /// Two-edge purification of the graph state
    Purify(Flags),
    /// Boundary entropy of the diluted Clifford circuit over a p grid
    CliffordScan(Flags),
    /// Two-edge purification of the diluted Clifford circuit
    CliffordPurify(Flags),
    /// Spin-model couplings at each q
    Couplings(Flags),
    /// Monte Carlo of the diluted Ising model
    RbimMc(Flags),
    /// Compare the stabilizer engine with the dense state-vector reference
    #[command(hide = true)]
    Verify(Flags),
}

/// Every flag overrides the config-file key of the same name. Each command
/// accepts only its own keys.
#[derive(Args, Debug)]
struct Flags {
    /// Flat `key = value` file; flags win over it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Qudit dimension (prime)
    #[arg(long)]
    q: Option<String>,
    /// Lattice widths, `a,b,c` or `start:stop:step`
    #[arg(long)]
    lx: Option<String>,
    /// Lattice height (defaults to lx)
    #[arg(long)]
    ly: Option<String>,
    /// Boundary condition along x: periodic or open
    #[arg(long)]
    bc: Option<String>,
    /// Rows held by the streaming driver
    #[arg(long)]
    window: Option<String>,
    /// Trajectories per point
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output path prefix
    #[arg(long)]
    out: Option<String>,
    /// X-measurement probability (graph model)
    #[arg(long)]
    px: Option<String>,
    /// Clifford circuit time steps
    #[arg(long)]
    t: Option<String>,
    /// Gate probability (Clifford model)
    #[arg(long)]
    p: Option<String>,
    /// Interval length over lx
    #[arg(long)]
    ratio: Option<String>,
    /// Interval start positions per length
    #[arg(long)]
    starts: Option<String>,
    /// `ratio` (one length) or `all` (every length, with the alpha fit)
    #[arg(long)]
    intervals: Option<String>,
    /// Interval pairs per trajectory
    #[arg(long)]
    pairs: Option<String>,
    /// Fewest records in a populated eta bin
    #[arg(long)]
    min_count: Option<String>,
    /// Purification heights
    #[arg(long)]
    heights: Option<String>,
    /// Purification heights as ly/lx
    #[arg(long)]
    tau: Option<String>,
    /// Smallest heights dropped from the decay fit
    #[arg(long)]
    drop_first: Option<String>,
    /// Smallest abscissa kept in the decay fit
    #[arg(long)]
    min_x: Option<String>,
    /// Fewest nonzero samples for a height to enter the decay fit
    #[arg(long)]
    min_nonzero: Option<String>,
    /// Ising lattice sizes
    #[arg(long)]
    l: Option<String>,
    /// Ising couplings
    #[arg(long)]
    k: Option<String>,
    /// Take K = 2 J_vert(q) for this q
    #[arg(long)]
    coupling_q: Option<String>,
    /// Bond probabilities
    #[arg(long)]
    pbond: Option<String>,
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    /// Disorder realizations per point
    #[arg(long)]
    realizations: Option<String>,
    /// metropolis or sw (Swendsen-Wang)
    #[arg(long)]
    update: Option<String>,
    /// Operations per verify case
    #[arg(long)]
    ops: Option<String>,
    /// Verify cases
    #[arg(long)]
    cases: Option<String>,
}

impl Flags {
    fn pairs(self) -> (Option<PathBuf>, Vec<(&'static str, Option<String>)>) {
        let f = self;
        let pairs = vec![
            ("q", f.q),
            ("lx", f.lx),
            ("ly", f.ly),
            ("bc", f.bc),
            ("window", f.window),
            ("samples", f.samples),
            ("seed", f.seed),
            ("out", f.out),
            ("px", f.px),
            ("t", f.t),
            ("p", f.p),
            ("ratio", f.ratio),
            ("starts", f.starts),
            ("intervals", f.intervals),
            ("pairs", f.pairs),
            ("min-count", f.min_count),
            ("heights", f.heights),
            ("tau", f.tau),
            ("drop-first", f.drop_first),
            ("min-x", f.min_x),
            ("min-nonzero", f.min_nonzero),
            ("l", f.l),
            ("k", f.k),
            ("coupling-q", f.coupling_q),
            ("pbond", f.pbond),
            ("sweeps", f.sweeps),
            ("burn-in", f.burn_in),
            ("realizations", f.realizations),
            ("update", f.update),
            ("ops", f.ops),
            ("cases", f.cases),
        ];
        (f.config, pairs)
    }
}

fn split(cmd: Cmd) -> (Command, Flags) {
    match cmd {
        Cmd::GraphScan(f) => (Command::GraphScan, f),
        Cmd::GraphCritical(f) => (Command::GraphCritical, f),
        Cmd::MutualInfo(f) => (Command::MutualInfo, f),
        Cmd::Purify(f) => (Command::Purify, f),
        Cmd::CliffordScan(f) => (Command::CliffordScan, f),
        Cmd::CliffordPurify(f) => (Command::CliffordPurify, f),
        Cmd::Couplings(f) => (Command::Couplings, f),
        Cmd::RbimMc(f) => (Command::RbimMc, f),
        Cmd::Verify(f) => (Command::Verify, f),
    }
}

fn usage_error(command: Command, e: &ConfigError) -> i32 {
    let mut cli = Cli::command();
    cli.build();
    let usage = cli.find_subcommand_mut(command.name()).map(|c| c.render_usage().to_string()).unwrap_or_default();
    let keys: Vec<&str> = command.keys().iter().map(|k| k.0).collect();
    eprintln!("error: {e}\n\n{usage}\nkeys for {}: {}", command.name(), keys.join(", "));
    2
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| ConfigError(format!("bad {THREADS_VAR} `{v}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, flags) = split(cli.command);
    let (file, pairs) = flags.pairs();
    let settings = match Settings::resolve(command, file.as_deref(), &pairs) {
        Ok(s) => s,
        Err(e) => return usage_error(command, &e),
    };
    if let Err(e) = init_threads() {
        return usage_error(command, &e);
    }
    let outcome = match commands::execute(&settings) {
        Ok(o) => o,
        Err(e) => return usage_error(command, &e),
    };
    let summary = Summary {
        version: output::VERSION.into(),
        command: command.name().into(),
        config: settings.echo().clone(),
        fits: outcome.fits,
        errors: outcome.errors,
        diagnostics: serde_json::Value::Object(outcome.diagnostics.into_iter().collect()),
    };
    let out = settings.get("out").expect("every command has an out default");
    if let Err(e) = output::write_all(out, &output::to_csv(&outcome.records), &summary, &outcome.plot.to_svg()) {
        eprintln!("error: {e}");
        return 1;
    }
    for f in &summary.fits {
        println!("{}: {:.6} ± {:.6} ({})", f.name, f.fit.value, f.fit.stderr, f.fit.window);
    }
    for e in &summary.errors {
        eprintln!("failed: {e}");
    }
    if summary.errors.is_empty() {
        0
    } else {
        3
    }
}
