use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loewner_cli::{commands, parallel, CliError, Envelope, RunConfig};

/// Loewner-Kufarev chains, Becker extensions and Beltrami diagnostics.
///
/// Every flag sets the config key named in its help; `--config` reads a
/// `key = value` file first and flags override it. The thread count comes
/// from LOEWNER_THREADS (unset or 0: all cores, 1: serial).
#[derive(Parser)]
#[command(name = "loewner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// φ_{s,t}(z) and its derivative.
    Evolve(Flags),
    /// f_s(z) reconstructed from the evolution family.
    Chain(Flags),
    /// Becker extension on a polar grid.
    Extend(Flags),
    /// Beltrami coefficient on circles.
    Beltrami(Flags),
    /// Becker-type test of a Beltrami field.
    Classify(Flags),
    /// Herglotz function recovered from a Becker-type field.
    Recover(Flags),
    /// Plane versus disk-like range of a chain.
    Range(Flags),
    /// Schwarzian norm against the quasiconformal bounds.
    Schwarzian(Flags),
    /// End-to-end pipeline.
    Demo {
        /// Demo name (demo.name).
        name: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Config file read before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any key as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// field.p
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// field.tau
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// k
    #[arg(long)]
    k: Option<String>,
    /// s
    #[arg(long)]
    s: Option<String>,
    /// t
    #[arg(long)]
    t: Option<String>,
    /// z
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// grid.radii
    #[arg(long)]
    radii: Option<String>,
    /// grid.angles
    #[arg(long)]
    angles: Option<String>,
    /// beltrami.radii
    #[arg(long)]
    circles: Option<String>,
    /// chain.mode
    #[arg(long)]
    mode: Option<String>,
    /// map
    #[arg(long, allow_hyphen_values = true)]
    map: Option<String>,
    /// input
    #[arg(long)]
    input: Option<String>,
    /// output
    #[arg(long)]
    output: Option<String>,
    /// export.path
    #[arg(long)]
    export: Option<String>,
    /// export.format
    #[arg(long)]
    format: Option<String>,
    /// classify.tolerance
    #[arg(long)]
    tolerance: Option<String>,
    /// classify.source
    #[arg(long)]
    source: Option<String>,
    /// range.horizon
    #[arg(long)]
    horizon: Option<String>,
    /// report.timing = true
    #[arg(long)]
    timing: bool,
}

fn build_config(command: &str, flags: &Flags, demo: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path).map_err(|e| CliError::io(path.clone(), e))?)?,
        None => RunConfig::new(),
    };
    cfg.set("command", command)?;
    for item in &flags.set {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::config("set", format!("`{item}` is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let pairs = [
        ("field.p", &flags.p),
        ("field.tau", &flags.tau),
        ("k", &flags.k),
        ("s", &flags.s),
        ("t", &flags.t),
        ("z", &flags.z),
        ("grid.radii", &flags.radii),
        ("grid.angles", &flags.angles),
        ("beltrami.radii", &flags.circles),
        ("chain.mode", &flags.mode),
        ("map", &flags.map),
        ("input", &flags.input),
        ("output", &flags.output),
        ("export.path", &flags.export),
        ("export.format", &flags.format),
        ("classify.tolerance", &flags.tolerance),
        ("classify.source", &flags.source),
        ("range.horizon", &flags.horizon),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if flags.timing {
        cfg.set("report.timing", "true")?;
    }
    if let Some(name) = demo {
        cfg.set("demo.name", name)?;
    }
    Ok(cfg)
}

fn emit(bytes: &[u8], output: Option<&str>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(PathBuf::from(path), e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::io(PathBuf::from("<stdout>"), e)),
    }
}

fn fail(cfg: &RunConfig, err: &CliError) -> ExitCode {
    eprintln!("loewner: {err}");
    if let Ok(bytes) = Envelope::new(cfg).with_error(err).to_bytes() {
        let _ = std::io::stdout().write_all(&bytes);
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags, demo) = match &cli.command {
        Command::Evolve(f) => ("evolve", f, None),
        Command::Chain(f) => ("chain", f, None),
        Command::Extend(f) => ("extend", f, None),
        Command::Beltrami(f) => ("beltrami", f, None),
        Command::Classify(f) => ("classify", f, None),
        Command::Recover(f) => ("recover", f, None),
        Command::Range(f) => ("range", f, None),
        Command::Schwarzian(f) => ("schwarzian", f, None),
        Command::Demo { name, flags } => ("demo", flags, name.as_deref()),
    };
    let cfg = match build_config(name, flags, demo) {
        Ok(cfg) => cfg,
        Err(e) => {
            let mut echo = RunConfig::new();
            let _ = echo.set("command", name);
            return fail(&echo, &e);
        }
    };
    let threads = match parallel::thread_count() {
        Ok(n) => n,
        Err(e) => return fail(&cfg, &e),
    };
    let output = cfg.get("output").map(str::to_string);
    let (envelope, code) = commands::execute(cfg.clone(), threads);
    if let Some(err) = &envelope.error {
        eprintln!("loewner: {}", err["message"].as_str().unwrap_or("error"));
    }
    let bytes = match envelope.to_bytes() {
        Ok(b) => b,
        Err(e) => return fail(&cfg, &e),
    };
    // Failed runs never leave a file behind.
    let target = if code == 0 { output.as_deref() } else { None };
    if let Err(e) = emit(&bytes, target) {
        return fail(&cfg, &e);
    }
    ExitCode::from(code as u8)
}
