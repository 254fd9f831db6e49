//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::config::{describe, ConfigError, ConfigFile};
use crate::csv::{self, ResultRow};
use crate::run::{averages, run_experiment, Selection};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status of an invalid configuration or command line.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when an engine failed on some rows.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mgrit-modes",
    version,
    about = "Convergence predictions and measurements for Parareal/MGRIT"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analysis methods (lfa, sama, ra) of a config.
    Analyze(RunArgs),
    /// Run the measured MGRIT iterations of a config.
    Simulate(RunArgs),
    /// Run everything and emit average reduction factors per series.
    Compare(RunArgs),
    /// List the named configs and their experiments.
    ListConfigs {
        #[arg(long)]
        config_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file path, or the name of a config in the config directory.
    pub config: Option<String>,
    /// Run only this experiment of the config.
    #[arg(long)]
    pub section: Option<String>,
    #[arg(long)]
    pub config_dir: Option<PathBuf>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags that override config keys.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub problem: Option<String>,
    /// Comma-separated list of lfa, sama, ra, measured.
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated list of f, fcf.
    #[arg(long)]
    pub relax: Option<String>,
    /// v or f (three levels only).
    #[arg(long)]
    pub cycle: Option<String>,
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub m2: Option<String>,
    #[arg(long)]
    pub nx: Option<String>,
    #[arg(long)]
    pub nt: Option<String>,
    #[arg(long)]
    pub dx: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    /// Spatial frequency spacing, e.g. `pi/32`.
    #[arg(long)]
    pub htheta: Option<String>,
    #[arg(long)]
    pub homega: Option<String>,
    /// Comma-separated list of exact2, oneinf.
    #[arg(long)]
    pub norm: Option<String>,
    /// Comma-separated list of full, cpoints.
    #[arg(long)]
    pub scope: Option<String>,
    #[arg(long)]
    pub kmax: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Also emit one row per sampled frequency.
    #[arg(long)]
    pub emit_argmax_map: bool,
    /// Allow exact 2-norms on large elasticity blocks.
    #[arg(long)]
    pub allow_exact_elasticity: bool,
}

fn scalar(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        Value::Float(f)
    } else {
        Value::String(s.to_string())
    }
}

impl Overrides {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let pairs = [
            ("problem", &self.problem),
            ("methods", &self.method),
            ("relax", &self.relax),
            ("cycle", &self.cycle),
            ("levels", &self.levels),
            ("m", &self.m),
            ("m2", &self.m2),
            ("nx", &self.nx),
            ("nt", &self.nt),
            ("dx", &self.dx),
            ("dt", &self.dt),
            ("c", &self.c),
            ("rho", &self.rho),
            ("mu", &self.mu),
            ("htheta", &self.htheta),
            ("homega", &self.homega),
            ("norm", &self.norm),
            ("scope", &self.scope),
            ("kmax", &self.kmax),
            ("seed", &self.seed),
        ];
        for (key, v) in pairs {
            if let Some(v) = v {
                t.insert(key.to_string(), scalar(v));
            }
        }
        if self.emit_argmax_map {
            t.insert("emit_argmax_map".into(), Value::Boolean(true));
        }
        if self.allow_exact_elasticity {
            t.insert("allow_exact_elasticity".into(), Value::Boolean(true));
        }
        t
    }
}

/// Directory of the shipped configs: `./configs` when present, else the
/// one in the source tree.
pub fn default_config_dir() -> PathBuf {
    let local = PathBuf::from("configs");
    if local.is_dir() {
        local
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
    }
}

fn resolve_config(name: &str, dir: &Path) -> PathBuf {
    let p = PathBuf::from(name);
    if p.exists() || name.ends_with(".toml") {
        p
    } else {
        dir.join(format!("{name}.toml"))
    }
}

/// Result of a command: text for standard output and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn run_rows(args: &RunArgs, sel: Selection) -> Result<(Vec<ResultRow>, bool), ConfigError> {
    let dir = args.config_dir.clone().unwrap_or_else(default_config_dir);
    let file = match &args.config {
        Some(name) => ConfigFile::load(&resolve_config(name, &dir))?,
        None => ConfigFile::default(),
    };
    let experiments = file.experiments(args.section.as_deref(), &args.overrides.to_table())?;
    let mut rows = Vec::new();
    let mut failed = false;
    for e in &experiments {
        let out = run_experiment(e, sel);
        failed |= out.failed;
        if sel == Selection::All {
            rows.extend(averages(&out.rows, e.window));
        } else {
            rows.extend(out.rows);
        }
    }
    csv::sort_rows(&mut rows);
    Ok((rows, failed))
}

fn list_configs(dir: &Path) -> Result<String, ConfigError> {
    let entries = std::fs::read_dir(dir).map_err(|e| ConfigError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    // Natural order: fig4a before fig10.
    paths.sort_by_key(|p| {
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let digits: String = stem
            .chars()
            .skip_while(|c| !c.is_ascii_digit())
            .take_while(char::is_ascii_digit)
            .collect();
        (digits.parse::<u64>().unwrap_or(0), stem)
    });
    let mut out = String::new();
    for p in paths {
        let cfg = ConfigFile::load(&p)?;
        let name = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let about = cfg.defaults.get("description").and_then(Value::as_str).unwrap_or("");
        out.push_str(&format!("{name}: {about}\n"));
        for e in cfg.experiments(None, &Table::new())? {
            out.push_str(&format!("  {}\n", describe(&e)));
        }
    }
    Ok(out)
}

/// Executes a parsed command without touching the process state.
pub fn execute(cli: &Cli) -> Outcome {
    let (args, sel) = match &cli.command {
        Command::ListConfigs { config_dir } => {
            let dir = config_dir.clone().unwrap_or_else(default_config_dir);
            return match list_configs(&dir) {
                Ok(stdout) => Outcome {
                    stdout,
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                Err(e) => Outcome {
                    stdout: String::new(),
                    stderr: format!("error: {e}\n"),
                    code: EXIT_CONFIG,
                },
            };
        }
        Command::Analyze(a) => (a, Selection::Analysis),
        Command::Simulate(a) => (a, Selection::Simulation),
        Command::Compare(a) => (a, Selection::All),
    };
    match run_rows(args, sel) {
        Ok((rows, failed)) => {
            let text = csv::render(&rows);
            let mut stderr = String::new();
            if failed {
                let n = rows.iter().filter(|r| r.is_error()).count();
                stderr.push_str(&format!(
                    "error: {n} computation(s) failed, see rows with an `error` annotation\n"
                ));
            }
            let code = if failed { EXIT_NUMERICAL } else { EXIT_OK };
            match &args.out {
                Some(path) => match std::fs::File::create(path).and_then(|mut f| f.write_all(text.as_bytes())) {
                    Ok(()) => Outcome {
                        stdout: String::new(),
                        stderr,
                        code,
                    },
                    Err(e) => Outcome {
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                        code: EXIT_CONFIG,
                    },
                },
                None => Outcome {
                    stdout: text,
                    stderr,
                    code,
                },
            }
        }
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: EXIT_CONFIG,
        },
    }
}
