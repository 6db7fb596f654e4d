use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photon_gauge::config::{ConfigError, Scenario, ScenarioConfig};
use photon_gauge::scenario::{run_scenario, write_units_csv};
use photon_gauge::units::physical_units;

const EXIT_RUNTIME: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_STRICT: u8 = 4;

#[derive(Parser)]
#[command(name = "photon-gauge", version, about = "Driven photonic lattices with synthetic magnetic flux")]
struct Cli {
    /// Treat truncation warnings as errors (exit 4).
    #[arg(long, global = true)]
    strict: bool,
    /// Output directory (default: the scenario name).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run { config: PathBuf },
    /// Expand a parameter grid over a template into config files.
    Sweep { template: PathBuf, grid: PathBuf },
    /// Convert normalized parameters to fabrication numbers.
    #[command(allow_negative_numbers = true)]
    Units(UnitsArgs),
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct UnitsArgs {
    /// Reference hopping rate (1/cm).
    #[arg(long, default_value_t = 1.0)]
    j: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    omega_over_j: f64,
    #[arg(long, default_value_t = 1)]
    order: i64,
    /// Waveguide spacing (m).
    #[arg(long)]
    d: f64,
    /// Wavelength (m).
    #[arg(long)]
    lambda: f64,
    /// Substrate index.
    #[arg(long)]
    n_s: f64,
    /// Propagation distance in units of 1/J.
    #[arg(long)]
    jt_max: Option<f64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Parse(_) => EXIT_PARSE,
            ConfigError::Invalid(_) => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { config } => run(cli, config),
        Command::Validate { config } => {
            let scenario = Scenario::resolve(ScenarioConfig::load(config)?)?;
            if !cli.quiet {
                println!("{}: valid {:?} scenario `{}`", config.display(), scenario.config.kind, scenario.config.name);
            }
            Ok(())
        }
        Command::Units(args) => units(cli, args),
        Command::Sweep { template, grid } => sweep(cli, template, grid),
    }
}

fn run(cli: &Cli, config: &Path) -> Result<(), Failure> {
    let scenario = Scenario::resolve(ScenarioConfig::load(config)?)?;
    let out_dir = cli
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&scenario.config.name));
    let report = run_scenario(&scenario, &out_dir).map_err(runtime)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !cli.quiet {
        println!("wrote {} files to {}", report.outputs.len() + 1, report.out_dir.display());
    }
    if cli.strict && report.truncated {
        return Err(Failure {
            code: EXIT_STRICT,
            message: "truncation flagged under --strict".to_string(),
        });
    }
    Ok(())
}

fn units(cli: &Cli, a: &UnitsArgs) -> Result<(), Failure> {
    let invalid = |e: photon_gauge::Error| Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    };
    let mut p = physical_units(a.j, a.gamma, a.omega_over_j, a.order, a.d, a.lambda, a.n_s).map_err(invalid)?;
    if let Some(jt) = a.jt_max {
        p = p.with_propagation(jt).map_err(invalid)?;
    }
    if let Some(dir) = &cli.out_dir {
        write_units_csv(&p, dir).map_err(runtime)?;
    }
    if !cli.quiet {
        println!("bending radius R      {:.4} cm", p.radius);
        println!("modulation period     {:.4} mm", p.lambda_mod);
        println!("amplitude A           {:.4} 1/cm", p.amplitude);
        println!("index contrast        {:.4e}", p.delta_n);
        println!("sample length L       {:.4} cm", p.length);
    }
    Ok(())
}

/// Flattens nested tables of `grid` into dotted keys with value lists.
fn grid_axes(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Vec<toml::Value>>) -> Result<(), Failure> {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            toml::Value::Table(t) => grid_axes(&path, t, out)?,
            toml::Value::Array(values) if !values.is_empty() => {
                out.insert(path, values.clone());
            }
            _ => {
                return Err(ConfigError::Invalid(format!("grid key `{path}` needs a nonempty list of values")).into());
            }
        }
    }
    Ok(())
}

fn set_dotted(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), Failure> {
    let mut parts = path.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Invalid(format!("grid key `{path}` crosses a non-table value")))?;
    }
    Ok(())
}

fn sweep(cli: &Cli, template: &Path, grid: &Path) -> Result<(), Failure> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())));
    let base: toml::Table = toml::from_str(&read(template)?).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let grid: toml::Table = toml::from_str(&read(grid)?).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut axes = BTreeMap::new();
    grid_axes("", &grid, &mut axes)?;
    if axes.is_empty() {
        return Err(ConfigError::Invalid("grid has no axes".to_string()).into());
    }
    let name = base
        .get("name")
        .and_then(toml::Value::as_str)
        .unwrap_or("scenario")
        .to_string();
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from(format!("{name}_sweep")));
    fs::create_dir_all(&out_dir).map_err(runtime)?;

    let axes: Vec<(String, Vec<toml::Value>)> = axes.into_iter().collect();
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    for index in 0..total {
        let mut table = base.clone();
        let mut rem = index;
        for (key, values) in axes.iter().rev() {
            set_dotted(&mut table, key, values[rem % values.len()].clone())?;
            rem /= values.len();
        }
        let point = format!("{name}_{index:04}");
        table.insert("name".to_string(), toml::Value::String(point.clone()));
        let text = toml::to_string(&table).map_err(runtime)?;
        Scenario::resolve(ScenarioConfig::from_toml(&text)?)
            .map_err(|e| Failure::from(ConfigError::Invalid(format!("{point}: {e}"))))?;
        let path = out_dir.join(format!("{point}.toml"));
        fs::write(&path, text).map_err(runtime)?;
        if !cli.quiet {
            println!("{}", path.display());
        }
    }
    Ok(())
}
