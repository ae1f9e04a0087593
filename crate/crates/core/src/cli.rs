//! Command-line front end. Data goes to the output (stdout or `--output`),
//! everything else to stderr, starting with a `# config` line that echoes
//! the resolved arguments.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chains::{build_ising_chain, build_xy_lattice, check_count_bounds};
use crate::cycles::enumerate_cycles;
use crate::dynamics::{light_cone_scan, Pauli, ScanConfig};
use crate::error::{Error, Result};
use crate::model::{validate, ModelSpec};
use crate::regions::{find_boundaries, sweep, Axis, SweepSpec};
use crate::solver::{closed_form_speed, solve_speed};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "lrbound",
    version,
    about = "Lieb-Robinson speeds from interaction cycles"
)]
pub struct Cli {
    /// Output format; defaults to json for `cycles` and `speed`, csv otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// List the elementary cycles of a model with their k and ξ.
    Cycles { model: PathBuf },
    /// Solve for the Lieb-Robinson speed.
    Speed { model: PathBuf },
    /// Sweep two coupling axes and label each point by its speed formula.
    Regions(RegionsArgs),
    /// Count operator chains on a built model and check the count bounds.
    Chains(ChainsArgs),
    /// Measure the light cone of a small chain by exact evolution.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RegionsArgs {
    pub model: PathBuf,
    /// Labels scaled along x, comma-separated.
    #[arg(long)]
    pub x: String,
    /// Labels scaled along y, comma-separated.
    #[arg(long)]
    pub y: String,
    /// `min,max,steps`
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: String,
    /// `min,max,steps`
    #[arg(long, allow_hyphen_values = true)]
    pub y_range: String,
    /// Space grid nodes geometrically.
    #[arg(long)]
    pub log: bool,
    /// Where to write the boundary segments. Defaults to the output path
    /// with `.boundaries` before the extension, or stdout after the points.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeModel {
    Ising,
    Xy,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainsArgs {
    #[arg(long, value_enum)]
    pub model: LatticeModel,
    /// `N` sites for ising, `ROWS,COLS` for xy.
    #[arg(long)]
    pub size: String,
    /// Source cells, comma-separated names such as `s2` or `h1_1`.
    #[arg(long)]
    pub from: String,
    /// Target cells.
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub nmax: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X,
    Y,
    Z,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "ising")]
    pub model: VerifyModel,
    #[arg(long, default_value_t = 8)]
    pub sites: usize,
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "z")]
    pub observable: Observable,
    /// Stop once every site has seen the signal.
    #[arg(long)]
    pub stop_early: bool,
    /// End each trace at its arrival instead of running it to `tmax`.
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyModel {
    Ising,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round12(x);
    let a = r.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("serializable");
    s.push('\n');
    s
}

/// What a run produced: the main data plus any side files or stderr notes.
#[derive(Debug, Default)]
pub struct Output {
    pub data: String,
    pub side_files: Vec<(PathBuf, String)>,
    pub notes: Vec<String>,
}

fn parse_range(field: &str, text: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::InvalidSweep(format!("{field} must be `min,max,steps`, got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let min = parts[0].parse().map_err(|_| bad())?;
    let max = parts[1].parse().map_err(|_| bad())?;
    let steps = parts[2].parse().map_err(|_| bad())?;
    Ok((min, max, steps))
}

fn axis(labels: &str, range: (f64, f64, usize)) -> Axis {
    Axis {
        labels: labels
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        min: range.0,
        max: range.1,
        steps: range.2,
    }
}

fn boundaries_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match output.extension() {
        Some(ext) => format!("{stem}.boundaries.{}", ext.to_string_lossy()),
        None => format!("{stem}.boundaries"),
    };
    output.with_file_name(name)
}

fn cycles_cmd(path: &Path, format: Format) -> Result<Output> {
    let model = validate(&ModelSpec::from_path(path)?)?;
    let cycles = enumerate_cycles(&model)?;
    let data = match format {
        Format::Json => json_text(Value::Array(
            cycles
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name(&model),
                        "sequence": c.sequence().iter().map(|&i| model.label(i)).collect::<Vec<_>>(),
                        "k": c.k(),
                        "xi": c.xi(),
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            let mut s = String::from("name,length,k,xi\n");
            for c in &cycles {
                let _ = writeln!(s, "{},{},{},{}", c.name(&model), c.len(), fmt_float(c.k()), fmt_float(c.xi()));
            }
            s
        }
    };
    Ok(Output {
        data,
        ..Output::default()
    })
}

fn speed_cmd(path: &Path, format: Format) -> Result<Output> {
    let model = validate(&ModelSpec::from_path(path)?)?;
    let r = solve_speed(&model)?;
    let closed = closed_form_speed(r.form, &r.active, model.speed_constant())?;
    if (closed - r.v_lr).abs() > 1e-9 * r.v_lr {
        return Err(Error::FormMismatch(format!(
            "closed form gives {closed}, envelope minimum {}",
            r.v_lr
        )));
    }
    let active: Vec<String> = r.active.iter().map(|c| c.name(&model)).collect();
    let data = match format {
        Format::Json => json_text(json!({
            "v_lr": r.v_lr,
            "lambda_star": r.lambda_star,
            "form": r.form,
            "active": active,
            "speed_constant": r.speed_constant,
        })),
        Format::Csv => format!(
            "v_lr,lambda_star,form,active,speed_constant\n{},{},{},{},{}\n",
            fmt_float(r.v_lr),
            fmt_float(r.lambda_star),
            r.form.as_str(),
            active.join("+"),
            fmt_float(r.speed_constant)
        ),
    };
    Ok(Output {
        data,
        ..Output::default()
    })
}

fn regions_cmd(args: &RegionsArgs, format: Format, output: Option<&Path>) -> Result<Output> {
    let spec = SweepSpec {
        base: ModelSpec::from_path(&args.model)?,
        x: axis(&args.x, parse_range("x-range", &args.x_range)?),
        y: axis(&args.y, parse_range("y-range", &args.y_range)?),
        log: args.log,
    };
    let grid = sweep(&spec)?;
    let segments = find_boundaries(&grid, args.log);
    if format == Format::Json {
        let data = json_text(json!({ "points": grid.points, "boundaries": segments }));
        return Ok(Output {
            data,
            ..Output::default()
        });
    }
    let mut points = String::from("x,y,v_lr,region_id\n");
    for p in &grid.points {
        let _ = writeln!(
            points,
            "{},{},{},{}",
            fmt_float(p.x),
            fmt_float(p.y),
            fmt_float(p.v_lr),
            p.region_id
        );
    }
    let mut bounds = String::from("x0,y0,x1,y1,between\n");
    for s in &segments {
        let _ = writeln!(
            bounds,
            "{},{},{},{},{}|{}",
            fmt_float(s.x0),
            fmt_float(s.y0),
            fmt_float(s.x1),
            fmt_float(s.y1),
            s.between[0],
            s.between[1]
        );
    }
    let target = args
        .boundaries
        .clone()
        .or_else(|| output.map(boundaries_path));
    Ok(match target {
        Some(path) => Output {
            data: points,
            side_files: vec![(path, bounds)],
            notes: Vec::new(),
        },
        None => Output {
            data: format!("{points}\n{bounds}"),
            ..Output::default()
        },
    })
}

fn parse_size(model: LatticeModel, text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidGraph(format!("size must be `N` or `ROWS,COLS`, got `{text}`"));
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match (model, parts.as_slice()) {
        (LatticeModel::Ising, [n]) => Ok((*n, 1)),
        (LatticeModel::Xy, [n]) => Ok((*n, *n)),
        (LatticeModel::Xy, [r, c]) => Ok((*r, *c)),
        _ => Err(bad()),
    }
}

fn chains_cmd(args: &ChainsArgs, format: Format) -> Result<Output> {
    let (a, b) = parse_size(args.model, &args.size)?;
    let model = match args.model {
        LatticeModel::Ising => build_ising_chain(a)?,
        LatticeModel::Xy => build_xy_lattice(a, b)?,
    };
    let from = model.parse_region(&args.from)?;
    let to = model.parse_region(&args.to)?;
    let report = check_count_bounds(&model, &from, &to, args.nmax, args.lambda)?;
    let data = match format {
        Format::Json => json_text(serde_json::to_value(&report)?),
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
            let mut s =
                String::from("n,count,bound_generic,bound_lattice,bound_homogeneous,slack\n");
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.n,
                    r.count,
                    fmt_float(r.generic),
                    opt(r.lattice),
                    opt(r.homogeneous),
                    fmt_float(r.slack)
                );
            }
            s
        }
    };
    Ok(Output {
        data,
        ..Output::default()
    })
}

fn verify_cmd(args: &VerifyArgs, format: Format) -> Result<Output> {
    let model = build_ising_chain(args.sites)?;
    let cfg = ScanConfig {
        observable: match args.observable {
            Observable::X => Pauli::X,
            Observable::Y => Pauli::Y,
            Observable::Z => Pauli::Z,
        },
        epsilon: args.epsilon,
        t_max: args.tmax,
        steps: args.steps,
        stop_when_arrived: args.stop_early,
        full_traces: !args.truncate,
    };
    let scan = light_cone_scan(&model, &[args.g * args.j, args.j], &cfg)?;
    let summary = json!({
        "empirical_velocity": scan.empirical_velocity,
        "v_lr": scan.v_lr,
        "ratio": scan.ratio,
        "arrivals": scan.traces.iter().map(|t| json!({"d": t.distance, "t": t.arrival_time})).collect::<Vec<_>>(),
    });
    Ok(match format {
        Format::Json => Output {
            data: json_text(json!({ "summary": summary, "traces": scan.traces })),
            ..Output::default()
        },
        Format::Csv => {
            let mut s = String::from("d,t,norm\n");
            for tr in &scan.traces {
                for (t, n) in tr.times.iter().zip(&tr.norms) {
                    let _ = writeln!(
                        s,
                        "{},{},{}",
                        fmt_float(tr.distance),
                        fmt_float(*t),
                        fmt_float(*n)
                    );
                }
            }
            Output {
                data: s,
                side_files: Vec::new(),
                notes: vec![format!(
                    "# summary {}",
                    serde_json::to_string(&round_json(summary))?
                )],
            }
        }
    })
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::Cycles { .. } | Command::Speed { .. } => Format::Json,
        _ => Format::Csv,
    });
    match &cli.command {
        Command::Cycles { model } => cycles_cmd(model, format),
        Command::Speed { model } => speed_cmd(model, format),
        Command::Regions(args) => regions_cmd(args, format, cli.output.as_deref()),
        Command::Chains(args) => chains_cmd(args, format),
        Command::Verify(args) => verify_cmd(args, format),
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var("LRBOUND_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| Error::Threads(v)),
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("error: {err}");
    if err.is_internal() {
        2
    } else {
        1
    }
}

fn run_parsed(cli: &Cli) -> Result<()> {
    let threads = thread_count()?;
    let config = serde_json::to_value(cli)?;
    eprintln!("# config {}", serde_json::to_string(&config)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let out = pool.install(|| execute(cli))?;
    for note in &out.notes {
        eprintln!("{note}");
    }
    for (path, text) in &out.side_files {
        std::fs::write(path, text)?;
    }
    match &cli.output {
        Some(path) => std::fs::write(path, &out.data)?,
        None => std::io::stdout().write_all(out.data.as_bytes())?,
    }
    Ok(())
}

/// Parses `args` (program name first) and runs. Returns the exit code: 0 on
/// success, 1 for bad input, 2 when an internal check fails.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_parsed(&cli) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}
