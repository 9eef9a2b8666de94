//! Command-line front end: analyze, generate, eval, and export.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error, 4 config error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmetric::centrality::compute_series;
use cmetric::error::Error;
use cmetric::eval::{compute_tde, AnnotationSet};
use cmetric::graph::build_frame_graph;
use cmetric::ingest::{Format, TrajectoryDataset};
use cmetric::styles::{classify, smooth_agent_series, StyleReport};
use cmetric::synth::{generate, truth_to_json, Scenario, ScenarioKind};
use cmetric::Config;

#[derive(Parser)]
#[command(name = "cmetric", version, about = "Driving-style analysis of 2-D vehicle trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify driving styles and write a report
    Analyze(AnalyzeArgs),
    /// Generate a synthetic scenario with ground truth
    Generate(GenerateArgs),
    /// Score a report against ground truth (time deviation error)
    Eval(EvalArgs),
    /// Export per-agent series or per-frame graphs
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Config file (TOML or JSON); flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph distance threshold, meters
    #[arg(long)]
    mu: Option<f64>,
    /// Smoothing window, odd number of frames
    #[arg(long)]
    window: Option<usize>,
    /// Polynomial degree for smoothing
    #[arg(long)]
    poly_degree: Option<usize>,
    /// Sharpness neighborhood radius, frames
    #[arg(long)]
    epsilon: Option<usize>,
    /// Frame rate of the input, Hz
    #[arg(long)]
    fps: Option<f64>,
    /// Maximum tracked agents before the incremental Laplacian resets
    #[arg(long)]
    n_max: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                let is_toml = path
                    .extension()
                    .map(|e| e.eq_ignore_ascii_case("toml"))
                    .unwrap_or(false);
                if is_toml {
                    toml::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                } else {
                    serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
            }
            None => Config::default(),
        };
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.poly_degree {
            cfg.poly_degree = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.fps {
            cfg.frame_rate_hz = v;
        }
        if let Some(v) = self.n_max {
            cfg.n_max = v;
        }
        cfg.validated()
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trajectory file (.csv or .json)
    #[arg(long)]
    input: PathBuf,
    /// Report output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario kind: conservative_platoon | overspeeding_pass |
    /// overtake_single | sudden_lane_change | weaving_sinusoid | mixed
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory output path (.csv or .json)
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth output path
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    fps: Option<f64>,
    /// Uniform positional jitter amplitude, meters
    #[arg(long)]
    jitter: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Report produced by `analyze`
    #[arg(long)]
    report: PathBuf,
    /// Ground-truth file (from `generate` or hand-written annotations)
    #[arg(long)]
    truth: PathBuf,
    /// Frame rate override, Hz (defaults to the report's embedded rate)
    #[arg(long)]
    fps: Option<f64>,
    /// Machine-readable JSON output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Trajectory file (.csv or .json)
    #[arg(long)]
    input: PathBuf,
    /// Series to export: closeness | degree | sle0 | sle1 | sie0 | sie1
    #[arg(long, conflicts_with = "graph")]
    series: Option<String>,
    /// Agent id for --series
    #[arg(long)]
    agent: Option<String>,
    /// Export per-frame adjacency as JSON lines instead of a series
    #[arg(long)]
    graph: bool,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

fn detect_format(path: &Path) -> Result<Format, Error> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(ext) if ext == "csv" => Ok(Format::Csv),
        Some(ext) if ext == "json" => Ok(Format::Json),
        _ => Err(Error::Config(format!(
            "cannot infer format of {} (expected .csv or .json)",
            path.display()
        ))),
    }
}

fn load_dataset(path: &Path, fps: f64) -> Result<TrajectoryDataset, Error> {
    let format = detect_format(path)?;
    let file = fs::File::open(path)?;
    TrajectoryDataset::parse(file, format, fps)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<(), Error> {
    let cfg = args.config.resolve()?;
    let ds = load_dataset(&args.input, cfg.frame_rate_hz)?;
    // JSON inputs carry their own frame rate; keep the report consistent
    let cfg = Config { frame_rate_hz: ds.frame_rate_hz(), ..cfg }.validated()?;
    let report = classify(&ds, &cfg)?;
    let mut text = report.to_json_string();
    text.push('\n');
    write_or_print(&args.out, &text)
}

fn run_generate(args: &GenerateArgs) -> Result<(), Error> {
    let kind = ScenarioKind::parse(&args.scenario)?;
    let mut sc = Scenario::new(kind).with_seed(args.seed);
    if let Some(v) = args.agents {
        sc.agents = v;
    }
    if let Some(v) = args.frames {
        sc.frames = v;
    }
    if let Some(v) = args.fps {
        sc.frame_rate_hz = v;
    }
    if let Some(v) = args.jitter {
        sc.jitter_m = v;
    }
    let (ds, events) = generate(&sc)?;
    let text = match detect_format(&args.out)? {
        Format::Csv => ds.to_csv_string(),
        Format::Json => {
            let mut t = ds.to_json_string();
            t.push('\n');
            t
        }
    };
    fs::write(&args.out, text)?;
    if let Some(truth_path) = &args.truth {
        let mut t = truth_to_json(&events);
        t.push('\n');
        fs::write(truth_path, t)?;
    }
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<(), Error> {
    let report = StyleReport::from_json_str(&fs::read_to_string(&args.report)?)?;
    let truth = AnnotationSet::from_json_str(&fs::read_to_string(&args.truth)?)?;
    let result = compute_tde(&report, &truth, args.fps)?;
    print!("{}", result.table());
    if let Some(out) = &args.out {
        let mut text = result.to_json_string();
        text.push('\n');
        fs::write(out, text)?;
    }
    Ok(())
}

fn run_export(args: &ExportArgs) -> Result<(), Error> {
    let cfg = args.config.resolve()?;
    let ds = load_dataset(&args.input, cfg.frame_rate_hz)?;
    let cfg = Config { frame_rate_hz: ds.frame_rate_hz(), ..cfg }.validated()?;
    if args.graph {
        let (t_min, t_max) = ds
            .frame_range()
            .ok_or_else(|| Error::Validation("dataset has no agents".into()))?;
        let mut out = String::new();
        for frame in t_min..=t_max {
            let g = build_frame_graph(&ds, frame, cfg.mu)?;
            let agents: Vec<&str> =
                g.vertices().iter().map(|&(a, _)| ds.agents()[a].id.as_str()).collect();
            let mut edges = Vec::new();
            for i in 0..g.len() {
                for (j, w) in g.neighbors(i) {
                    if j > i {
                        edges.push(serde_json::json!([i, j, w]));
                    }
                }
            }
            let line = serde_json::json!({ "frame": frame, "agents": agents, "edges": edges });
            out.push_str(&serde_json::to_string(&line).expect("graph line serializes"));
            out.push('\n');
        }
        return write_or_print(&args.out, &out);
    }
    let series_name = args
        .series
        .as_deref()
        .ok_or_else(|| Error::Config("export needs --series <name> or --graph".into()))?;
    let agent_id = args
        .agent
        .as_deref()
        .ok_or_else(|| Error::Config("--series needs --agent <id>".into()))?;
    let series = compute_series(&ds, cfg.mu)?;
    let s = series
        .get(agent_id)
        .ok_or_else(|| Error::Validation(format!("no agent {agent_id:?} in input")))?;
    let rows: Vec<(u64, f64)> = match series_name {
        "closeness" => s.closeness.iter().enumerate().map(|(i, &v)| (s.start_frame + i as u64, v)).collect(),
        "degree" => s.degree.iter().enumerate().map(|(i, &v)| (s.start_frame + i as u64, v as f64)).collect(),
        "sle0" | "sle1" | "sie0" | "sie1" => {
            let signals = smooth_agent_series(&s.closeness, &s.degree, s.start_frame, &cfg)?;
            let values = match series_name {
                "sle0" => signals.closeness.sle(),
                "sle1" => signals.degree.sle(),
                "sie0" => signals.closeness.sie(),
                _ => signals.degree.sie(),
            };
            values.iter().enumerate().map(|(i, &v)| (s.start_frame + i as u64, v)).collect()
        }
        other => {
            return Err(Error::Config(format!(
                "unknown series {other:?} (closeness|degree|sle0|sle1|sie0|sie1)"
            )))
        }
    };
    let mut out = String::from("frame,value\n");
    for (frame, value) in rows {
        out.push_str(&format!("{frame},{value}\n"));
    }
    write_or_print(&args.out, &out)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::FrameOutOfRange { .. }
        | Error::AgentNotPresent(_)
        | Error::SeriesTooShort { .. }
        | Error::Parameter(_)
        | Error::Internal(_) => 2,
        Error::Io(_) => 3,
        Error::Config(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Generate(args) => run_generate(args),
        Command::Eval(args) => run_eval(args),
        Command::Export(args) => run_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
