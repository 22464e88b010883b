//! Command-line frontend: sampling, classification, estimation, class-count
//! selection, mixed-group splitting, bound tables and simulation sweeps.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use sbm_lg::bounds::{self, EstimationBoundForm};
use sbm_lg::io as fmt;
use sbm_lg::sim::{self, RunConfig};
use sbm_lg::{
    estimate, estimate_via_lg, lg_partition, sample_graph, sample_labels, select_q,
    split_mixed_group, DegreeProfile, Graph, ModelParams,
};

#[derive(Parser)]
#[command(name = "sbm-lg", version, about = "Degree-based block model inference")]
struct Cli {
    /// Worker threads (default: available parallelism). Outputs do not
    /// depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph (and its labels) from model parameters.
    Generate(GenerateArgs),
    /// Classify nodes from an edge list or a degree file.
    Classify(ClassifyArgs),
    /// Plug-in parameter estimates from a graph and a partition.
    Estimate(EstimateArgs),
    /// Select the class count by the penalized gap criterion.
    SelectQ(SelectArgs),
    /// Split a merged group using common-neighbor counts.
    SplitMixed(SplitArgs),
    /// Tabulate finite-sample bounds over a grid of node counts.
    Bounds(BoundsArgs),
    /// Run a seeded replicate sweep and write row/aggregate CSVs.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Model parameters JSON: {"Q":..,"alpha":[..],"pi":[[..]]}.
    #[arg(long)]
    params: PathBuf,
    /// Node count.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the sampled labels as CSV.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Edge-list path (or degree file with --degrees).
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as a degree file: one degree per line.
    #[arg(long)]
    degrees: bool,
    /// Class count.
    #[arg(long)]
    q: usize,
    /// Labels CSV output (stdout when omitted).
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Classification summary JSON output.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Edge-list path.
    #[arg(long)]
    input: PathBuf,
    /// Class count.
    #[arg(long)]
    q: usize,
    /// Labels CSV; when omitted the partition comes from the classifier.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Estimate JSON output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Edge-list path (or degree file with --degrees).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    degrees: bool,
    /// Largest candidate class count.
    #[arg(long, default_value_t = 30)]
    q_max: usize,
    /// Penalty exponent in (0,1).
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Report JSON output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Candidate table CSV output.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// Edge-list path.
    #[arg(long)]
    input: PathBuf,
    /// Member list, one node id per line (all nodes when omitted).
    #[arg(long)]
    members: Option<PathBuf>,
    /// Warn when the group implies more pairs than this.
    #[arg(long, default_value_t = 20_000)]
    pair_budget: u64,
    /// Split JSON output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Subgroup labels CSV output.
    #[arg(long)]
    subgroups_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Model parameters JSON (delta, alpha0 and Q are derived from it).
    #[arg(long)]
    params: PathBuf,
    /// Node counts: comma-separated values, or lo:hi:step.
    #[arg(long)]
    n_grid: String,
    /// Deviation level for the t-dependent bounds.
    #[arg(long)]
    t: Option<f64>,
    /// CSV output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Sweep configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the penalty exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Override the selection cap.
    #[arg(long)]
    q_max: Option<usize>,
    /// Enable class-count selection per replicate.
    #[arg(long)]
    select: bool,
    /// Disable the plug-in estimators.
    #[arg(long)]
    no_estimate: bool,
    /// Output directory for rows.csv and aggregate.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<sbm_lg::Error> for CliError {
    fn from(e: sbm_lg::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Classify(a) => classify(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::SelectQ(a) => select_cmd(a),
        Command::SplitMixed(a) => split_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .read_to_string(&mut s)?;
    Ok(s)
}

fn load_params(path: &Path) -> Result<ModelParams, CliError> {
    Ok(ModelParams::from_json(&read_to_string(path)?)?)
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(fmt::read_edge_list(BufReader::new(f))?)
}

fn load_profile(path: &Path, degrees: bool) -> Result<DegreeProfile, CliError> {
    if degrees {
        let f =
            File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let d = fmt::read_degree_file(BufReader::new(f))?;
        Ok(DegreeProfile::from_degrees(d.len(), &d)?)
    } else {
        Ok(DegreeProfile::from_graph(&load_graph(path)?)?)
    }
}

/// Writes through a closure either to a file or to stdout.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> CliResult) -> CliResult {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(
                File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
            );
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> CliResult {
    if a.n < 1 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let params = load_params(&a.params)?;
    let labels = sample_labels(&params, a.n, a.seed);
    let graph = sample_graph(&params, &labels, a.seed);
    emit(Some(&a.out), |w| Ok(fmt::write_edge_list(&graph, w)?))?;
    if let Some(p) = &a.labels_out {
        emit(Some(p), |w| Ok(fmt::write_labels_csv(&labels, w)?))?;
    }
    Ok(())
}

fn classify(a: ClassifyArgs) -> CliResult {
    let profile = load_profile(&a.input, a.degrees)?;
    let result = lg_partition(&profile, a.q)?;
    emit(a.labels_out.as_deref(), |w| {
        Ok(fmt::write_labels_csv(&result.labels, w)?)
    })?;
    if let Some(p) = &a.summary_out {
        emit(Some(p), |w| {
            writeln!(w, "{}", fmt::lg_summary_json(&result))?;
            Ok(())
        })?;
    }
    Ok(())
}

fn estimate_cmd(a: EstimateArgs) -> CliResult {
    let graph = load_graph(&a.input)?;
    let est = match &a.labels {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            let z = fmt::read_labels_csv(BufReader::new(f), a.q)?;
            estimate(&graph, &z, a.q)?
        }
        None => estimate_via_lg(&graph, a.q)?.1,
    };
    emit(a.out.as_deref(), |w| {
        writeln!(w, "{}", fmt::estimate_json(&est))?;
        Ok(())
    })
}

fn select_cmd(a: SelectArgs) -> CliResult {
    let profile = load_profile(&a.input, a.degrees)?;
    let q_max = a.q_max.min(profile.n());
    let report = select_q(&profile, q_max, a.beta)?;
    emit(a.out.as_deref(), |w| {
        writeln!(w, "{}", fmt::selection_json(&report))?;
        Ok(())
    })?;
    if let Some(p) = &a.csv_out {
        emit(Some(p), |w| Ok(fmt::selection_csv(&report, w)?))?;
    }
    Ok(())
}

fn split_cmd(a: SplitArgs) -> CliResult {
    let graph = load_graph(&a.input)?;
    let members: Vec<u32> = match &a.members {
        Some(p) => {
            let text = read_to_string(p)?;
            let mut v = Vec::new();
            for (k, line) in text.lines().enumerate() {
                let t = line.trim();
                if t.is_empty() {
                    continue;
                }
                v.push(t.parse::<u32>().map_err(|e| {
                    CliError::Data(format!("{}:{}: {e}", p.display(), k + 1))
                })?);
            }
            v
        }
        None => (0..graph.n() as u32).collect(),
    };
    let m = members.len() as u64;
    let pairs = m * m.saturating_sub(1) / 2;
    if pairs > a.pair_budget {
        eprintln!(
            "warning: {m} members imply {pairs} pairs, over the budget of {}",
            a.pair_budget
        );
    }
    let result = split_mixed_group(&graph, &members)?;
    emit(a.out.as_deref(), |w| {
        writeln!(w, "{}", fmt::split_json(&result))?;
        Ok(())
    })?;
    if let Some(p) = &a.subgroups_out {
        emit(Some(p), |w| Ok(fmt::split_subgroups_csv(&result, w)?))?;
    }
    Ok(())
}

fn parse_n_grid(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("--n-grid {spec:?}: {msg}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:step"));
        }
        let lo: u64 = parts[0].parse().map_err(|_| bad("bad lo"))?;
        let hi: u64 = parts[1].parse().map_err(|_| bad("bad hi"))?;
        let step: u64 = parts[2].parse().map_err(|_| bad("bad step"))?;
        if step == 0 || hi < lo {
            return Err(bad("need step > 0 and hi >= lo"));
        }
        Ok((lo..=hi).step_by(step as usize).collect())
    } else {
        spec.split(',')
            .map(|tok| tok.trim().parse::<u64>().map_err(|_| bad("bad entry")))
            .collect()
    }
}

fn bounds_cmd(a: BoundsArgs) -> CliResult {
    let params = load_params(&a.params)?;
    let md = params.mean_degrees();
    let delta = md
        .delta
        .ok_or_else(|| CliError::Data("bounds need at least two classes".into()))?;
    let grid = parse_n_grid(&a.n_grid)?;
    emit(a.out.as_deref(), |w| {
        let mut header = String::from("n,error_bound,error_bound_clamped");
        if a.t.is_some() {
            header.push_str(
                ",spreading_bound,spreading_bound_clamped,estimation_bound,estimation_bound_clamped,product_bound,product_bound_clamped",
            );
        }
        writeln!(w, "{header}").map_err(CliError::from)?;
        for &n in &grid {
            let eb = bounds::error_bound(n, delta, md.alpha0, params.q())?;
            let mut line = format!(
                "{n},{},{}",
                fmt::fmt_f64(eb),
                fmt::fmt_f64(bounds::clamp_unit(eb))
            );
            if let Some(t) = a.t {
                let sb = bounds::spreading_bound(n, t)?;
                let est = bounds::estimation_bound(
                    n,
                    t,
                    delta,
                    md.alpha0,
                    params.q(),
                    EstimationBoundForm::Combined,
                )?;
                let pb = bounds::product_concentration_bound(n, t)?;
                line.push_str(&format!(
                    ",{},{},{},{},{},{}",
                    fmt::fmt_f64(sb),
                    fmt::fmt_f64(bounds::clamp_unit(sb)),
                    fmt::fmt_f64(est),
                    fmt::fmt_f64(bounds::clamp_unit(est)),
                    fmt::fmt_f64(pb),
                    fmt::fmt_f64(bounds::clamp_unit(pb))
                ));
            }
            writeln!(w, "{line}").map_err(CliError::from)?;
        }
        Ok(())
    })
}

fn simulate_cmd(a: SimulateArgs) -> CliResult {
    let mut cfg = RunConfig::from_json(&read_to_string(&a.config)?)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(b) = a.beta {
        cfg.beta = b;
    }
    if let Some(q) = a.q_max {
        cfg.q_max = q;
    }
    if a.select {
        cfg.with_selection = true;
    }
    if a.no_estimate {
        cfg.with_estimation = false;
    }
    cfg.validate()?;
    std::fs::create_dir_all(&a.out_dir)?;
    let out = sim::run_simulation(&cfg)?;
    emit(Some(&a.out_dir.join("rows.csv")), |w| {
        Ok(sim::write_records_csv(&cfg, &out.rows, w)?)
    })?;
    emit(Some(&a.out_dir.join("aggregate.csv")), |w| {
        Ok(sim::write_aggregates_csv(&cfg, &out.aggregates, w)?)
    })?;
    Ok(())
}
