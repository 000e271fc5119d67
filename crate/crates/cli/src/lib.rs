//! Command-line front end: argument definitions and subcommand drivers.

pub mod verify;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fpppart::graph_io::{
    gen_complete, gen_preferential, gen_random, read_assignments, write_assignments,
    write_edge_list,
};
use fpppart::metrics::{
    accumulate, check_constrained_bound, method_bound, sketch_accumulate, BoundCheck,
};
use fpppart::{
    AssignmentFormat, Edge, EdgeAssignment, EdgeReader, Method, MetricsAccumulator, MetricsReport,
    Partitioner, PartitionerConfig, ProjPlane, ReadOptions, SurplusPolicy,
};
use log::{info, warn};
use serde::{Deserialize, Serialize};

/// Edges read per pipeline batch.
const BATCH: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(
    name = "fpppart",
    version,
    about = "Vertex-cut edge partitioning with constrained replica sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a projective plane and print it with an axiom summary.
    Plane(PlaneArgs),
    /// Partition an edge list and report quality metrics.
    Partition(PartitionArgs),
    /// Compute metrics for an existing assignment file.
    Metrics(MetricsArgs),
    /// Run the built-in verification suites.
    Verify(VerifyArgs),
    /// Time each method over a generated or loaded graph.
    Bench(BenchArgs),
    /// Generate a synthetic edge list.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Bin,
}

impl From<Format> for AssignmentFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tsv => AssignmentFormat::Tsv,
            Format::Bin => AssignmentFormat::Bin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlaneArgs {
    /// Plane order (a prime power).
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print only the axiom summary.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub parts: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// What FPP and DFPP do with partitions beyond the plane size.
    #[arg(long)]
    pub surplus: Option<SurplusPolicy>,
    /// Scramble vertex ids before assignment.
    #[arg(long)]
    pub hash_ids: bool,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Assignment file to write.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: Format,
    /// Worker threads (0 uses every core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Abort on malformed input lines instead of skipping them.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub dedup: bool,
    #[arg(long)]
    pub drop_self_loops: bool,
    /// Use sketches for vertex counts (approximate RF).
    #[arg(long)]
    pub approx: bool,
    /// Also write the metrics report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub report_format: ReportFormat,
    /// Run manifest path (default: `<output>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Take method, parameters and input from an earlier run manifest.
    #[arg(long, conflicts_with_all = ["method", "parts", "seed", "surplus", "hash_ids", "input", "format", "dedup", "drop_self_loops", "strict", "approx"])]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Assignment file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub parts: u64,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: Format,
    #[arg(long)]
    pub approx: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub report_format: ReportFormat,
    /// Check the replica bound of this method.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, default_value = "empty")]
    pub surplus: SurplusPolicy,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// default, example, lower-bound, axioms or bounds.
    #[arg(long, default_value = "default")]
    pub suite: verify::Suite,
    /// Print the full result as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `complete:M`, `random:M:E`, `pa:M:D` or `file:PATH`.
    #[arg(long, default_value = "random:20000:200000")]
    pub graph: String,
    #[arg(long, value_delimiter = ',', default_value = "fpp,dfpp,edge2d,torus")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "7,13,31,57")]
    pub parts: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed repetitions per configuration; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: u32,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Complete graph on `m` vertices.
    Complete {
        #[arg(long)]
        m: u64,
    },
    /// `e` distinct edges drawn uniformly from the complete graph.
    Random {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        edges: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Preferential attachment with `d` edges per new vertex.
    Preferential {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        degree: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plane(a) => plane(a),
        Command::Partition(a) => partition(a).map(|_| ExitCode::SUCCESS),
        Command::Metrics(a) => metrics(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => generate(a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct PlaneOutput {
    plane: Option<fpppart::plane::PlaneDump>,
    axioms: fpppart::plane::AxiomReport,
}

fn plane(a: PlaneArgs) -> Result<ExitCode> {
    let plane = ProjPlane::build(a.q)?;
    let axioms = plane.check_axioms();
    let ok = axioms.all_pass();
    let out = PlaneOutput {
        plane: (!a.summary).then(|| plane.dump()),
        axioms,
    };
    let mut w = open_output(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    w.flush()?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputInfo {
    pub path: PathBuf,
    pub bytes: u64,
    pub edges: u64,
    pub skipped_lines: u64,
    pub dedup: bool,
    pub drop_self_loops: bool,
    pub strict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputInfo {
    pub assignments: PathBuf,
    pub format: Format,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Timing {
    pub read_s: f64,
    pub partition_s: f64,
    pub write_s: f64,
    pub metrics_s: f64,
    pub total_s: f64,
}

/// Everything needed to reproduce a partition run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: PartitionerConfig,
    pub used_parts: u64,
    pub replica_bound: u64,
    pub approximate: bool,
    pub parallel: bool,
    pub workers: usize,
    pub input: InputInfo,
    pub outputs: OutputInfo,
    pub timing: Timing,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("{} is not a run manifest", path.display()))
    }
}

/// What `partition` prints on stdout.
#[derive(Debug, Serialize)]
pub struct PartitionSummary {
    pub config: PartitionerConfig,
    pub report: MetricsReport,
    pub bound: Option<BoundCheck>,
    pub skipped_lines: u64,
    pub manifest: PathBuf,
}

enum Acc {
    Exact(MetricsAccumulator),
    Sketch(fpppart::metrics::SketchAccumulator),
}

impl Acc {
    fn absorb(self, batch: &[EdgeAssignment], parts: u64) -> Result<Self> {
        Ok(match self {
            Acc::Exact(a) => Acc::Exact(a.merge(accumulate(batch, parts)?)),
            Acc::Sketch(a) => Acc::Sketch(a.merge(sketch_accumulate(batch, parts)?)),
        })
    }
}

struct Plan {
    config: PartitionerConfig,
    input: PathBuf,
    opts: ReadOptions,
    format: Format,
    approx: bool,
}

fn plan_from_args(a: &PartitionArgs) -> Result<Plan> {
    if let Some(path) = &a.from_manifest {
        let m = RunManifest::load(path)?;
        return Ok(Plan {
            config: m.config,
            opts: ReadOptions {
                dedup: m.input.dedup,
                drop_self_loops: m.input.drop_self_loops,
                strict: m.input.strict,
                ..ReadOptions::default()
            },
            input: m.input.path,
            format: m.outputs.format,
            approx: m.approximate,
        });
    }
    let (Some(method), Some(parts), Some(input)) = (a.method, a.parts, a.input.clone()) else {
        bail!("--method, --parts and --input are required unless --from-manifest is given");
    };
    Ok(Plan {
        config: PartitionerConfig::new(method, parts)
            .with_seed(a.seed.unwrap_or(0))
            .with_surplus(a.surplus.unwrap_or_default())
            .with_hash_ids(a.hash_ids),
        input,
        opts: ReadOptions {
            dedup: a.dedup,
            drop_self_loops: a.drop_self_loops,
            strict: a.strict,
            ..ReadOptions::default()
        },
        format: a.format,
        approx: a.approx,
    })
}

pub fn partition(a: PartitionArgs) -> Result<PartitionSummary> {
    let plan = plan_from_args(&a)?;
    let workers = a.workers;
    fpppart::par::with_workers(workers, move || partition_run(a, plan))
}

fn partition_run(a: PartitionArgs, plan: Plan) -> Result<PartitionSummary> {
    let total = Instant::now();
    let mut timing = Timing::default();
    let partitioner = Partitioner::new(plan.config.clone())?;
    let parts = partitioner.parts();
    info!(
        "{} into {} parts ({} used, replica bound {})",
        plan.config.method,
        parts,
        partitioner.used_parts(),
        partitioner.replica_bound()
    );

    let bytes = fs::metadata(&plan.input)
        .with_context(|| format!("cannot read {}", plan.input.display()))?
        .len();
    let mut reader = EdgeReader::open(&plan.input, plan.opts.clone())
        .with_context(|| format!("cannot open {}", plan.input.display()))?;
    let mut out = BufWriter::new(
        File::create(&a.output).with_context(|| format!("cannot create {}", a.output.display()))?,
    );
    let mut acc = if plan.approx {
        Acc::Sketch(fpppart::metrics::SketchAccumulator::new(parts))
    } else {
        Acc::Exact(MetricsAccumulator::new(parts))
    };
    let mut edges_read = 0u64;
    let mut batch: Vec<Edge> = Vec::with_capacity(BATCH);
    loop {
        let t = Instant::now();
        batch.clear();
        for e in reader.by_ref().take(BATCH) {
            batch.push(e.with_context(|| format!("reading {}", plan.input.display()))?);
        }
        timing.read_s += t.elapsed().as_secs_f64();
        if batch.is_empty() {
            break;
        }
        edges_read += batch.len() as u64;

        let t = Instant::now();
        let assigned = partitioner.partition(&batch);
        timing.partition_s += t.elapsed().as_secs_f64();

        let t = Instant::now();
        write_assignments(&mut out, &assigned, plan.format.into())?;
        timing.write_s += t.elapsed().as_secs_f64();

        let t = Instant::now();
        acc = acc.absorb(&assigned, parts)?;
        timing.metrics_s += t.elapsed().as_secs_f64();
    }
    out.flush()?;
    let skipped = reader.skipped();
    if skipped > 0 {
        warn!(
            "skipped {skipped} malformed lines in {}",
            plan.input.display()
        );
    }

    let t = Instant::now();
    let (report, bound) = match &acc {
        Acc::Exact(acc) => (
            acc.finish(),
            Some(check_constrained_bound(partitioner.replica_bound(), acc)),
        ),
        Acc::Sketch(acc) => (acc.finish(), None),
    };
    timing.metrics_s += t.elapsed().as_secs_f64();
    if let Some(b) = bound.as_ref().filter(|b| !b.pass) {
        warn!(
            "vertex {:?} exceeds the replica bound {}",
            b.witness, b.bound
        );
    }

    if let Some(path) = &a.report {
        let mut w = open_output(Some(path))?;
        write_report(&mut w, &report, a.report_format)?;
        w.flush()?;
    }
    timing.total_s = total.elapsed().as_secs_f64();

    let manifest_path = a.manifest.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".manifest.json");
        p.into()
    });
    let manifest = RunManifest {
        tool: "fpppart".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "partition".into(),
        argv: std::env::args().collect(),
        config: plan.config.clone(),
        used_parts: partitioner.used_parts(),
        replica_bound: partitioner.replica_bound(),
        approximate: plan.approx,
        parallel: fpppart::par::is_parallel(),
        workers: a.workers,
        input: InputInfo {
            path: fs::canonicalize(&plan.input).unwrap_or(plan.input.clone()),
            bytes,
            edges: edges_read,
            skipped_lines: skipped,
            dedup: plan.opts.dedup,
            drop_self_loops: plan.opts.drop_self_loops,
            strict: plan.opts.strict,
        },
        outputs: OutputInfo {
            assignments: a.output.clone(),
            format: plan.format,
            report: a.report.clone(),
        },
        timing,
    };
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )
    .with_context(|| format!("cannot write {}", manifest_path.display()))?;
    info!("wrote {} assignments to {}", edges_read, a.output.display());

    let summary = PartitionSummary {
        config: plan.config,
        report,
        bound,
        skipped_lines: skipped,
        manifest: manifest_path,
    };
    let mut stdout = io::stdout().lock();
    match a.report_format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut stdout, &summary)?;
            writeln!(stdout)?;
        }
        ReportFormat::Csv => write!(stdout, "{}", summary.report.to_csv())?,
    }
    Ok(summary)
}

fn write_report(w: &mut dyn Write, report: &MetricsReport, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)?;
        }
        ReportFormat::Csv => write!(w, "{}", report.to_csv())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct MetricsOutput {
    report: MetricsReport,
    bound: Option<BoundCheck>,
}

fn metrics(a: MetricsArgs) -> Result<ExitCode> {
    let file =
        File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let records = read_assignments(file, a.format.into())?;
    let (report, bound) = if a.approx {
        (sketch_accumulate(&records, a.parts)?.finish(), None)
    } else {
        let acc = accumulate(&records, a.parts)?;
        let bound = match a.method {
            Some(m) => Some(check_constrained_bound(
                method_bound(m, a.parts, a.surplus)?,
                &acc,
            )),
            None => None,
        };
        (acc.finish(), bound)
    };
    let ok = bound.as_ref().is_none_or(|b| b.pass);
    let mut w = open_output(a.output.as_deref())?;
    match a.report_format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &MetricsOutput { report, bound })?;
            writeln!(w)?;
        }
        ReportFormat::Csv => write!(w, "{}", report.to_csv())?,
    }
    w.flush()?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn verify_cmd(a: VerifyArgs) -> Result<ExitCode> {
    let report = fpppart::par::with_workers(a.workers, || verify::run(a.suite));
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        for c in &report.cases {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            writeln!(out, "[{tag}] {}/{}: {}", c.group, c.name, c.detail)?;
        }
        writeln!(out, "{} passed, {} failed", report.passed, report.failed)?;
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Parses a graph description of the form used by `bench --graph`.
pub fn load_graph(spec: &str, seed: u64) -> Result<Vec<Edge>> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    if kind == "file" {
        return Ok(fpppart::graph_io::read_edge_list(
            rest,
            ReadOptions::default(),
        )?);
    }
    let nums: Vec<u64> = rest
        .split(':')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .with_context(|| format!("bad number {s:?} in graph spec {spec:?}"))
        })
        .collect::<Result<_>>()?;
    Ok(match (kind, nums.as_slice()) {
        ("complete", [m]) => gen_complete(*m)?,
        ("random", [m, e]) => gen_random(*m, *e, seed)?,
        ("pa" | "preferential", [m, d]) => gen_preferential(*m, *d, seed)?,
        _ => bail!("unrecognised graph spec {spec:?} (expected complete:M, random:M:E, pa:M:D or file:PATH)"),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub parts: u64,
    pub seconds: f64,
    pub balance: f64,
    pub rf: f64,
    pub max_replicas: u64,
    pub bound: u64,
}

pub fn bench_rows(
    edges: &[Edge],
    methods: &[Method],
    parts: &[u64],
    seed: u64,
    repeat: u32,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &method in methods {
        for &n in parts {
            let p = match Partitioner::new(PartitionerConfig::new(method, n).with_seed(seed)) {
                Ok(p) => p,
                Err(e) => {
                    warn!("skipping {method} at {n} parts: {e}");
                    continue;
                }
            };
            let mut best = f64::INFINITY;
            let mut assigned = Vec::new();
            for _ in 0..repeat.max(1) {
                let t = Instant::now();
                assigned = p.partition(edges);
                best = best.min(t.elapsed().as_secs_f64());
            }
            let acc = accumulate(&assigned, n)?;
            let check = check_constrained_bound(p.replica_bound(), &acc);
            let r = acc.finish();
            rows.push(BenchRow {
                method,
                parts: n,
                seconds: best,
                balance: r.balance,
                rf: r.rf,
                max_replicas: check.max_replicas,
                bound: check.bound,
            });
        }
    }
    Ok(rows)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let edges = load_graph(&a.graph, a.seed)?;
    info!("benchmarking on {} edges", edges.len());
    let rows = fpppart::par::with_workers(a.workers, || {
        bench_rows(&edges, &a.methods, &a.parts, a.seed, a.repeat)
    })?;
    let mut w = open_output(a.output.as_deref())?;
    writeln!(w, "method,parts,seconds,balance,rf,max_replicas,bound")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{:.6},{:.6},{:.6},{},{}",
            r.method, r.parts, r.seconds, r.balance, r.rf, r.max_replicas, r.bound
        )?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn generate(a: GenArgs) -> Result<ExitCode> {
    let edges = match a.kind {
        GenKind::Complete { m } => gen_complete(m)?,
        GenKind::Random { m, edges, seed } => gen_random(m, edges, seed)?,
        GenKind::Preferential { m, degree, seed } => gen_preferential(m, degree, seed)?,
    };
    let w = open_output(a.output.as_deref())?;
    write_edge_list(w, &edges)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn graph_specs() {
        assert_eq!(load_graph("complete:5", 0).unwrap().len(), 10);
        assert_eq!(load_graph("random:100:300", 1).unwrap().len(), 300);
        assert_eq!(
            load_graph("pa:50:3", 1).unwrap().len(),
            load_graph("pa:50:3", 1).unwrap().len()
        );
        assert!(load_graph("ring:5", 0).is_err());
        assert!(load_graph("random:x:3", 0).is_err());
    }

    #[test]
    fn bench_rows_respect_bounds() {
        let g = gen_random(500, 4000, 2).unwrap();
        let rows = bench_rows(&g, &Method::ALL, &[7, 13], 0, 1).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows
            .iter()
            .all(|r| r.max_replicas <= r.bound && r.rf >= 1.0));
    }
}
