use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use approvalmap::committees::DEFAULT_COMMITTEE_SIZE;
use approvalmap::cultures::CultureSpec;
use approvalmap::embedding::{embed, read_points_csv, write_points_csv, EmbeddingConfig};
use approvalmap::experiments::{
    build_correlation_dataset, correlate_manifest, read_statistics_csv, statistics_csv_string,
    statistics_table, CorrelationScale, DatasetManifest,
};
use approvalmap::files::{election_files, label_of, read_election, write_atomic, write_election};
use approvalmap::ingest::{parse_pabulib_bytes, subsample_indexed};
use approvalmap::metrics::{pairwise_distances, DistanceMatrix, Metric, MAX_HAMMING_CANDIDATES};
use approvalmap::render::{attach_statistics, render_svg, Palette, RenderConfig};
use approvalmap::reproduce::{directory_items, manifest_items, reproduce, ReproduceConfig};
use approvalmap::{Error, RngSeed};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "APPROVALMAP_OUT";

#[derive(Parser)]
#[command(name = "approvalmap", version, about = "Maps of approval elections")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Log progress (-v) or details (-vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample elections from a statistical culture.
    Sample(SampleArgs),
    /// Convert a Pabulib file to an election, optionally subsampled.
    Ingest(IngestArgs),
    /// Pairwise distance matrix of a directory of elections.
    Distance(DistanceArgs),
    /// Max approval score, cohesiveness, cohesive fraction and PAV runtime.
    Stats(StatsArgs),
    /// Lay out a distance matrix in the plane.
    Embed(EmbedArgs),
    /// Embed and render an SVG map colored by a statistic.
    Map(MapArgs),
    /// Correlate isomorphic Hamming and approvalwise distances.
    Correlate(CorrelateArgs),
    /// Regenerate every map, table and report.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct OutDir {
    /// Output directory [default: $APPROVALMAP_OUT, else ./out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OutDir {
    fn get(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn file(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.get().join(default))
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Culture kind: resampling, disjoint, noise, euclidean, urn, ic, id, empty, full.
    #[arg(long, conflicts_with = "spec")]
    kind: Option<String>,
    /// Full culture as JSON, or @path to a JSON file.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// hamming or jaccard.
    #[arg(long)]
    vote_distance: Option<String>,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct IngestArgs {
    /// A `.pb` file.
    input: PathBuf,
    /// Subsample to this many candidates (requires --voters).
    #[arg(long, requires = "voters")]
    candidates: Option<usize>,
    #[arg(long, requires = "candidates")]
    voters: Option<usize>,
    /// Election file to write [default: <out-dir>/<input stem>.txt].
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Approvalwise,
    Hamming,
}

#[derive(Args)]
struct DistanceArgs {
    /// Directory of election files.
    dir: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Approvalwise)]
    metric: MetricArg,
    /// [default: <out-dir>/distances.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Args)]
struct StatsArgs {
    /// Directory of election files.
    #[arg(required_unless_present = "manifest")]
    dir: Option<PathBuf>,
    /// Dataset manifest to generate instead of reading files.
    #[arg(long, conflicts_with = "dir")]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_COMMITTEE_SIZE)]
    k: usize,
    /// PAV time limit per election, in seconds.
    #[arg(long, default_value_t = 600.0)]
    pav_budget: f64,
    /// [default: <out-dir>/statistics.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Label placed straight below the centre.
    #[arg(long, default_value = "empty")]
    anchor: String,
}

impl LayoutArgs {
    fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            iterations: self.iterations,
            anchor: Some(self.anchor.clone()),
            ..EmbeddingConfig::default()
        }
    }
}

#[derive(Args)]
struct EmbedArgs {
    matrix: PathBuf,
    #[command(flatten)]
    layout: LayoutArgs,
    /// [default: <out-dir>/coordinates.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaletteArg {
    Continuous,
    Categorical,
}

#[derive(Args)]
struct MapArgs {
    matrix: PathBuf,
    stats: PathBuf,
    /// A statistic column or `culture`.
    #[arg(long, default_value = "culture")]
    color_by: String,
    /// [default: categorical for culture, continuous otherwise]
    #[arg(long, value_enum)]
    palette: Option<PaletteArg>,
    #[arg(long, default_value_t = 4.0)]
    radius: f64,
    #[arg(long, default_value_t = 800.0)]
    width: f64,
    #[arg(long, default_value_t = 600.0)]
    height: f64,
    #[arg(long)]
    no_legend: bool,
    #[arg(long)]
    title: Option<String>,
    /// Reuse coordinates from `embed` instead of embedding again.
    #[arg(long)]
    coordinates: Option<PathBuf>,
    #[command(flatten)]
    layout: LayoutArgs,
    /// [default: <out-dir>/map.svg]; coordinates go beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 6)]
    m: usize,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 60)]
    elections: usize,
    /// Required for the full scale, which takes hours.
    #[arg(long)]
    expensive: bool,
    /// [default: <out-dir>/correlation.json]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    out_dir: OutDir,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Also run full-size datasets and the full-scale correlation; unbounded time.
    #[arg(long)]
    expensive: bool,
    #[arg(long, default_value_t = DEFAULT_COMMITTEE_SIZE)]
    k: usize,
    /// PAV time limit per election, in seconds.
    #[arg(long, default_value_t = 60.0)]
    pav_budget: f64,
    /// Directory of `.pb` files to add as a dataset.
    #[arg(long)]
    pabulib_dir: Option<PathBuf>,
    #[command(flatten)]
    out: OutDir,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_resource_cap() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let seed = RngSeed(cli.seed);
    let result = match &cli.command {
        Command::Sample(a) => sample(a, seed),
        Command::Ingest(a) => ingest(a, seed),
        Command::Distance(a) => distance(a),
        Command::Stats(a) => stats(a),
        Command::Embed(a) => embed_cmd(a, seed),
        Command::Map(a) => map(a, seed),
        Command::Correlate(a) => correlate(a, seed),
        Command::Reproduce(a) => reproduce_cmd(a, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn seconds(value: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(value).map_err(|_| usage(format!("invalid time budget {value}")))
}

fn culture_spec(a: &SampleArgs) -> Result<CultureSpec, Failure> {
    if let Some(spec) = &a.spec {
        let text = match spec.strip_prefix('@') {
            Some(path) => {
                std::fs::read_to_string(path).map_err(|e| Failure::from(Error::from(e)))?
            }
            None => spec.clone(),
        };
        return serde_json::from_str(&text).map_err(|e| Failure::from(Error::from(e)));
    }
    let kind = a
        .kind
        .clone()
        .ok_or_else(|| usage("either --kind or --spec is required"))?;
    let mut fields = Map::new();
    fields.insert("kind".into(), Value::from(kind));
    let mut put = |name: &str, v: Option<Value>| {
        if let Some(v) = v {
            fields.insert(name.into(), v);
        }
    };
    put("p", a.p.map(Value::from));
    put("phi", a.phi.map(Value::from));
    put("g", a.g.map(Value::from));
    put("alpha", a.alpha.map(Value::from));
    put("radius", a.radius.map(Value::from));
    put("dim", a.dim.map(Value::from));
    put("vote_distance", a.vote_distance.clone().map(Value::from));
    serde_json::from_value(Value::Object(fields)).map_err(|e| usage(e.to_string()))
}

fn sample(a: &SampleArgs, seed: RngSeed) -> CliResult {
    let spec = culture_spec(a)?;
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let dir = a.out.get();
    let specs = (0..a.count)
        .map(|i| (format!("{}_{i:03}", spec.kind()), spec.clone()))
        .collect();
    let manifest = DatasetManifest::from_specs(spec.kind(), a.m, a.n, seed, specs)?;
    for (entry, e) in manifest.entries.iter().zip(manifest.generate_all()) {
        write_election(&dir.join(format!("{}.txt", entry.label)), &e?)?;
    }
    write_atomic(&dir.join("manifest.json"), manifest.to_json().as_bytes())?;
    println!("wrote {} elections to {}", a.count, dir.display());
    Ok(())
}

fn ingest(a: &IngestArgs, seed: RngSeed) -> CliResult {
    let bytes =
        std::fs::read(&a.input).map_err(|e| Failure::from(Error::from(e).in_file(&a.input)))?;
    let inst = parse_pabulib_bytes(&bytes).map_err(|e| Failure::from(e.in_file(&a.input)))?;
    let (mut e, mut labels) = inst.to_election()?;
    if let (Some(m), Some(n)) = (a.candidates, a.voters) {
        let sub = subsample_indexed(&e, m, n, seed)?;
        labels = sub.candidates.iter().map(|&c| labels[c].clone()).collect();
        e = sub.election;
    }
    let out = a
        .out_dir
        .file(&a.out, &format!("{}.txt", label_of(&a.input)));
    write_election(&out, &e)?;
    let mut sidecar = labels.join("\n");
    sidecar.push('\n');
    write_atomic(&out.with_extension("candidates.txt"), sidecar.as_bytes())?;
    println!("wrote {} (m={}, n={})", out.display(), e.m(), e.n());
    Ok(())
}

fn load_dir(dir: &Path) -> Result<(Vec<String>, Vec<approvalmap::Election>), Failure> {
    let files = election_files(dir)?;
    if files.is_empty() {
        return Err(Failure::from(Error::InvalidParameter(format!(
            "no election files in {}",
            dir.display()
        ))));
    }
    let labels = files.iter().map(|p| label_of(p)).collect();
    let elections = files
        .iter()
        .map(|p| read_election(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((labels, elections))
}

fn distance(a: &DistanceArgs) -> CliResult {
    let (labels, elections) = load_dir(&a.dir)?;
    let m = elections[0].m();
    if let Some((label, e)) = labels.iter().zip(&elections).find(|(_, e)| e.m() != m) {
        return Err(Failure::from(Error::SizeMismatch(format!(
            "`{label}` has m={} but `{}` has m={m}; all elections need the same candidate count",
            e.m(),
            labels[0]
        ))));
    }
    let metric = match a.metric {
        MetricArg::Approvalwise => Metric::Approvalwise,
        MetricArg::Hamming => {
            if m > MAX_HAMMING_CANDIDATES {
                return Err(Failure::from(Error::ResourceCap(format!(
                    "isomorphic Hamming distance is limited to m <= {MAX_HAMMING_CANDIDATES}, these elections have m = {m}"
                ))));
            }
            Metric::IsomorphicHamming
        }
    };
    let dm = pairwise_distances(&labels, &elections, metric)?;
    let out = a.out_dir.file(&a.out, "distances.csv");
    write_atomic(&out, dm.to_csv_string().as_bytes())?;
    println!(
        "wrote {}x{} matrix to {}",
        dm.len(),
        dm.len(),
        out.display()
    );
    Ok(())
}

fn stats(a: &StatsArgs) -> CliResult {
    let items = match (&a.dir, &a.manifest) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::from(Error::from(e)))?;
            manifest_items(&DatasetManifest::from_json(&text)?)
        }
        (Some(dir), None) => directory_items(dir)?,
        (None, None) => return Err(usage("a directory or --manifest is required")),
    };
    let rows = statistics_table(&items, a.k, seconds(a.pav_budget)?);
    let out = a.out_dir.file(&a.out, "statistics.csv");
    write_atomic(&out, statistics_csv_string(&rows).as_bytes())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "wrote {} rows to {} ({failed} with errors)",
        rows.len(),
        out.display()
    );
    Ok(())
}

fn read_matrix(path: &Path) -> Result<DistanceMatrix, Failure> {
    let file =
        std::fs::File::open(path).map_err(|e| Failure::from(Error::from(e).in_file(path)))?;
    DistanceMatrix::read_csv(file).map_err(|e| Failure::from(e.in_file(path)))
}

fn embed_cmd(a: &EmbedArgs, seed: RngSeed) -> CliResult {
    let dm = read_matrix(&a.matrix)?;
    let points = embed(&dm, &a.layout.config(), seed)?;
    let mut csv = Vec::new();
    write_points_csv(&points, &mut csv)?;
    let out = a.out_dir.file(&a.out, "coordinates.csv");
    write_atomic(&out, &csv)?;
    println!("wrote {} points to {}", points.len(), out.display());
    Ok(())
}

fn map(a: &MapArgs, seed: RngSeed) -> CliResult {
    let dm = read_matrix(&a.matrix)?;
    let rows = {
        let file = std::fs::File::open(&a.stats)
            .map_err(|e| Failure::from(Error::from(e).in_file(&a.stats)))?;
        read_statistics_csv(file).map_err(|e| Failure::from(e.in_file(&a.stats)))?
    };
    let mut points = match &a.coordinates {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| Failure::from(Error::from(e).in_file(path)))?;
            let points = read_points_csv(file)?;
            let mut ours: Vec<&String> = points.iter().map(|p| &p.label).collect();
            let mut theirs: Vec<&String> = dm.labels().iter().collect();
            ours.sort();
            theirs.sort();
            if ours != theirs {
                return Err(Failure::from(Error::SizeMismatch(
                    "coordinates and matrix have different labels".into(),
                )));
            }
            points
        }
        None => embed(&dm, &a.layout.config(), seed)?,
    };
    let cultures = attach_statistics(&mut points, &rows)?;
    let palette = match a.palette {
        Some(PaletteArg::Continuous) => Palette::Continuous,
        Some(PaletteArg::Categorical) => Palette::Categorical,
        None => RenderConfig::colored_by(&a.color_by).palette,
    };
    let cfg = RenderConfig {
        color_by: a.color_by.clone(),
        palette,
        point_radius: a.radius,
        width: a.width,
        height: a.height,
        legend: !a.no_legend,
        title: a.title.clone(),
    };
    let svg = render_svg(&points, &cultures, &cfg)?;
    let out = a.out_dir.file(&a.out, "map.svg");
    write_atomic(&out, svg.as_bytes())?;
    let mut csv = Vec::new();
    write_points_csv(&points, &mut csv)?;
    write_atomic(&out.with_extension("coordinates.csv"), &csv)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn correlate(a: &CorrelateArgs, seed: RngSeed) -> CliResult {
    let scale = match a.scale {
        ScaleArg::Full if !a.expensive => {
            return Err(usage(
                "the full scale takes hours; pass --expensive to run it",
            ))
        }
        ScaleArg::Full => CorrelationScale::Full,
        ScaleArg::Desk => CorrelationScale::Desk {
            m: a.m,
            n: a.n,
            elections: a.elections,
        },
    };
    let manifest = build_correlation_dataset(scale, seed)?;
    let report = correlate_manifest(&manifest)?;
    let out = a.out_dir.file(&a.out, "correlation.json");
    write_atomic(&out, report.to_json().as_bytes())?;
    match report.pearson {
        Some(r) => println!(
            "pearson {r:.4}, identical pairs {:.4}",
            report.fraction_identical
        ),
        None => println!(
            "pearson undefined (a distance is constant), identical pairs {:.4}",
            report.fraction_identical
        ),
    }
    Ok(())
}

fn reproduce_cmd(a: &ReproduceArgs, seed: RngSeed) -> CliResult {
    let mut cfg = ReproduceConfig::new(a.out.get(), seed);
    cfg.k = a.k;
    cfg.pav_budget = seconds(a.pav_budget)?;
    cfg.expensive = a.expensive;
    cfg.pabulib_dir = a.pabulib_dir.clone();
    let summary = reproduce(&cfg)?;
    for d in &summary.datasets {
        println!(
            "{:<24} {:>4} elections  stress {:.4}  pav timeouts {}  errors {}",
            d.name, d.elections, d.stress, d.pav_timeouts, d.errors
        );
    }
    for c in &summary.correlation {
        println!("correlation m={} n={}: pearson {:?}", c.m, c.n, c.pearson);
    }
    println!("wrote {}", cfg.out_dir.display());
    Ok(())
}
