//! One-shot regeneration of every map, statistics table and correlation report.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::committees::DEFAULT_COMMITTEE_SIZE;
use crate::election::Election;
use crate::embedding::{embed, stress, write_points_csv, EmbeddingConfig, MapPoint};
use crate::error::{Error, Result};
use crate::experiments::{
    build_background, build_correlation_dataset, build_culture_datasets_sized, correlate_manifest,
    statistics_csv_string, statistics_table, CorrelationReport, CorrelationScale, DatasetManifest,
    StatisticsRow, FULL_SIZE, STATISTIC_NAMES,
};
use crate::files::{election_files, label_of, read_election, write_atomic};
use crate::ingest::{is_large_enough, parse_pabulib_bytes, subsample};
use crate::metrics::{pairwise_distances, DistanceMatrix, Metric};
use crate::render::{attach_statistics, render_svg, RenderConfig};
use crate::rng::RngSeed;

/// Election size for desk-scale maps.
pub const DESK_SIZE: (usize, usize) = (50, 200);

/// Subsample size for participatory-budgeting instances.
pub const PABULIB_SIZE: (usize, usize) = (50, 1000);

#[derive(Debug, Clone)]
pub struct ReproduceConfig {
    pub out_dir: PathBuf,
    pub seed: RngSeed,
    pub k: usize,
    pub pav_budget: Duration,
    /// Adds full-size datasets and the full-scale correlation study; unbounded time.
    pub expensive: bool,
    /// Directory of `.pb` files to include as a sixth dataset.
    pub pabulib_dir: Option<PathBuf>,
    pub embedding: EmbeddingConfig,
}

impl ReproduceConfig {
    pub fn new(out_dir: impl Into<PathBuf>, seed: RngSeed) -> Self {
        ReproduceConfig {
            out_dir: out_dir.into(),
            seed,
            k: DEFAULT_COMMITTEE_SIZE,
            pav_budget: Duration::from_secs(60),
            expensive: false,
            pabulib_dir: None,
            embedding: EmbeddingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub elections: usize,
    pub errors: usize,
    pub pav_timeouts: usize,
    pub stress: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceSummary {
    pub datasets: Vec<DatasetSummary>,
    pub correlation: Vec<CorrelationSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationSummary {
    pub m: usize,
    pub n: usize,
    pub elections: usize,
    pub pearson: Option<f64>,
    pub fraction_identical: f64,
}

impl From<&CorrelationReport> for CorrelationSummary {
    fn from(r: &CorrelationReport) -> Self {
        CorrelationSummary {
            m: r.m,
            n: r.n,
            elections: r.elections,
            pearson: r.pearson,
            fraction_identical: r.fraction_identical,
        }
    }
}

/// Labelled elections with their culture; generation failures are kept as errors.
pub type Items = Vec<(String, String, Result<Election>)>;

pub fn manifest_items(manifest: &DatasetManifest) -> Items {
    manifest
        .entries
        .iter()
        .zip(manifest.generate_all())
        .map(|(entry, e)| (entry.label.clone(), entry.culture().to_string(), e))
        .collect()
}

/// Embeds `dm`, attaches statistics and writes `coordinates.csv` plus one SVG per
/// coloring into `dir`. Returns the points and the layout's stress.
pub fn write_maps(
    dir: &Path,
    dm: &DistanceMatrix,
    rows: &[StatisticsRow],
    embedding: &EmbeddingConfig,
    seed: RngSeed,
    title: &str,
) -> Result<(Vec<MapPoint>, f64)> {
    let mut points = embed(dm, embedding, seed)?;
    let layout_stress = stress(dm, &points)?;
    let cultures = attach_statistics(&mut points, rows)?;
    let mut csv = Vec::new();
    write_points_csv(&points, &mut csv)?;
    write_atomic(&dir.join("coordinates.csv"), &csv)?;
    for color_by in std::iter::once("culture").chain(STATISTIC_NAMES) {
        let mut cfg = RenderConfig::colored_by(color_by);
        cfg.title = Some(format!("{title}: {color_by}"));
        let svg = render_svg(&points, &cultures, &cfg)?;
        write_atomic(&dir.join(format!("map_{color_by}.svg")), svg.as_bytes())?;
    }
    Ok((points, layout_stress))
}

struct Study<'a> {
    cfg: &'a ReproduceConfig,
    summary: ReproduceSummary,
}

impl Study<'_> {
    /// Statistics, approvalwise distances and maps for `items`, shown over the
    /// background elections `background` (which are included in the map).
    fn dataset(
        &mut self,
        name: &str,
        (m, n): (usize, usize),
        items: Items,
        background: &[(String, Election, StatisticsRow)],
    ) -> Result<Vec<StatisticsRow>> {
        let dir = self.cfg.out_dir.join(name);
        log::info!("{name}: {} elections at m={m}, n={n}", items.len());
        let rows = statistics_table(&items, self.cfg.k, self.cfg.pav_budget);
        write_atomic(
            &dir.join("statistics.csv"),
            statistics_csv_string(&rows).as_bytes(),
        )?;

        let mut labels = Vec::new();
        let mut elections = Vec::new();
        let mut map_rows = Vec::new();
        for (label, e, row) in background {
            labels.push(label.clone());
            elections.push(e.clone());
            map_rows.push(row.clone());
        }
        for (label, _, e) in items {
            if let Ok(e) = e {
                labels.push(label.clone());
                elections.push(e);
                map_rows.push(
                    rows.iter()
                        .find(|r| r.label == label)
                        .expect("row per item")
                        .clone(),
                );
            }
        }
        let mut summary = DatasetSummary {
            name: name.to_string(),
            m,
            n,
            elections: rows.len(),
            errors: rows.iter().filter(|r| r.error.is_some()).count(),
            pav_timeouts: rows.iter().filter(|r| r.pav_optimal == Some(false)).count(),
            stress: f64::NAN,
        };
        if elections.len() >= 2 {
            let dm = pairwise_distances(&labels, &elections, Metric::Approvalwise)?;
            write_atomic(&dir.join("distances.csv"), dm.to_csv_string().as_bytes())?;
            let mut embedding = self.cfg.embedding.clone();
            if let Some(anchor) = &embedding.anchor {
                if !labels.contains(anchor) {
                    embedding.anchor = background_anchor(&labels);
                }
            }
            let (_, s) = write_maps(&dir, &dm, &map_rows, &embedding, self.cfg.seed, name)?;
            summary.stress = s;
        }
        self.summary.datasets.push(summary);
        Ok(rows)
    }

    fn correlation(&mut self, name: &str, scale: CorrelationScale) -> Result<()> {
        let manifest = build_correlation_dataset(scale, self.cfg.seed)?;
        let dir = self.cfg.out_dir.join(name);
        write_atomic(&dir.join("manifest.json"), manifest.to_json().as_bytes())?;
        let report = correlate_manifest(&manifest)?;
        write_atomic(&dir.join("report.json"), report.to_json().as_bytes())?;
        self.summary
            .correlation
            .push(CorrelationSummary::from(&report));
        Ok(())
    }

    /// Background grid plus every culture dataset at size `(m, n)`.
    fn maps(&mut self, prefix: &str, (m, n): (usize, usize)) -> Result<()> {
        let seed = self.cfg.seed;
        let bg = build_background(m, n, seed)?;
        write_atomic(
            &self
                .cfg
                .out_dir
                .join(format!("{prefix}background/manifest.json")),
            bg.to_json().as_bytes(),
        )?;
        let bg_items = manifest_items(&bg);
        let bg_elections: Vec<(String, Election)> = bg_items
            .iter()
            .filter_map(|(l, _, e)| e.as_ref().ok().map(|e| (l.clone(), e.clone())))
            .collect();
        let rows = self.dataset(&format!("{prefix}background"), (m, n), bg_items, &[])?;
        let background: Vec<(String, Election, StatisticsRow)> = bg_elections
            .into_iter()
            .map(|(l, e)| {
                let row = rows
                    .iter()
                    .find(|r| r.label == l)
                    .expect("row per election")
                    .clone();
                (l, e, row)
            })
            .collect();

        for manifest in build_culture_datasets_sized(m, n, seed.derive(1))? {
            let name = format!("{prefix}{}", manifest.name);
            write_atomic(
                &self.cfg.out_dir.join(&name).join("manifest.json"),
                manifest.to_json().as_bytes(),
            )?;
            self.dataset(&name, (m, n), manifest_items(&manifest), &background)?;
        }
        if let Some(dir) = &self.cfg.pabulib_dir {
            let items = pabulib_items(dir, seed.derive(2))?;
            self.dataset(&format!("{prefix}pabulib"), PABULIB_SIZE, items, &[])?;
        }
        Ok(())
    }
}

fn background_anchor(labels: &[String]) -> Option<String> {
    labels
        .iter()
        .find(|l| l.starts_with("bg_p0.0000_"))
        .cloned()
}

/// Every `.pb` file in `dir` that is large enough, subsampled to 50 candidates and
/// 1000 voters. Smaller files are skipped with a warning.
pub fn pabulib_items(dir: &Path, seed: RngSeed) -> Result<Items> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::from(e).in_file(dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pb"))
        .collect();
    paths.sort();
    let mut items = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
        let (e, _) = parse_pabulib_bytes(&bytes)
            .and_then(|inst| inst.to_election())
            .map_err(|e| e.in_file(path))?;
        if !is_large_enough(&e) {
            log::warn!(
                "{}: too small (m={}, n={}), skipped",
                path.display(),
                e.m(),
                e.n()
            );
            continue;
        }
        let sub = subsample(&e, PABULIB_SIZE.0, PABULIB_SIZE.1, seed.derive(i as u64));
        items.push((label_of(path), "pabulib".to_string(), sub));
    }
    Ok(items)
}

/// Labelled elections from a directory of election files.
pub fn directory_items(dir: &Path) -> Result<Items> {
    Ok(election_files(dir)?
        .into_iter()
        .map(|p| (label_of(&p), "file".to_string(), read_election(&p)))
        .collect())
}

/// Writes all desk-scale artifacts under `cfg.out_dir`, plus full-size ones when
/// `cfg.expensive` is set.
pub fn reproduce(cfg: &ReproduceConfig) -> Result<ReproduceSummary> {
    let mut study = Study {
        cfg,
        summary: ReproduceSummary {
            datasets: Vec::new(),
            correlation: Vec::new(),
        },
    };
    study.maps("desk/", DESK_SIZE)?;
    study.correlation("desk/correlation", CorrelationScale::DESK)?;
    if cfg.expensive {
        study.maps("full/", FULL_SIZE)?;
        study.correlation("full/correlation", CorrelationScale::Full)?;
    }
    let json = serde_json::to_string_pretty(&study.summary)?;
    write_atomic(&cfg.out_dir.join("summary.json"), json.as_bytes())?;
    Ok(study.summary)
}
