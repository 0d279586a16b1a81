//! Datasets and studies: the resampling background grid, the culture
//! datasets, per-election statistics, and the metric-correlation study.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::committees::{
    cohesiveness_level, max_approval_score, pav_committee, voters_in_1cohesive_fraction,
};
use crate::correlation::pearson;
use crate::cultures::{interval_points, CultureSpec, EuclideanDim, VoteDistance};
use crate::election::Election;
use crate::error::{Error, Result};
use crate::files::read_election;
use crate::metrics::{pairwise_distances, Metric, MAX_HAMMING_CANDIDATES};
use crate::rng::RngSeed;

/// Default elections per p-line and per φ-line of the background grid.
pub const BACKGROUND_PER_P: usize = 16;
pub const BACKGROUND_PER_PHI: usize = 13;

/// Default PAV budget per election.
pub const DEFAULT_PAV_BUDGET: Duration = Duration::from_secs(600);

/// Culture-dataset size, and the smaller size used for cohesiveness runs.
pub const FULL_SIZE: (usize, usize) = (100, 1000);
pub const COHESIVENESS_SIZE: (usize, usize) = (50, 100);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Culture(CultureSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub source: Source,
    pub seed: RngSeed,
}

impl ManifestEntry {
    /// Culture kind, or `file` for loaded elections.
    pub fn culture(&self) -> &str {
        match &self.source {
            Source::Culture(spec) => spec.kind(),
            Source::File(_) => "file",
        }
    }

    /// `(p, φ)` of a resampling entry.
    pub fn resampling_parameters(&self) -> Option<(f64, f64)> {
        match self.source {
            Source::Culture(CultureSpec::Resampling { p, phi }) => Some((p, phi)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawManifest")]
pub struct DatasetManifest {
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct RawManifest {
    name: String,
    m: usize,
    n: usize,
    entries: Vec<ManifestEntry>,
}

impl TryFrom<RawManifest> for DatasetManifest {
    type Error = Error;

    fn try_from(raw: RawManifest) -> Result<Self> {
        DatasetManifest::new(raw.name, raw.m, raw.n, raw.entries)
    }
}

impl DatasetManifest {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        n: usize,
        entries: Vec<ManifestEntry>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for entry in &entries {
            if !seen.insert(entry.label.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate label `{}`",
                    entry.label
                )));
            }
            if let Source::Culture(spec) = &entry.source {
                spec.validate()?;
            }
        }
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "need m >= 1 and n >= 1, got m={m}, n={n}"
            )));
        }
        Ok(DatasetManifest {
            name: name.into(),
            m,
            n,
            entries,
        })
    }

    /// Entry `i` gets seed stream `i` of `seed`.
    pub fn from_specs(
        name: impl Into<String>,
        m: usize,
        n: usize,
        seed: RngSeed,
        specs: Vec<(String, CultureSpec)>,
    ) -> Result<Self> {
        let entries = specs
            .into_iter()
            .enumerate()
            .map(|(i, (label, spec))| ManifestEntry {
                label,
                source: Source::Culture(spec),
                seed: seed.derive(i as u64),
            })
            .collect();
        DatasetManifest::new(name, m, n, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn generate(&self, index: usize) -> Result<Election> {
        let entry = &self.entries[index];
        match &entry.source {
            Source::Culture(spec) => spec.sample(self.m, self.n, entry.seed),
            Source::File(path) => read_election(path),
        }
    }

    /// Every election, generated in parallel; results are in entry order.
    pub fn generate_all(&self) -> Vec<Result<Election>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.generate(i))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Same entries at a different size; seeds are kept.
    pub fn resized(&self, m: usize, n: usize) -> Result<Self> {
        DatasetManifest::new(self.name.clone(), m, n, self.entries.clone())
    }
}

/// The resampling background grid with the default line densities (241 elections).
pub fn build_background(m: usize, n: usize, seed: RngSeed) -> Result<DatasetManifest> {
    build_background_with(m, n, seed, BACKGROUND_PER_P, BACKGROUND_PER_PHI)
}

/// `p ∈ {0, 0.1, …, 1}` with `per_p` interior φ values each, plus
/// `φ ∈ {0, 0.25, 0.5, 0.75, 1}` with `per_phi` interior p values each.
pub fn build_background_with(
    m: usize,
    n: usize,
    seed: RngSeed,
    per_p: usize,
    per_phi: usize,
) -> Result<DatasetManifest> {
    let mut specs = Vec::with_capacity(11 * per_p + 5 * per_phi);
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        for phi in interval_points(0.0, 1.0, per_p) {
            specs.push((p, phi));
        }
    }
    for phi in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for p in interval_points(0.0, 1.0, per_phi) {
            specs.push((p, phi));
        }
    }
    let specs = specs
        .into_iter()
        .map(|(p, phi)| {
            (
                format!("bg_p{p:.4}_phi{phi:.4}"),
                CultureSpec::Resampling { p, phi },
            )
        })
        .collect();
    DatasetManifest::from_specs("background", m, n, seed, specs)
}

fn nine_p_values() -> impl Iterator<Item = f64> {
    (1..=9).map(|i| i as f64 / 10.0)
}

fn numbered(kind: &str, specs: Vec<CultureSpec>) -> Vec<(String, CultureSpec)> {
    specs
        .into_iter()
        .enumerate()
        .map(|(i, s)| (format!("{kind}_{i:03}"), s))
        .collect()
}

pub fn disjoint_specs() -> Vec<CultureSpec> {
    (2..=6)
        .flat_map(|g| {
            let p = 1.0 / g as f64;
            interval_points(0.05, p, 50)
                .into_iter()
                .map(move |phi| CultureSpec::Disjoint { p, phi, g })
        })
        .collect()
}

pub fn noise_specs() -> Vec<CultureSpec> {
    nine_p_values()
        .flat_map(|p| {
            interval_points(0.0, 1.0, 25)
                .into_iter()
                .map(move |phi| CultureSpec::Noise {
                    p,
                    phi,
                    vote_distance: VoteDistance::Hamming,
                })
        })
        .collect()
}

pub fn urn_specs() -> Vec<CultureSpec> {
    nine_p_values()
        .flat_map(|p| {
            interval_points(0.0, 1.0, 25)
                .into_iter()
                .map(move |alpha| CultureSpec::Urn { p, alpha })
        })
        .collect()
}

pub fn euclidean_specs() -> Vec<CultureSpec> {
    let one = interval_points(0.0025, 0.25, 100)
        .into_iter()
        .map(|radius| CultureSpec::Euclidean {
            radius,
            dim: EuclideanDim::One,
        });
    let two = interval_points(0.005, 0.5, 100)
        .into_iter()
        .map(|radius| CultureSpec::Euclidean {
            radius,
            dim: EuclideanDim::Two,
        });
    one.chain(two).collect()
}

/// Disjoint (250), noise (225), urn (225) and Euclidean (200) datasets at size `(m, n)`.
pub fn build_culture_datasets_sized(
    m: usize,
    n: usize,
    seed: RngSeed,
) -> Result<Vec<DatasetManifest>> {
    let families: [(&str, Vec<CultureSpec>); 4] = [
        ("disjoint", disjoint_specs()),
        ("noise", noise_specs()),
        ("urn", urn_specs()),
        ("euclidean", euclidean_specs()),
    ];
    families
        .into_iter()
        .enumerate()
        .map(|(f, (name, specs))| {
            DatasetManifest::from_specs(name, m, n, seed.derive(f as u64), numbered(name, specs))
        })
        .collect()
}

pub fn build_culture_datasets(seed: RngSeed) -> Result<Vec<DatasetManifest>> {
    build_culture_datasets_sized(FULL_SIZE.0, FULL_SIZE.1, seed)
}

/// The four statistics of one election. Failed computations leave their cells
/// empty and fill `error`; a PAV timeout is not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticsRow {
    pub label: String,
    pub culture: String,
    pub max_score: Option<f64>,
    pub cohesiveness_level: Option<usize>,
    pub cohesive_fraction: Option<f64>,
    /// Time to find a PAV committee and prove it optimal.
    pub pav_runtime_seconds: Option<f64>,
    pub pav_score: Option<f64>,
    pub pav_optimal: Option<bool>,
    pub error: Option<String>,
}

/// Statistic columns usable for coloring maps.
pub const STATISTIC_NAMES: [&str; 5] = [
    "max_score",
    "cohesiveness_level",
    "cohesive_fraction",
    "pav_runtime_seconds",
    "pav_score",
];

impl StatisticsRow {
    fn failed(label: &str, culture: &str, error: &Error) -> Self {
        StatisticsRow {
            label: label.to_string(),
            culture: culture.to_string(),
            max_score: None,
            cohesiveness_level: None,
            cohesive_fraction: None,
            pav_runtime_seconds: None,
            pav_score: None,
            pav_optimal: None,
            error: Some(error.to_string()),
        }
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "max_score" => self.max_score,
            "cohesiveness_level" => self.cohesiveness_level.map(|l| l as f64),
            "cohesive_fraction" => self.cohesive_fraction,
            "pav_runtime_seconds" => self.pav_runtime_seconds,
            "pav_score" => self.pav_score,
            _ => None,
        }
    }
}

fn cheap_statistics(label: &str, culture: &str, e: &Election, k: usize) -> StatisticsRow {
    let computed = (|| -> Result<(usize, f64)> {
        Ok((
            cohesiveness_level(e, k)?.level,
            voters_in_1cohesive_fraction(e, k)?,
        ))
    })();
    match computed {
        Ok((level, fraction)) => StatisticsRow {
            label: label.to_string(),
            culture: culture.to_string(),
            max_score: Some(max_approval_score(e)),
            cohesiveness_level: Some(level),
            cohesive_fraction: Some(fraction),
            pav_runtime_seconds: None,
            pav_score: None,
            pav_optimal: None,
            error: None,
        },
        Err(err) => StatisticsRow::failed(label, culture, &err),
    }
}

fn add_pav(row: &mut StatisticsRow, e: &Election, k: usize, budget: Duration) {
    if row.error.is_some() {
        return;
    }
    match pav_committee(e, k, budget) {
        Ok(out) => {
            row.pav_runtime_seconds = Some(out.solve_elapsed.as_secs_f64());
            row.pav_score = Some(*out.score.numer() as f64 / *out.score.denom() as f64);
            row.pav_optimal = Some(out.is_optimal());
            if !out.is_optimal() {
                log::warn!("{}: PAV budget exhausted, gap {}", row.label, out.gap());
            }
        }
        Err(err) => row.error = Some(err.to_string()),
    }
}

/// Statistics for one election.
pub fn election_statistics(
    label: &str,
    culture: &str,
    e: &Election,
    k: usize,
    budget: Duration,
) -> StatisticsRow {
    let mut row = cheap_statistics(label, culture, e, k);
    add_pav(&mut row, e, k, budget);
    row
}

/// Statistics for labelled elections, sorted by label. Cohesiveness runs in
/// parallel; PAV runs one election at a time so its timings do not compete.
pub fn statistics_table(
    items: &[(String, String, Result<Election>)],
    k: usize,
    budget: Duration,
) -> Vec<StatisticsRow> {
    let mut rows: Vec<StatisticsRow> = items
        .par_iter()
        .map(|(label, culture, e)| match e {
            Ok(e) => cheap_statistics(label, culture, e, k),
            Err(err) => StatisticsRow::failed(label, culture, err),
        })
        .collect();
    for (row, (_, _, e)) in rows.iter_mut().zip(items) {
        if let Ok(e) = e {
            add_pav(row, e, k, budget);
        }
    }
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    rows
}

pub fn run_statistics(
    manifest: &DatasetManifest,
    k: usize,
    pav_budget: Duration,
) -> Vec<StatisticsRow> {
    let items: Vec<(String, String, Result<Election>)> = manifest
        .entries
        .iter()
        .zip(manifest.generate_all())
        .map(|(entry, e)| (entry.label.clone(), entry.culture().to_string(), e))
        .collect();
    statistics_table(&items, k, pav_budget)
}

pub fn write_statistics_csv<W: Write>(rows: &[StatisticsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn statistics_csv_string(rows: &[StatisticsRow]) -> String {
    let mut buf = Vec::new();
    write_statistics_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

pub fn read_statistics_csv<R: Read>(reader: R) -> Result<Vec<StatisticsRow>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationScale {
    /// 363 elections at m=10, n=50.
    Full,
    Desk {
        m: usize,
        n: usize,
        elections: usize,
    },
}

impl CorrelationScale {
    pub const DESK: CorrelationScale = CorrelationScale::Desk {
        m: 6,
        n: 12,
        elections: 60,
    };

    pub fn size(self) -> (usize, usize) {
        match self {
            CorrelationScale::Full => (10, 50),
            CorrelationScale::Desk { m, n, .. } => (m, n),
        }
    }
}

// disjoint, noise, urn, euclidean, resampling, IC, ID
const FULL_COMPOSITION: [usize; 7] = [40, 45, 50, 50, 134, 20, 20];

/// Apportions `total` elections over the cultures in proportion to the
/// full-scale composition, by largest remainder.
fn apportion(total: usize) -> [usize; 7] {
    let whole: usize = FULL_COMPOSITION.iter().sum();
    let mut counts = [0; 7];
    let mut remainders = Vec::with_capacity(7);
    for (i, &share) in FULL_COMPOSITION.iter().enumerate() {
        counts[i] = share * total / whole;
        remainders.push((share * total % whole, i));
    }
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = total - counts.iter().sum::<usize>();
    for &(_, i) in remainders.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// A low-discrepancy point set in the unit square: `((i + ½)/count, frac(i·ψ))`
/// with ψ the golden-ratio conjugate.
fn lattice(i: usize, count: usize) -> (f64, f64) {
    const PSI: f64 = 0.618_033_988_749_894_9;
    ((i as f64 + 0.5) / count as f64, (i as f64 * PSI).fract())
}

/// Cultures and the four extremes for the correlation study.
pub fn correlation_specs(scale: CorrelationScale) -> Result<Vec<(String, CultureSpec)>> {
    let (m, _) = scale.size();
    let counts = match scale {
        CorrelationScale::Full => FULL_COMPOSITION,
        CorrelationScale::Desk { elections, .. } => {
            if elections < 4 {
                return Err(Error::InvalidParameter(format!(
                    "the correlation study needs at least the 4 extreme elections, got {elections}"
                )));
            }
            apportion(elections - 4)
        }
    };
    let mut specs = vec![
        ("empty".to_string(), CultureSpec::Empty),
        ("full".to_string(), CultureSpec::Full),
        ("ic".to_string(), CultureSpec::Ic { p: 0.5 }),
        ("id".to_string(), CultureSpec::Id { p: 0.5 }),
    ];
    let mut push = |kind: &str, count: usize, make: &dyn Fn(f64, f64, usize) -> CultureSpec| {
        for i in 0..count {
            let (u, v) = lattice(i, count);
            specs.push((format!("{kind}_{i:03}"), make(u, v, i)));
        }
    };
    push("disjoint", counts[0], &|_, v, i| {
        let g = (2 + i % 5).min(m.max(1));
        let p = 1.0 / g as f64;
        CultureSpec::Disjoint {
            p,
            phi: 0.05 + (p - 0.05).max(0.0) * v,
            g,
        }
    });
    push("noise", counts[1], &|u, v, _| CultureSpec::Noise {
        p: 0.1 + 0.8 * u,
        phi: v,
        vote_distance: VoteDistance::Hamming,
    });
    push("urn", counts[2], &|u, v, _| CultureSpec::Urn {
        p: 0.1 + 0.8 * u,
        alpha: v,
    });
    push("euclidean", counts[3], &|u, _, i| {
        if i % 2 == 0 {
            CultureSpec::Euclidean {
                radius: 0.0025 + (0.25 - 0.0025) * u,
                dim: EuclideanDim::One,
            }
        } else {
            CultureSpec::Euclidean {
                radius: 0.005 + (0.5 - 0.005) * u,
                dim: EuclideanDim::Two,
            }
        }
    });
    push("resampling", counts[4], &|u, v, _| {
        CultureSpec::Resampling { p: u, phi: v }
    });
    push("ic", counts[5], &|u, _, _| CultureSpec::Ic { p: u });
    push("id", counts[6], &|u, _, _| CultureSpec::Id { p: u });
    Ok(specs)
}

pub fn build_correlation_dataset(
    scale: CorrelationScale,
    seed: RngSeed,
) -> Result<DatasetManifest> {
    let (m, n) = scale.size();
    DatasetManifest::from_specs("correlation", m, n, seed, correlation_specs(scale)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistances {
    pub a: String,
    pub b: String,
    /// Isomorphic Hamming distance divided by `m·n`.
    pub d_ham: f64,
    /// Approvalwise distance divided by `m`.
    pub d_app: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub m: usize,
    pub n: usize,
    pub elections: usize,
    /// `None` when either distance is constant over all pairs.
    pub pearson: Option<f64>,
    /// Pairs whose two normalized distances agree to within 1e-9.
    pub fraction_identical: f64,
    pub pairs: Vec<PairDistances>,
}

impl CorrelationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Both distance columns divided by their maxima, for scatter plots.
    pub fn scatter(&self) -> Vec<(f64, f64)> {
        let max_ham = self.pairs.iter().map(|p| p.d_ham).fold(0.0, f64::max);
        let max_app = self.pairs.iter().map(|p| p.d_app).fold(0.0, f64::max);
        let norm = |x: f64, max: f64| if max > 0.0 { x / max } else { 0.0 };
        self.pairs
            .iter()
            .map(|p| (norm(p.d_ham, max_ham), norm(p.d_app, max_app)))
            .collect()
    }
}

/// Both metrics on every pair of the manifest's elections.
pub fn correlate_manifest(manifest: &DatasetManifest) -> Result<CorrelationReport> {
    if manifest.m > MAX_HAMMING_CANDIDATES {
        return Err(Error::ResourceCap(format!(
            "isomorphic Hamming distance is limited to m <= {MAX_HAMMING_CANDIDATES}, got m = {}",
            manifest.m
        )));
    }
    let elections = manifest
        .generate_all()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let labels = manifest.labels();
    correlate(&labels, &elections)
}

pub fn correlate(labels: &[String], elections: &[Election]) -> Result<CorrelationReport> {
    let (m, n) = match elections.first() {
        Some(e) => (e.m(), e.n()),
        None => return Err(Error::InvalidParameter("no elections to correlate".into())),
    };
    let ham = pairwise_distances(labels, elections, Metric::IsomorphicHamming)?;
    let app = pairwise_distances(labels, elections, Metric::Approvalwise)?;
    let pairs: Vec<PairDistances> = ham
        .upper_triangle()
        .map(|(i, j, d)| PairDistances {
            a: labels[i].clone(),
            b: labels[j].clone(),
            d_ham: d / (m * n) as f64,
            d_app: app.get(i, j) / m as f64,
        })
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.d_ham).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.d_app).collect();
    let pearson = pearson(&xs, &ys);
    if pearson.is_none() {
        log::warn!("correlation is undefined: a distance is constant over all pairs");
    }
    let identical = pairs
        .iter()
        .filter(|p| ((p.d_ham - p.d_app) * m as f64).abs() <= 1e-9)
        .count();
    let fraction_identical = if pairs.is_empty() {
        0.0
    } else {
        identical as f64 / pairs.len() as f64
    };
    Ok(CorrelationReport {
        m,
        n,
        elections: elections.len(),
        pearson,
        fraction_identical,
        pairs,
    })
}

pub fn run_correlation(scale: CorrelationScale, seed: RngSeed) -> Result<CorrelationReport> {
    correlate_manifest(&build_correlation_dataset(scale, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn background_shape() {
        let bg = build_background(20, 10, RngSeed(3)).unwrap();
        assert_eq!(bg.len(), 241);
        let params: Vec<(f64, f64)> = bg
            .entries
            .iter()
            .map(|e| e.resampling_parameters().unwrap())
            .collect();
        assert_eq!(params.iter().filter(|(p, _)| *p == 0.0).count(), 16);
        assert_eq!(params.iter().filter(|(_, phi)| *phi == 0.25).count(), 13);
        assert!(params
            .iter()
            .all(|&(p, phi)| (0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&phi)));

        let p0 = bg
            .entries
            .iter()
            .position(|e| e.resampling_parameters().unwrap().0 == 0.0)
            .unwrap();
        assert_eq!(bg.generate(p0).unwrap(), Election::empty(20, 10).unwrap());

        let id = bg
            .entries
            .iter()
            .position(|e| e.resampling_parameters().unwrap().1 == 0.0)
            .unwrap();
        let e = bg.generate(id).unwrap();
        assert!(e.votes().iter().all(|b| b == &e.votes()[0]));
    }

    #[test]
    fn culture_dataset_counts() {
        let sets = build_culture_datasets(RngSeed(1)).unwrap();
        let sizes: Vec<(String, usize)> = sets.iter().map(|s| (s.name.clone(), s.len())).collect();
        assert_eq!(
            sizes,
            vec![
                ("disjoint".to_string(), 250),
                ("noise".to_string(), 225),
                ("urn".to_string(), 225),
                ("euclidean".to_string(), 200)
            ]
        );
        assert!(sets.iter().all(|s| (s.m, s.n) == (100, 1000)));
        for entry in &sets[0].entries {
            let Source::Culture(CultureSpec::Disjoint { phi, g, .. }) = entry.source else {
                panic!()
            };
            assert!(phi > 0.05 && phi < 1.0 / g as f64);
        }
        let small =
            build_culture_datasets_sized(COHESIVENESS_SIZE.0, COHESIVENESS_SIZE.1, RngSeed(1))
                .unwrap();
        assert_eq!(small[3].entries, sets[3].entries);
    }

    #[test]
    fn manifests_regenerate_identically_and_round_trip() {
        let bg = build_background(8, 5, RngSeed(11)).unwrap();
        let json = bg.to_json();
        let again = DatasetManifest::from_json(&json).unwrap();
        assert_eq!(again, bg);
        let a: Vec<Election> = bg.generate_all().into_iter().map(|e| e.unwrap()).collect();
        let b: Vec<Election> = again
            .generate_all()
            .into_iter()
            .map(|e| e.unwrap())
            .collect();
        assert_eq!(a, b);

        let dup = json.replacen("bg_p0.1000_phi0.0588", "bg_p0.0000_phi0.0588", 1);
        assert!(DatasetManifest::from_json(&dup).is_err());
    }

    #[test]
    fn composition() {
        assert_eq!(
            correlation_specs(CorrelationScale::Full).unwrap().len(),
            363
        );
        assert_eq!(apportion(56), [6, 7, 8, 8, 21, 3, 3]);
        let desk = correlation_specs(CorrelationScale::DESK).unwrap();
        assert_eq!(desk.len(), 60);
        for kind in [
            "disjoint",
            "noise",
            "urn",
            "euclidean",
            "resampling",
            "ic",
            "id",
        ] {
            assert!(desk.iter().any(|(_, s)| s.kind() == kind), "{kind}");
        }
        assert!(correlation_specs(CorrelationScale::Desk {
            m: 4,
            n: 4,
            elections: 3
        })
        .is_err());
    }

    #[test]
    fn statistics_rows() {
        let k = 3;
        let budget = Duration::from_secs(10);
        let empty = election_statistics("e", "empty", &Election::empty(6, 4).unwrap(), k, budget);
        assert_eq!(empty.max_score, Some(0.0));
        assert_eq!(empty.cohesiveness_level, Some(0));
        assert_eq!(empty.cohesive_fraction, Some(0.0));
        assert_eq!(empty.pav_score, Some(0.0));

        let id = CultureSpec::Id { p: 0.5 }
            .sample(10, 7, RngSeed(1))
            .unwrap();
        let row = election_statistics("id", "id", &id, k, budget);
        assert_eq!(
            (row.max_score, row.cohesiveness_level),
            (Some(1.0), Some(3))
        );

        let bad = election_statistics("tiny", "full", &Election::full(2, 3).unwrap(), k, budget);
        assert!(bad.error.is_some() && bad.max_score.is_none());

        let rows = vec![empty, row, bad];
        let text = statistics_csv_string(&rows);
        assert!(text.starts_with("label,culture,max_score,cohesiveness_level,cohesive_fraction,"));
        assert_eq!(read_statistics_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn run_statistics_sorts_by_label() {
        let bg = build_background_with(6, 8, RngSeed(2), 2, 1).unwrap();
        let rows = run_statistics(&bg, 2, Duration::from_secs(10));
        assert_eq!(rows.len(), bg.len());
        assert!(rows.windows(2).all(|w| w[0].label < w[1].label));
        assert!(rows
            .iter()
            .all(|r| r.error.is_none() && r.pav_optimal == Some(true)));
    }

    #[test]
    fn correlation_small() {
        let scale = CorrelationScale::Desk {
            m: 4,
            n: 5,
            elections: 14,
        };
        let report = run_correlation(scale, RngSeed(5)).unwrap();
        assert_eq!(report.pairs.len(), 14 * 13 / 2);
        assert!(report.pairs.iter().all(|p| p.d_app <= p.d_ham + 1e-12));
        assert!(report.pearson.unwrap() > 0.5);
        assert!((0.0..=1.0).contains(&report.fraction_identical));
        let empty_full = report
            .pairs
            .iter()
            .find(|p| p.a == "empty" && p.b == "full")
            .unwrap();
        assert_eq!((empty_full.d_ham, empty_full.d_app), (1.0, 1.0));

        let same = vec![Election::empty(3, 2).unwrap(); 3];
        let labels: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let degenerate = correlate(&labels, &same).unwrap();
        assert_eq!(degenerate.pearson, None);
        assert_eq!(degenerate.fraction_identical, 1.0);

        let big = CorrelationScale::Desk {
            m: 11,
            n: 3,
            elections: 5,
        };
        assert!(run_correlation(big, RngSeed(1))
            .unwrap_err()
            .is_resource_cap());
    }
}
