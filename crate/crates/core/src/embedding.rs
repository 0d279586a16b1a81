//! Force-directed embedding of a distance matrix into the plane.
//!
//! Fruchterman–Reingold on the complete graph with a per-pair ideal length
//! equal to the (rescaled) input distance. A pair at distance `d` with ideal
//! length `t` attracts with `d²/t` and repels with `t²/d`; the two balance
//! exactly at `d = t`, and the net force is the gradient of the energy
//! `d³/(3t) − t²·ln d`. Displacements are capped by a linearly cooling
//! temperature, and the iteration count is fixed so layouts are bit-stable.
//!
//! Points are processed in label order and initialized from a hash of
//! `(label, seed)`, so permuting the input does not change any coordinate.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub iterations: usize,
    /// Largest displacement in the first iteration, as a fraction of the largest distance.
    pub initial_temperature: f64,
    /// Ideal length used for pairs at distance zero, as a fraction of the largest distance.
    pub min_ideal_length: f64,
    /// Gradient step multiplier; 1.0 settles an isolated pair in one step.
    pub step: f64,
    /// Label rotated to sit straight below the centroid, if present.
    pub anchor: Option<String>,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            iterations: 1000,
            initial_temperature: 0.1,
            min_ideal_length: 1e-3,
            step: 1.0,
            anchor: Some("empty".to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub stats: BTreeMap<String, f64>,
}

fn label_hash(label: &str, occurrence: usize, seed: RngSeed) -> u64 {
    // FNV-1a, fixed so initial layouts never depend on the std hasher.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label
        .bytes()
        .chain(occurrence.to_le_bytes())
        .chain(seed.0.to_le_bytes())
    {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn embed(dm: &DistanceMatrix, cfg: &EmbeddingConfig, seed: RngSeed) -> Result<Vec<MapPoint>> {
    let n = dm.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "embedding needs at least 2 points, got {n}"
        )));
    }
    if cfg.iterations == 0 {
        return Err(Error::InvalidParameter(
            "iterations must be at least 1".into(),
        ));
    }
    let labels = dm.labels();
    let scale = dm.max();
    if scale == 0.0 {
        log::warn!("all distances are zero; every point is placed at the origin");
        return Ok(labels
            .iter()
            .map(|label| MapPoint {
                label: label.clone(),
                x: 0.0,
                y: 0.0,
                stats: BTreeMap::new(),
            })
            .collect());
    }

    // Canonical order: by label, then by input position among duplicates.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    let mut occurrence = vec![0usize; n];
    for w in 1..n {
        if labels[order[w]] == labels[order[w - 1]] {
            occurrence[w] = occurrence[w - 1] + 1;
        }
    }

    let floor = cfg.min_ideal_length;
    let ideal: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (a, b) = (order[idx / n], order[idx % n]);
            (dm.get(a, b) / scale).max(floor)
        })
        .collect();

    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|w| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(label_hash(&labels[order[w]], occurrence[w], seed));
            [rng.gen::<f64>(), rng.gen::<f64>()]
        })
        .collect();

    let eta = cfg.step / (6.0 * (n - 1) as f64);
    let mut disp = vec![[0.0f64; 2]; n];
    for iter in 0..cfg.iterations {
        let temperature = cfg.initial_temperature * (1.0 - iter as f64 / cfg.iterations as f64);
        for d in disp.iter_mut() {
            *d = [0.0, 0.0];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut dx = pos[j][0] - pos[i][0];
                let mut dy = pos[j][1] - pos[i][1];
                let mut dist = (dx * dx + dy * dy).sqrt();
                if dist < 1e-12 {
                    // coincident points: separate along a fixed pair-dependent direction
                    let angle = (i * 7 + j * 13) as f64;
                    dx = angle.cos() * 1e-9;
                    dy = angle.sin() * 1e-9;
                    dist = 1e-9;
                }
                let t = ideal[i * n + j];
                let force = dist * dist / t - t * t / dist;
                let (fx, fy) = (force * dx / dist, force * dy / dist);
                disp[i][0] += fx;
                disp[i][1] += fy;
                disp[j][0] -= fx;
                disp[j][1] -= fy;
            }
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let (mx, my) = (d[0] * eta, d[1] * eta);
            let len = (mx * mx + my * my).sqrt();
            let k = if len > temperature && len > 0.0 {
                temperature / len
            } else {
                1.0
            };
            p[0] += mx * k;
            p[1] += my * k;
        }
    }

    let mut coords = vec![[0.0; 2]; n];
    for (w, &original) in order.iter().enumerate() {
        coords[original] = [pos[w][0] * scale, pos[w][1] * scale];
    }
    if let Some(anchor) = cfg.anchor.as_deref() {
        if let Some(a) = labels.iter().position(|l| l == anchor) {
            orient_below(&mut coords, a);
        }
    }
    Ok(labels
        .iter()
        .zip(coords)
        .map(|(label, [x, y])| MapPoint {
            label: label.clone(),
            x,
            y,
            stats: BTreeMap::new(),
        })
        .collect())
}

/// Rotates about the centroid so point `anchor` lies straight below it (smaller `y`).
fn orient_below(coords: &mut [[f64; 2]], anchor: usize) {
    let n = coords.len() as f64;
    let cx = coords.iter().map(|c| c[0]).sum::<f64>() / n;
    let cy = coords.iter().map(|c| c[1]).sum::<f64>() / n;
    let (ax, ay) = (coords[anchor][0] - cx, coords[anchor][1] - cy);
    if ax == 0.0 && ay == 0.0 {
        return;
    }
    let rotation = -std::f64::consts::FRAC_PI_2 - ay.atan2(ax);
    let (s, c) = rotation.sin_cos();
    for p in coords.iter_mut() {
        let (x, y) = (p[0] - cx, p[1] - cy);
        *p = [cx + c * x - s * y, cy + s * x + c * y];
    }
}

/// Kruskal's normalized stress: `sqrt(Σ(δ − d)² / Σ δ²)` over pairs, where δ are
/// input distances and d embedded Euclidean distances.
pub fn stress(dm: &DistanceMatrix, points: &[MapPoint]) -> Result<f64> {
    if dm.len() != points.len() {
        return Err(Error::SizeMismatch(format!(
            "{} distances rows for {} points",
            dm.len(),
            points.len()
        )));
    }
    let (mut residual, mut total, mut embedded) = (0.0, 0.0, 0.0);
    for (i, j, delta) in dm.upper_triangle() {
        let d = embedded_distance(&points[i], &points[j]);
        residual += (delta - d).powi(2);
        total += delta * delta;
        embedded += d * d;
    }
    if total == 0.0 {
        return Ok(if embedded == 0.0 { 0.0 } else { 1.0 });
    }
    Ok((residual / total).sqrt())
}

pub fn embedded_distance(a: &MapPoint, b: &MapPoint) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Writes `label,x,y,<stat columns>`; stat columns are the union of all keys.
pub fn write_points_csv<W: Write>(points: &[MapPoint], writer: W) -> Result<()> {
    let columns: Vec<String> = points
        .iter()
        .flat_map(|p| p.stats.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut w = csv::Writer::from_writer(writer);
    let header = ["label", "x", "y"]
        .into_iter()
        .map(str::to_string)
        .chain(columns.iter().cloned());
    w.write_record(header)?;
    for p in points {
        let mut row = vec![p.label.clone(), p.x.to_string(), p.y.to_string()];
        row.extend(
            columns
                .iter()
                .map(|c| p.stats.get(c).map(f64::to_string).unwrap_or_default()),
        );
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<MapPoint>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() < 3 || header[0] != "label" || header[1] != "x" || header[2] != "y" {
        return Err(Error::parse(1, "expected header `label,x,y,...`"));
    }
    let mut points = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let number = |field: &str| -> Result<f64> {
            field
                .parse()
                .map_err(|_| Error::parse(line, format!("`{field}` is not a number")))
        };
        let mut stats = BTreeMap::new();
        for (name, field) in header.iter().zip(record.iter()).skip(3) {
            if !field.is_empty() {
                stats.insert(name.clone(), number(field)?);
            }
        }
        points.push(MapPoint {
            label: record[0].to_string(),
            x: number(&record[1])?,
            y: number(&record[2])?,
            stats,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::spearman;

    fn matrix(labels: &[&str], values: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), values).unwrap()
    }

    fn plain() -> EmbeddingConfig {
        EmbeddingConfig {
            anchor: None,
            ..Default::default()
        }
    }

    #[test]
    fn two_points_embed_exactly() {
        let dm = matrix(&["a", "b"], vec![0.0, 3.7, 3.7, 0.0]);
        let pts = embed(&dm, &plain(), RngSeed(1)).unwrap();
        assert!((embedded_distance(&pts[0], &pts[1]) - 3.7).abs() < 1e-9);
        assert!(stress(&dm, &pts).unwrap() < 1e-9);
    }

    #[test]
    fn triangles_embed_within_one_percent() {
        let dm = matrix(
            &["a", "b", "c"],
            vec![0.0, 3.0, 4.0, 3.0, 0.0, 5.0, 4.0, 5.0, 0.0],
        );
        let pts = embed(&dm, &plain(), RngSeed(2)).unwrap();
        for (i, j, d) in dm.upper_triangle() {
            let e = embedded_distance(&pts[i], &pts[j]);
            assert!((e - d).abs() / d < 0.01, "{i}-{j}: {e} vs {d}");
        }
    }

    #[test]
    fn non_planar_compass_reports_residual_stress() {
        // empty, full, 0.5-IC, 0.5-ID for m = 10
        let m = 10.0;
        let h = m / 2.0;
        let dm = matrix(
            &["empty", "full", "ic", "id"],
            vec![0.0, m, h, h, m, 0.0, h, h, h, h, 0.0, h, h, h, h, 0.0],
        );
        let pts = embed(&dm, &EmbeddingConfig::default(), RngSeed(3)).unwrap();
        let s = stress(&dm, &pts).unwrap();
        assert!(s > 1e-3, "{s}");
        assert!(s < 0.5, "{s}");
        // the empty anchor sits straight below the centroid
        let cx = pts.iter().map(|p| p.x).sum::<f64>() / 4.0;
        let cy = pts.iter().map(|p| p.y).sum::<f64>() / 4.0;
        assert!((pts[0].x - cx).abs() < 1e-9 && pts[0].y < cy);
    }

    #[test]
    fn degenerate_matrix_collapses_to_origin() {
        let dm = matrix(&["a", "b"], vec![0.0; 4]);
        let pts = embed(&dm, &plain(), RngSeed(0)).unwrap();
        assert!(pts.iter().all(|p| p.x == 0.0 && p.y == 0.0));
        assert_eq!(stress(&dm, &pts).unwrap(), 0.0);
        assert!(embed(&matrix(&["a"], vec![0.0]), &plain(), RngSeed(0)).is_err());
    }

    fn line_matrix(n: usize) -> DistanceMatrix {
        let labels: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
        let values = (0..n * n)
            .map(|k| ((k / n) as f64 - (k % n) as f64).abs())
            .collect();
        DistanceMatrix::new(labels, values).unwrap()
    }

    #[test]
    fn deterministic_and_order_invariant() {
        let dm = line_matrix(12);
        let a = embed(&dm, &plain(), RngSeed(5)).unwrap();
        let b = embed(&dm, &plain(), RngSeed(5)).unwrap();
        assert_eq!(a, b);

        // reverse input order
        let n = dm.len();
        let rev: Vec<usize> = (0..n).rev().collect();
        let labels: Vec<String> = rev.iter().map(|&i| dm.labels()[i].clone()).collect();
        let values = (0..n * n).map(|k| dm.get(rev[k / n], rev[k % n])).collect();
        let dm_rev = DistanceMatrix::new(labels, values).unwrap();
        let c = embed(&dm_rev, &plain(), RngSeed(5)).unwrap();
        for (w, &i) in rev.iter().enumerate() {
            assert_eq!(c[w], a[i]);
        }
    }

    #[test]
    fn converged_layout_beats_random_layout() {
        let dm = line_matrix(15);
        let converged = embed(&dm, &plain(), RngSeed(6)).unwrap();
        let random = embed(
            &dm,
            &EmbeddingConfig {
                iterations: 1,
                ..plain()
            },
            RngSeed(6),
        )
        .unwrap();
        assert!(stress(&dm, &random).unwrap() >= stress(&dm, &converged).unwrap());
        let input: Vec<f64> = dm.upper_triangle().map(|(_, _, d)| d).collect();
        let output: Vec<f64> = dm
            .upper_triangle()
            .map(|(i, j, _)| embedded_distance(&converged[i], &converged[j]))
            .collect();
        assert!(spearman(&input, &output).unwrap() > 0.95);
    }

    #[test]
    fn stress_ignores_rigid_motions() {
        let dm = line_matrix(8);
        let pts = embed(&dm, &plain(), RngSeed(7)).unwrap();
        let base = stress(&dm, &pts).unwrap();
        for (k, angle) in [0.3f64, 1.7, -2.2].into_iter().enumerate() {
            let (s, c) = angle.sin_cos();
            let moved: Vec<MapPoint> = pts
                .iter()
                .map(|p| MapPoint {
                    x: c * p.x - s * p.y + k as f64,
                    y: s * p.x + c * p.y - 2.0,
                    ..p.clone()
                })
                .collect();
            assert!((stress(&dm, &moved).unwrap() - base).abs() < 1e-9);
        }
    }

    #[test]
    fn points_csv_round_trip() {
        let mut stats = BTreeMap::new();
        stats.insert("max_score".to_string(), 0.25);
        let pts = vec![
            MapPoint {
                label: "a".into(),
                x: 1.5,
                y: -2.0,
                stats,
            },
            MapPoint {
                label: "b".into(),
                x: 0.0,
                y: 3.0,
                stats: BTreeMap::new(),
            },
        ];
        let mut out = Vec::new();
        write_points_csv(&pts, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "label,x,y,max_score\na,1.5,-2,0.25\nb,0,3,\n"
        );
        assert_eq!(read_points_csv(out.as_slice()).unwrap(), pts);
    }
}
