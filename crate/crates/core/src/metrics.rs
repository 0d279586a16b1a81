//! Distances between whole elections.
//!
//! Two metrics are provided. The approvalwise distance is the ℓ1 distance
//! between sorted normalized score vectors and is cheap. The isomorphic Hamming
//! distance minimizes total ballot Hamming distance over all candidate renamings
//! and voter matchings; it is NP-hard and computed exactly by branch and bound,
//! so instances above [`MAX_HAMMING_CANDIDATES`] are refused.
//!
//! [`analytic_av`] and [`analytic_distance`] give the limiting approvalwise
//! vectors of resampling elections and the closed-form distances between them.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::min_cost_assignment;
use crate::election::{ApprovalwiseVector, Election};
use crate::error::{Error, Result};

/// Largest candidate count accepted by [`isomorphic_hamming`].
pub const MAX_HAMMING_CANDIDATES: usize = 10;

const INTEGRAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Approvalwise,
    IsomorphicHamming,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approvalwise" | "app" => Ok(Metric::Approvalwise),
            "isomorphic_hamming" | "hamming" | "ham" => Ok(Metric::IsomorphicHamming),
            other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
        }
    }
}

pub fn approvalwise_distance(e: &Election, f: &Election) -> Result<f64> {
    if e.m() != f.m() {
        return Err(Error::SizeMismatch(format!(
            "elections have {} and {} candidates",
            e.m(),
            f.m()
        )));
    }
    e.approvalwise_vector()
        .l1_distance(&f.approvalwise_vector())
}

/// Exact isomorphic Hamming distance, refusing `m > MAX_HAMMING_CANDIDATES`.
pub fn isomorphic_hamming(e: &Election, f: &Election) -> Result<u64> {
    isomorphic_hamming_with_cap(e, f, MAX_HAMMING_CANDIDATES)
}

pub fn isomorphic_hamming_with_cap(
    e: &Election,
    f: &Election,
    max_candidates: usize,
) -> Result<u64> {
    if e.m() != f.m() || e.n() != f.n() {
        return Err(Error::SizeMismatch(format!(
            "isomorphic Hamming needs equal sizes, got (m={}, n={}) and (m={}, n={})",
            e.m(),
            e.n(),
            f.m(),
            f.n()
        )));
    }
    if e.m() > max_candidates {
        return Err(Error::ResourceCap(format!(
            "isomorphic Hamming is exact and limited to m <= {max_candidates}, got m={}",
            e.m()
        )));
    }
    Ok(HammingSearch::new(e, f).run())
}

/// Depth-first branch and bound over candidate bijections.
///
/// A node fixes `σ` on the first `depth` candidates of `E` (in search order).
/// Its lower bound adds two independent parts: the optimal voter matching for
/// the Hamming distance restricted to fixed candidates, and the optimal
/// matching of the remaining candidates by score difference, since a
/// candidate mapped to `d` contributes at least `|score(c) − score(d)|`
/// mismatches under any voter matching.
struct HammingSearch {
    m: usize,
    n: usize,
    // columns[c][i]: does voter i approve candidate c
    e_columns: Vec<Vec<bool>>,
    f_columns: Vec<Vec<bool>>,
    e_scores: Vec<usize>,
    f_scores: Vec<usize>,
    // order in which E's candidates are fixed
    order: Vec<usize>,
    // f_class[d]: smallest F candidate with a column identical to d's
    f_class: Vec<usize>,
    costs: Vec<i64>,
    used_f: Vec<bool>,
    best: u64,
}

impl HammingSearch {
    fn new(e: &Election, f: &Election) -> Self {
        let columns = |x: &Election| -> Vec<Vec<bool>> {
            (0..x.m())
                .map(|c| x.votes().iter().map(|b| b.contains(c)).collect())
                .collect()
        };
        let e_columns = columns(e);
        let f_columns = columns(f);
        let e_scores = e.approval_scores();
        let f_scores = f.approval_scores();
        let m = e.m();
        let n = e.n();
        // Extreme scores first: they are the most constrained.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&c| {
            let s = e_scores[c] as i64;
            std::cmp::Reverse((2 * s - n as i64).abs())
        });
        let f_class = (0..m)
            .map(|d| {
                (0..=d)
                    .find(|&d2| f_columns[d2] == f_columns[d])
                    .unwrap_or(d)
            })
            .collect();
        HammingSearch {
            m,
            n,
            e_columns,
            f_columns,
            e_scores,
            f_scores,
            order,
            f_class,
            costs: vec![0; n * n],
            used_f: vec![false; m],
            best: u64::MAX,
        }
    }

    fn run(mut self) -> u64 {
        self.best = self.initial_upper_bound();
        self.descend(0);
        self.best
    }

    /// Cost of the bijection pairing candidates by score rank.
    fn initial_upper_bound(&self) -> u64 {
        let mut e_rank: Vec<usize> = (0..self.m).collect();
        let mut f_rank: Vec<usize> = (0..self.m).collect();
        e_rank.sort_by_key(|&c| self.e_scores[c]);
        f_rank.sort_by_key(|&d| self.f_scores[d]);
        let mut costs = vec![0i64; self.n * self.n];
        for (&c, &d) in e_rank.iter().zip(&f_rank) {
            add_column_costs(
                &mut costs,
                self.n,
                &self.e_columns[c],
                &self.f_columns[d],
                1,
            );
        }
        min_cost_assignment(self.n, &costs).cost as u64
    }

    fn remaining_score_bound(&self, depth: usize) -> u64 {
        let mut e_rest: Vec<usize> = self.order[depth..]
            .iter()
            .map(|&c| self.e_scores[c])
            .collect();
        let mut f_rest: Vec<usize> = (0..self.m)
            .filter(|&d| !self.used_f[d])
            .map(|d| self.f_scores[d])
            .collect();
        e_rest.sort_unstable();
        f_rest.sort_unstable();
        e_rest
            .iter()
            .zip(&f_rest)
            .map(|(a, b)| a.abs_diff(*b) as u64)
            .sum()
    }

    fn descend(&mut self, depth: usize) {
        let matched = min_cost_assignment(self.n, &self.costs).cost as u64;
        if depth == self.m {
            self.best = self.best.min(matched);
            return;
        }
        if matched + self.remaining_score_bound(depth) >= self.best {
            return;
        }
        let c = self.order[depth];
        let mut candidates: Vec<usize> = (0..self.m)
            .filter(|&d| !self.used_f[d])
            .filter(|&d| {
                // one representative per class of identical unused F columns
                let class = self.f_class[d];
                !(0..d).any(|d2| !self.used_f[d2] && self.f_class[d2] == class)
            })
            .collect();
        candidates.sort_by_key(|&d| (self.e_scores[c].abs_diff(self.f_scores[d]), d));
        for d in candidates {
            self.used_f[d] = true;
            add_column_costs(
                &mut self.costs,
                self.n,
                &self.e_columns[c],
                &self.f_columns[d],
                1,
            );
            self.descend(depth + 1);
            add_column_costs(
                &mut self.costs,
                self.n,
                &self.e_columns[c],
                &self.f_columns[d],
                -1,
            );
            self.used_f[d] = false;
            if self.best == 0 {
                return;
            }
        }
    }
}

fn add_column_costs(costs: &mut [i64], n: usize, e_col: &[bool], f_col: &[bool], sign: i64) {
    for i in 0..n {
        let row = &mut costs[i * n..(i + 1) * n];
        for (j, cell) in row.iter_mut().enumerate() {
            if e_col[i] != f_col[j] {
                *cell += sign;
            }
        }
    }
}

/// A point `(p, φ)` of the resampling grid for `m` candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub phi: f64,
    pub m: usize,
}

impl GridPoint {
    pub fn new(p: f64, phi: f64, m: usize) -> Result<Self> {
        let gp = GridPoint { p, phi, m };
        gp.approved_count()?;
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1], got {phi}"
            )));
        }
        Ok(gp)
    }

    /// `p·m`, which must be an integer.
    pub fn approved_count(&self) -> Result<usize> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [0, 1], got {}",
                self.p
            )));
        }
        let pm = self.p * self.m as f64;
        if (pm - pm.round()).abs() > INTEGRAL_SLACK {
            return Err(Error::InvalidParameter(format!(
                "p·m must be an integer, got {} · {} = {pm}",
                self.p, self.m
            )));
        }
        Ok(pm.round() as usize)
    }
}

/// Limiting approvalwise vector of (p, φ)-resampling: `pm` entries of
/// `(1−φ) + φp` followed by `(1−p)m` entries of `φp`.
pub fn analytic_av(gp: GridPoint) -> Result<ApprovalwiseVector> {
    let approved = gp.approved_count()?;
    let high = (1.0 - gp.phi) + gp.phi * gp.p;
    let low = gp.phi * gp.p;
    let mut values = vec![high; approved];
    values.resize(gp.m, low);
    ApprovalwiseVector::new(values)
}

/// Closed-form approvalwise distance between two limiting resampling vectors.
///
/// Same φ: `m·|p − p′|`. Same p: `2mp(1−p)·|φ − φ′|`. Other pairs fall back to
/// the ℓ1 distance of [`analytic_av`].
pub fn analytic_distance(a: GridPoint, b: GridPoint) -> Result<f64> {
    if a.m != b.m {
        return Err(Error::SizeMismatch(format!(
            "grid points for m={} and m={}",
            a.m, b.m
        )));
    }
    a.approved_count()?;
    b.approved_count()?;
    let m = a.m as f64;
    if a.phi == b.phi {
        Ok(m * (a.p - b.p).abs())
    } else if a.p == b.p {
        Ok(2.0 * m * a.p * (1.0 - a.p) * (a.phi - b.phi).abs())
    } else {
        analytic_av(a)?.l1_distance(&analytic_av(b)?)
    }
}

/// Symmetric matrix of pairwise election distances with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistanceMatrixJson", into = "DistanceMatrixJson")]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistanceMatrixJson {
    labels: Vec<String>,
    distances: Vec<Vec<f64>>,
}

impl TryFrom<DistanceMatrixJson> for DistanceMatrix {
    type Error = Error;

    fn try_from(raw: DistanceMatrixJson) -> Result<Self> {
        let n = raw.labels.len();
        if raw.distances.len() != n || raw.distances.iter().any(|row| row.len() != n) {
            return Err(Error::SizeMismatch(format!(
                "distance matrix must be {n} × {n}"
            )));
        }
        DistanceMatrix::new(raw.labels, raw.distances.into_iter().flatten().collect())
    }
}

impl From<DistanceMatrix> for DistanceMatrixJson {
    fn from(dm: DistanceMatrix) -> Self {
        let n = dm.len();
        DistanceMatrixJson {
            distances: dm
                .values
                .chunks(n.max(1))
                .map(<[f64]>::to_vec)
                .take(n)
                .collect(),
            labels: dm.labels,
        }
    }
}

impl DistanceMatrix {
    /// Validates a row-major matrix: square, symmetric, finite, non-negative, zero diagonal.
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "{} values for {n} labels",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = values[i * n + j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "invalid distance {d} at ({i}, {j})"
                    )));
                }
                if d != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Entries above the diagonal, row by row.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(std::iter::once("label").chain(self.labels.iter().map(String::as_str)))?;
        for (i, label) in self.labels.iter().enumerate() {
            let row = self.row(i).iter().map(|d| format_distance(*d));
            w.write_record(std::iter::once(label.clone()).chain(row))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("csv output is UTF-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let labels: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let n = labels.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let line = i + 2;
            if record.len() != n + 1 {
                return Err(Error::parse(
                    line,
                    format!("expected {} fields, found {}", n + 1, record.len()),
                ));
            }
            if i >= n || record[0] != labels[i] {
                return Err(Error::parse(line, "row label does not match header order"));
            }
            for field in record.iter().skip(1) {
                values.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(line, format!("`{field}` is not a number")))?,
                );
            }
        }
        if values.len() != n * n {
            return Err(Error::parse(n + 2, format!("expected {n} rows")));
        }
        DistanceMatrix::new(labels, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}

/// Shortest round-trip representation.
fn format_distance(d: f64) -> String {
    format!("{d}")
}

/// All pairwise distances, computed in parallel. Errors name the failing pair.
pub fn pairwise_distances(
    labels: &[String],
    elections: &[Election],
    metric: Metric,
) -> Result<DistanceMatrix> {
    if labels.len() != elections.len() {
        return Err(Error::SizeMismatch(format!(
            "{} labels for {} elections",
            labels.len(),
            elections.len()
        )));
    }
    let n = elections.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let distances: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (e, f) = (&elections[i], &elections[j]);
            match metric {
                Metric::Approvalwise => approvalwise_distance(e, f),
                Metric::IsomorphicHamming => isomorphic_hamming(e, f).map(|d| d as f64),
            }
            .map_err(|source| Error::Pair {
                i,
                j,
                source: Box::new(source),
            })
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n * n];
    for (&(i, j), d) in pairs.iter().zip(distances) {
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    DistanceMatrix::new(labels.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cultures::CultureSpec;
    use crate::election::vote_hamming;
    use crate::rng::RngSeed;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if prefix.len() == used.len() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    go(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    /// Minimum over all m!·n! (candidate bijection, voter permutation) pairs.
    fn naive_isomorphic_hamming(e: &Election, f: &Election) -> u64 {
        let voter_perms = permutations(e.n());
        permutations(e.m())
            .iter()
            .map(|sigma| {
                let renamed: Vec<_> = e.votes().iter().map(|b| b.rename(sigma)).collect();
                voter_perms
                    .iter()
                    .map(|rho| {
                        renamed
                            .iter()
                            .zip(rho)
                            .map(|(v, &r)| vote_hamming(v, &f.votes()[r]) as u64)
                            .sum::<u64>()
                    })
                    .min()
                    .unwrap()
            })
            .min()
            .unwrap()
    }

    fn el(m: usize, votes: &[&[usize]]) -> Election {
        Election::new(m, votes.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn approvalwise_examples() {
        let empty = Election::empty(7, 3).unwrap();
        let full = Election::full(7, 5).unwrap();
        assert_eq!(approvalwise_distance(&empty, &full).unwrap(), 7.0);
        assert_eq!(approvalwise_distance(&full, &full).unwrap(), 0.0);
        assert!(matches!(
            approvalwise_distance(&empty, &Election::full(6, 5).unwrap()),
            Err(Error::SizeMismatch(_))
        ));
    }

    #[test]
    fn approvalwise_is_only_a_pseudometric() {
        // different elections, same scores
        let e = el(2, &[&[0], &[1]]);
        let f = el(2, &[&[0, 1], &[]]);
        assert_ne!(e, f);
        assert_eq!(approvalwise_distance(&e, &f).unwrap(), 0.0);
        assert_eq!(isomorphic_hamming(&e, &f).unwrap(), 2);
    }

    #[test]
    fn isomorphic_hamming_examples() {
        let e = el(2, &[&[0], &[1]]);
        let f = el(2, &[&[0], &[0]]);
        assert_eq!(isomorphic_hamming(&e, &f).unwrap(), 2);
        assert_eq!(naive_isomorphic_hamming(&e, &f), 2);
    }

    #[test]
    fn isomorphic_hamming_errors() {
        let e = Election::empty(3, 2).unwrap();
        assert!(matches!(
            isomorphic_hamming(&e, &Election::empty(3, 3).unwrap()),
            Err(Error::SizeMismatch(_))
        ));
        let big = Election::empty(11, 2).unwrap();
        let err = isomorphic_hamming(&big, &big).unwrap_err();
        assert!(err.is_resource_cap());
    }

    #[test]
    fn isomorphic_hamming_at_the_cap() {
        let e = CultureSpec::Ic { p: 0.5 }
            .sample(10, 12, RngSeed(3))
            .unwrap();
        let f = CultureSpec::Resampling { p: 0.3, phi: 0.5 }
            .sample(10, 12, RngSeed(4))
            .unwrap();
        let d = isomorphic_hamming(&e, &f).unwrap();
        assert!(d as f64 >= 12.0 * approvalwise_distance(&e, &f).unwrap() - 1e-9);
    }

    fn arb_pair() -> impl Strategy<Value = (Election, Election)> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
            let election = move || {
                proptest::collection::vec(proptest::collection::vec(0..m, 0..=m), n)
                    .prop_map(move |v| Election::new(m, v).unwrap())
            };
            (election(), election())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn branch_and_bound_matches_naive((e, f) in arb_pair()) {
            prop_assert_eq!(isomorphic_hamming(&e, &f).unwrap(), naive_isomorphic_hamming(&e, &f));
        }

        #[test]
        fn isomorphic_hamming_ignores_relabeling((e, f) in arb_pair(), seed in any::<u64>()) {
            let mut rng = RngSeed(seed).rng();
            let mut cands: Vec<usize> = (0..e.m()).collect();
            let mut voters: Vec<usize> = (0..e.n()).collect();
            cands.shuffle(&mut rng);
            voters.shuffle(&mut rng);
            let e2 = e.relabel(&cands, &voters).unwrap();
            prop_assert_eq!(isomorphic_hamming(&e, &e2).unwrap(), 0);
            prop_assert_eq!(isomorphic_hamming(&e2, &f).unwrap(), isomorphic_hamming(&e, &f).unwrap());
        }

        #[test]
        fn isomorphic_hamming_dominates_counting_bounds((e, f) in arb_pair()) {
            let d = isomorphic_hamming(&e, &f).unwrap();
            let diff = e.total_approvals().abs_diff(f.total_approvals()) as u64;
            prop_assert!(d >= diff);
            prop_assert!(d as f64 >= e.n() as f64 * approvalwise_distance(&e, &f).unwrap() - 1e-9);
            prop_assert_eq!(d, isomorphic_hamming(&f, &e).unwrap());
        }

        #[test]
        fn approvalwise_is_a_pseudometric(
            (m, a, b, c) in (1usize..6).prop_flat_map(|m| {
                let e = move || (1usize..6).prop_flat_map(move |n| {
                    proptest::collection::vec(proptest::collection::vec(0..m, 0..=m), n)
                        .prop_map(move |v| Election::new(m, v).unwrap())
                });
                (Just(m), e(), e(), e())
            })
        ) {
            let d = |x: &Election, y: &Election| approvalwise_distance(x, y).unwrap();
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
            prop_assert!(d(&a, &b) <= m as f64 + 1e-12);
        }
    }

    #[test]
    fn analytic_av_examples() {
        let av = |p, phi| analytic_av(GridPoint::new(p, phi, 4).unwrap()).unwrap();
        assert_eq!(av(0.5, 0.0).values(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(av(0.5, 1.0).values(), &[0.5; 4]);
        assert_eq!(av(0.5, 0.5).values(), &[0.75, 0.75, 0.25, 0.25]);
        assert!(GridPoint::new(0.3, 0.5, 4).is_err());
        assert!(analytic_av(GridPoint {
            p: 0.3,
            phi: 0.5,
            m: 4
        })
        .is_err());
    }

    #[test]
    fn analytic_distance_closed_forms() {
        let m = 20;
        let gp = |p, phi| GridPoint::new(p, phi, m).unwrap();
        let direct = |a: GridPoint, b: GridPoint| {
            analytic_av(a)
                .unwrap()
                .l1_distance(&analytic_av(b).unwrap())
                .unwrap()
        };
        let cases = [
            (gp(0.25, 0.3), gp(0.75, 0.3)),
            (gp(0.25, 0.3), gp(0.25, 0.9)),
            (gp(0.5, 0.0), gp(0.5, 1.0)),
            (gp(0.4, 0.6), gp(0.0, 0.6)),
            (gp(0.4, 0.6), gp(0.4, 0.6)),
            (gp(0.1, 0.2), gp(0.7, 0.8)),
        ];
        for (a, b) in cases {
            let closed = analytic_distance(a, b).unwrap();
            assert!((closed - direct(a, b)).abs() < 1e-12, "{a:?} {b:?}");
        }
        // av(p, φ) to empty is m·p
        assert!((analytic_distance(gp(0.4, 0.6), gp(0.0, 0.6)).unwrap() - 8.0).abs() < 1e-12);
        // p-IC to p-ID is 2mp(1−p)
        assert!((analytic_distance(gp(0.5, 1.0), gp(0.5, 0.0)).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_examples() {
        let e = Election::empty(3, 2).unwrap();
        let dm = pairwise_distances(
            &["a".into()],
            std::slice::from_ref(&e),
            Metric::Approvalwise,
        )
        .unwrap();
        assert_eq!(dm.len(), 1);
        assert_eq!(dm.get(0, 0), 0.0);

        let f = CultureSpec::Ic { p: 0.5 }.sample(4, 5, RngSeed(1)).unwrap();
        let labels: Vec<String> = (0..3).map(|i| format!("e{i}")).collect();
        let dm = pairwise_distances(
            &labels,
            &[f.clone(), f.clone(), f.clone()],
            Metric::IsomorphicHamming,
        )
        .unwrap();
        assert!(dm.upper_triangle().all(|(_, _, d)| d == 0.0));

        let err = pairwise_distances(&labels, &[f.clone(), f.clone(), e], Metric::Approvalwise)
            .unwrap_err();
        assert!(matches!(err, Error::Pair { i: 0, j: 2, .. }), "{err}");
    }

    #[test]
    fn matrix_csv_and_json_round_trip() {
        let dm = DistanceMatrix::new(
            vec!["a".into(), "b,c".into(), "d".into()],
            vec![0.0, 1.5, 0.1, 1.5, 0.0, 2.0, 0.1, 2.0, 0.0],
        )
        .unwrap();
        let csv = dm.to_csv_string();
        assert!(csv.starts_with("label,a,\"b,c\",d\n"));
        assert_eq!(DistanceMatrix::read_csv(csv.as_bytes()).unwrap(), dm);
        let json = dm.to_json();
        assert_eq!(serde_json::from_str::<DistanceMatrix>(&json).unwrap(), dm);

        assert!(
            DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 1.0, 2.0, 0.0]).is_err()
        );
        assert!(DistanceMatrix::new(vec!["a".into()], vec![1.0]).is_err());
        assert!(DistanceMatrix::read_csv("label,a,b\na,0,1\nb,1\n".as_bytes()).is_err());
    }
}
