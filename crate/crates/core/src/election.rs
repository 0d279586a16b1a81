//! Approval elections, ballots and approvalwise vectors.
//!
//! Candidates are anonymous indices `0..m`. Voters form an ordered list so
//! that files round-trip byte-for-byte, but every metric and statistic in this
//! crate is invariant under reordering voters or renaming candidates.
//!
//! The canonical text format is a header line `m n` followed by exactly `n`
//! lines, each a comma-separated ascending list of approved indices. An empty
//! line is an empty ballot.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of approved candidates, stored as ascending indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Ballot(Vec<usize>);

impl Ballot {
    /// Builds a ballot from any collection of indices; duplicates collapse.
    pub fn new(mut approved: Vec<usize>) -> Self {
        approved.sort_unstable();
        approved.dedup();
        Ballot(approved)
    }

    pub fn empty() -> Self {
        Ballot(Vec::new())
    }

    pub fn full(m: usize) -> Self {
        Ballot((0..m).collect())
    }

    pub fn approved(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn intersection_len(&self, other: &Ballot) -> usize {
        let (mut i, mut j, mut common) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        common
    }

    /// Ballot with every candidate renamed through `mapping` (`c -> mapping[c]`).
    pub fn rename(&self, mapping: &[usize]) -> Ballot {
        Ballot::new(self.0.iter().map(|&c| mapping[c]).collect())
    }
}

impl<'de> Deserialize<'de> for Ballot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<usize>::deserialize(deserializer).map(Ballot::new)
    }
}

impl FromIterator<usize> for Ballot {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Ballot::new(iter.into_iter().collect())
    }
}

/// `|A(u) △ A(v)|`.
pub fn vote_hamming(u: &Ballot, v: &Ballot) -> usize {
    u.len() + v.len() - 2 * u.intersection_len(v)
}

/// Hamming distance over the size of the union; two empty ballots are at distance 0.
pub fn vote_jaccard(u: &Ballot, v: &Ballot) -> f64 {
    let common = u.intersection_len(v);
    let union = u.len() + v.len() - common;
    if union == 0 {
        return 0.0;
    }
    (union - common) as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ElectionJson", into = "ElectionJson")]
pub struct Election {
    m: usize,
    votes: Vec<Ballot>,
}

#[derive(Serialize, Deserialize)]
struct ElectionJson {
    m: usize,
    votes: Vec<Ballot>,
}

impl TryFrom<ElectionJson> for Election {
    type Error = Error;

    fn try_from(raw: ElectionJson) -> Result<Self> {
        Election::from_ballots(raw.m, raw.votes)
    }
}

impl From<Election> for ElectionJson {
    fn from(e: Election) -> Self {
        ElectionJson {
            m: e.m,
            votes: e.votes,
        }
    }
}

impl Election {
    pub fn new(m: usize, votes: Vec<Vec<usize>>) -> Result<Self> {
        Election::from_ballots(m, votes.into_iter().map(Ballot::new).collect())
    }

    pub fn from_ballots(m: usize, votes: Vec<Ballot>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidElection(
                "at least one candidate required".into(),
            ));
        }
        if votes.is_empty() {
            return Err(Error::InvalidElection("at least one voter required".into()));
        }
        for ballot in &votes {
            if let Some(&index) = ballot.approved().last() {
                if index >= m {
                    return Err(Error::CandidateOutOfRange { index, m });
                }
            }
        }
        Ok(Election { m, votes })
    }

    pub fn empty(m: usize, n: usize) -> Result<Self> {
        Election::from_ballots(m, vec![Ballot::empty(); n])
    }

    pub fn full(m: usize, n: usize) -> Result<Self> {
        Election::from_ballots(m, vec![Ballot::full(m); n])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn votes(&self) -> &[Ballot] {
        &self.votes
    }

    pub fn approval_score(&self, c: usize) -> Result<usize> {
        if c >= self.m {
            return Err(Error::CandidateOutOfRange {
                index: c,
                m: self.m,
            });
        }
        Ok(self.votes.iter().filter(|b| b.contains(c)).count())
    }

    /// Approval score of every candidate, indexed by candidate.
    pub fn approval_scores(&self) -> Vec<usize> {
        let mut scores = vec![0; self.m];
        for ballot in &self.votes {
            for &c in ballot.approved() {
                scores[c] += 1;
            }
        }
        scores
    }

    pub fn total_approvals(&self) -> usize {
        self.votes.iter().map(Ballot::len).sum()
    }

    pub fn approvalwise_vector(&self) -> ApprovalwiseVector {
        let n = self.n() as f64;
        let mut values: Vec<f64> = self
            .approval_scores()
            .into_iter()
            .map(|s| s as f64 / n)
            .collect();
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        ApprovalwiseVector(values)
    }

    /// Renames candidates (`c -> candidates[c]`) and reorders voters so that
    /// output voter `i` is input voter `voters[i]`.
    pub fn relabel(&self, candidates: &[usize], voters: &[usize]) -> Result<Election> {
        check_permutation(candidates, self.m, "candidate")?;
        check_permutation(voters, self.n(), "voter")?;
        let votes = voters
            .iter()
            .map(|&v| self.votes[v].rename(candidates))
            .collect();
        Election::from_ballots(self.m, votes)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.n());
        for ballot in &self.votes {
            for (i, c) in ballot.approved().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{c}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Election> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `m n` header"))?;
        let mut fields = header.split_whitespace();
        let mut header_field = |name: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| Error::parse(1, format!("header is missing {name}")))?
                .parse()
                .map_err(|_| {
                    Error::parse(1, format!("header {name} is not a non-negative integer"))
                })
        };
        let m = header_field("m")?;
        let n = header_field("n")?;
        if fields.next().is_some() {
            return Err(Error::parse(1, "header has more than two fields"));
        }

        let mut votes = Vec::with_capacity(n);
        for (offset, line) in lines.enumerate() {
            let line_no = offset + 2;
            if votes.len() == n {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::parse(line_no, format!("more than {n} ballots")));
            }
            let line = line.trim();
            let mut approved = Vec::new();
            if !line.is_empty() {
                for field in line.split(',') {
                    let c: usize = field.trim().parse().map_err(|_| {
                        Error::parse(
                            line_no,
                            format!("`{}` is not a candidate index", field.trim()),
                        )
                    })?;
                    if c >= m {
                        return Err(Error::parse(
                            line_no,
                            format!("candidate {c} out of range for m={m}"),
                        ));
                    }
                    approved.push(c);
                }
            }
            let ballot = Ballot::new(approved.clone());
            if ballot.len() != approved.len() {
                return Err(Error::parse(line_no, "ballot approves a candidate twice"));
            }
            votes.push(ballot);
        }
        if votes.len() != n {
            return Err(Error::parse(
                votes.len() + 2,
                format!("expected {n} ballots, found {}", votes.len()),
            ));
        }
        Election::from_ballots(m, votes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("election serializes")
    }

    pub fn from_json(text: &str) -> Result<Election> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_permutation(perm: &[usize], len: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(Error::InvalidParameter(format!(
            "{what} permutation has length {}, expected {len}",
            perm.len()
        )));
    }
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("not a {what} permutation")));
        }
    }
    Ok(())
}

/// Normalized approval scores sorted in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ApprovalwiseVector(Vec<f64>);

impl ApprovalwiseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(
                "approvalwise entries must lie in [0, 1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "approvalwise entries must be non-increasing".into(),
            ));
        }
        Ok(ApprovalwiseVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1_distance(&self, other: &ApprovalwiseVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch(format!(
                "approvalwise vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(x, y)| (x - y).abs())
            .sum())
    }
}

impl TryFrom<Vec<f64>> for ApprovalwiseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ApprovalwiseVector::new(values)
    }
}

impl From<ApprovalwiseVector> for Vec<f64> {
    fn from(v: ApprovalwiseVector) -> Self {
        v.0
    }
}
