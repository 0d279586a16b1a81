//! Cohesive groups.
//!
//! A group `V′` is ℓ-cohesive when `|V′| ≥ ℓ·n/k` and its members share at
//! least ℓ approved candidates. Any ℓ-cohesive group can be trimmed to exactly
//! `s = ⌈ℓn/k⌉` voters, so existence at level ℓ is the question whether some ℓ
//! candidates have at least `s` common approvers: frequent-itemset mining with
//! support threshold `s`, answered by a depth-first search that only extends a
//! candidate set while its common support stays at or above `s`.

use serde::{Deserialize, Serialize};

use super::check_committee_size;
use crate::election::Election;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesiveGroup {
    pub voters: Vec<usize>,
    pub candidates: Vec<usize>,
}

impl CohesiveGroup {
    /// Re-checks both defining inequalities against `e`.
    pub fn is_cohesive(&self, e: &Election, k: usize, level: usize) -> bool {
        let large = self.voters.len() * k >= level * e.n();
        let shared = self
            .candidates
            .iter()
            .filter(|&&c| self.voters.iter().all(|&v| e.votes()[v].contains(c)))
            .count();
        large && shared >= level && self.voters.iter().all(|&v| v < e.n())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesivenessResult {
    pub level: usize,
    /// A group certifying `level`; `None` at level 0.
    pub witness: Option<CohesiveGroup>,
}

#[derive(Clone)]
struct VoterSet {
    words: Vec<u64>,
}

impl VoterSet {
    fn empty(n: usize) -> Self {
        VoterSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut set = VoterSet::empty(n);
        for v in 0..n {
            set.insert(v);
        }
        set
    }

    fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn intersect_into(&self, other: &VoterSet, out: &mut VoterSet) -> usize {
        let mut count = 0;
        for ((o, a), b) in out.words.iter_mut().zip(&self.words).zip(&other.words) {
            *o = a & b;
            count += o.count_ones() as usize;
        }
        count
    }

    fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| i * 64 + b)
        })
    }
}

fn group_size(level: usize, n: usize, k: usize) -> usize {
    (level * n).div_ceil(k)
}

struct ItemsetSearch<'a> {
    approvers: &'a [VoterSet],
    pool: Vec<usize>,
    support: usize,
    want: usize,
    chosen: Vec<usize>,
    // scratch intersections, one per depth
    stack: Vec<VoterSet>,
}

impl ItemsetSearch<'_> {
    fn find(&mut self, from: usize) -> bool {
        let depth = self.chosen.len();
        if depth == self.want {
            return true;
        }
        for i in from..self.pool.len() {
            if self.pool.len() - i < self.want - depth {
                return false;
            }
            let c = self.pool[i];
            let (prefix, rest) = self.stack.split_at_mut(depth + 1);
            let common = prefix[depth].intersect_into(&self.approvers[c], &mut rest[0]);
            if common < self.support {
                continue;
            }
            self.chosen.push(c);
            if self.find(i + 1) {
                return true;
            }
            self.chosen.pop();
        }
        false
    }
}

/// A group of exactly `⌈level·n/k⌉` voters sharing `level` candidates, if any.
fn find_group(
    e: &Election,
    k: usize,
    level: usize,
    approvers: &[VoterSet],
    scores: &[usize],
) -> Option<CohesiveGroup> {
    let n = e.n();
    let support = group_size(level, n, k);
    let mut pool: Vec<usize> = (0..e.m()).filter(|&c| scores[c] >= support).collect();
    if pool.len() < level {
        return None;
    }
    pool.sort_by_key(|&c| (std::cmp::Reverse(scores[c]), c));
    let mut search = ItemsetSearch {
        approvers,
        pool,
        support,
        want: level,
        chosen: Vec::with_capacity(level),
        stack: std::iter::once(VoterSet::full(n))
            .chain((0..level).map(|_| VoterSet::empty(n)))
            .collect(),
    };
    if !search.find(0) {
        return None;
    }
    let common = &search.stack[level];
    let voters: Vec<usize> = common.members().take(support).collect();
    let mut candidates = search.chosen;
    candidates.sort_unstable();
    Some(CohesiveGroup { voters, candidates })
}

/// Largest ℓ in `0..=k` admitting an ℓ-cohesive group, found by binary search
/// (an ℓ-cohesive group is also (ℓ−1)-cohesive).
pub fn cohesiveness_level(e: &Election, k: usize) -> Result<CohesivenessResult> {
    check_committee_size(e, k)?;
    let n = e.n();
    let mut approvers = vec![VoterSet::empty(n); e.m()];
    for (v, ballot) in e.votes().iter().enumerate() {
        for &c in ballot.approved() {
            approvers[c].insert(v);
        }
    }
    let scores: Vec<usize> = approvers.iter().map(VoterSet::len).collect();

    let (mut lo, mut hi) = (0, k);
    let mut witness = None;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match find_group(e, k, mid, &approvers, &scores) {
            Some(group) => {
                lo = mid;
                witness = Some(group);
            }
            None => hi = mid - 1,
        }
    }
    if lo > 0 && witness.as_ref().map(|w| w.candidates.len()) != Some(lo) {
        witness = find_group(e, k, lo, &approvers, &scores);
    }
    Ok(CohesivenessResult { level: lo, witness })
}

/// Fraction of voters belonging to some 1-cohesive group: those approving a
/// candidate with at least `n/k` approvers.
pub fn voters_in_1cohesive_fraction(e: &Election, k: usize) -> Result<f64> {
    check_committee_size(e, k)?;
    let needed = group_size(1, e.n(), k);
    let scores = e.approval_scores();
    let covered = e
        .votes()
        .iter()
        .filter(|b| b.approved().iter().any(|&c| scores[c] >= needed))
        .count();
    Ok(covered as f64 / e.n() as f64)
}

/// Highest approval score divided by the number of voters.
pub fn max_approval_score(e: &Election) -> f64 {
    let best = e.approval_scores().into_iter().max().unwrap_or(0);
    best as f64 / e.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cultures::CultureSpec;
    use crate::rng::RngSeed;

    /// Level by enumerating every non-empty voter subset.
    fn brute_force_level(e: &Election, k: usize) -> usize {
        let n = e.n();
        let mut best = 0;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            let shared = (0..e.m())
                .filter(|&c| (0..n).all(|v| mask >> v & 1 == 0 || e.votes()[v].contains(c)))
                .count();
            for level in (best + 1)..=k {
                if size * k >= level * n && shared >= level {
                    best = level;
                }
            }
        }
        best
    }

    fn brute_force_fraction(e: &Election, k: usize) -> f64 {
        let n = e.n();
        let mut covered = vec![false; n];
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            let shares_one =
                (0..e.m()).any(|c| (0..n).all(|v| mask >> v & 1 == 0 || e.votes()[v].contains(c)));
            if size * k >= n && shares_one {
                for (v, cov) in covered.iter_mut().enumerate() {
                    if mask >> v & 1 == 1 {
                        *cov = true;
                    }
                }
            }
        }
        covered.iter().filter(|&&c| c).count() as f64 / n as f64
    }

    #[test]
    fn extremes() {
        let empty = Election::empty(12, 7).unwrap();
        assert_eq!(
            cohesiveness_level(&empty, 4).unwrap(),
            CohesivenessResult {
                level: 0,
                witness: None
            }
        );
        assert_eq!(voters_in_1cohesive_fraction(&empty, 4).unwrap(), 0.0);
        assert_eq!(max_approval_score(&empty), 0.0);

        let full = Election::full(12, 7).unwrap();
        let r = cohesiveness_level(&full, 4).unwrap();
        assert_eq!(r.level, 4);
        assert!(r.witness.unwrap().is_cohesive(&full, 4, 4));
        assert_eq!(voters_in_1cohesive_fraction(&full, 4).unwrap(), 1.0);
        assert_eq!(max_approval_score(&full), 1.0);
    }

    #[test]
    fn identity_elections_reach_k() {
        let e = CultureSpec::Id { p: 0.5 }
            .sample(10, 9, RngSeed(3))
            .unwrap();
        assert_eq!(cohesiveness_level(&e, 5).unwrap().level, 5);
        assert_eq!(voters_in_1cohesive_fraction(&e, 5).unwrap(), 1.0);
    }

    #[test]
    fn max_score_example() {
        let e = Election::new(3, vec![vec![0], vec![0], vec![1]]).unwrap();
        assert!((max_approval_score(&e) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_on_small_instances() {
        let specs = [
            CultureSpec::Ic { p: 0.4 },
            CultureSpec::Resampling { p: 0.3, phi: 0.4 },
            CultureSpec::Disjoint {
                p: 0.3,
                phi: 0.2,
                g: 2,
            },
            CultureSpec::Urn { p: 0.3, alpha: 0.5 },
        ];
        for seed in 0..40u64 {
            let spec = &specs[seed as usize % specs.len()];
            let e = spec
                .sample(8, 1 + (seed as usize % 10), RngSeed(seed))
                .unwrap();
            let k = 1 + (seed as usize % 4);
            let r = cohesiveness_level(&e, k).unwrap();
            assert_eq!(r.level, brute_force_level(&e, k), "seed {seed}");
            if r.level > 0 {
                let w = r.witness.unwrap();
                assert!(w.is_cohesive(&e, k, r.level));
                assert_eq!(w.voters.len(), group_size(r.level, e.n(), k));
            }
            let f = voters_in_1cohesive_fraction(&e, k).unwrap();
            assert_eq!(f, brute_force_fraction(&e, k), "seed {seed}");
        }
    }

    #[test]
    fn level_is_monotone_in_approvals() {
        for seed in 0..20u64 {
            let e = CultureSpec::Ic { p: 0.3 }
                .sample(9, 10, RngSeed(seed))
                .unwrap();
            let mut votes: Vec<Vec<usize>> =
                e.votes().iter().map(|b| b.approved().to_vec()).collect();
            votes[seed as usize % 10].push(seed as usize % 9);
            let more = Election::new(9, votes).unwrap();
            assert!(
                cohesiveness_level(&more, 3).unwrap().level
                    >= cohesiveness_level(&e, 3).unwrap().level
            );
        }
    }

    #[test]
    fn voter_sets_span_word_boundaries() {
        let e = CultureSpec::Id { p: 0.2 }
            .sample(10, 130, RngSeed(1))
            .unwrap();
        let r = cohesiveness_level(&e, 2).unwrap();
        assert_eq!(r.level, 2);
        assert_eq!(r.witness.unwrap().voters.len(), 130);
    }
}
