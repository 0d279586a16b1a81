//! Committee rules (AV, PAV) and cohesive-group statistics.

mod cohesive;
mod pav;

pub use cohesive::{
    cohesiveness_level, max_approval_score, voters_in_1cohesive_fraction, CohesiveGroup,
    CohesivenessResult,
};
pub use pav::{greedy_pav, harmonic, pav_committee, pav_score, PavOutcome, PavScore, PavStatus};

use serde::{Deserialize, Serialize};

use crate::election::Election;
use crate::error::{Error, Result};

/// Default committee size for the election statistics.
pub const DEFAULT_COMMITTEE_SIZE: usize = 10;

/// Default cap on the number of tied AV committees enumerated.
pub const DEFAULT_TIE_LIMIT: usize = 10_000;

/// A set of `k` candidates, stored in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Committee(Vec<usize>);

impl Committee {
    pub fn new(mut members: Vec<usize>, m: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "committee lists a candidate twice".into(),
            ));
        }
        if let Some(&index) = members.last() {
            if index >= m {
                return Err(Error::CandidateOutOfRange { index, m });
            }
        }
        Ok(Committee(members))
    }

    pub fn members(&self) -> &[usize] {
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
}

pub(crate) fn check_committee_size(e: &Election, k: usize) -> Result<()> {
    if k == 0 || k > e.m() {
        return Err(Error::InvalidParameter(format!(
            "committee size must satisfy 1 <= k <= m = {}, got {k}",
            e.m()
        )));
    }
    Ok(())
}

/// Every committee of size `k` with maximum total approval score, in
/// lexicographic order. Refuses when more than `tie_limit` committees tie.
pub fn av_committee(e: &Election, k: usize, tie_limit: usize) -> Result<Vec<Committee>> {
    check_committee_size(e, k)?;
    let scores = e.approval_scores();
    let mut ranked: Vec<usize> = (0..e.m()).collect();
    ranked.sort_by_key(|&c| std::cmp::Reverse(scores[c]));
    let threshold = scores[ranked[k - 1]];
    let sure: Vec<usize> = ranked
        .iter()
        .copied()
        .filter(|&c| scores[c] > threshold)
        .collect();
    let tied: Vec<usize> = {
        let mut t: Vec<usize> = ranked
            .iter()
            .copied()
            .filter(|&c| scores[c] == threshold)
            .collect();
        t.sort_unstable();
        t
    };
    let pick = k - sure.len();
    let count = binomial_saturating(tied.len(), pick);
    if count > tie_limit as u128 {
        return Err(Error::ResourceCap(format!(
            "{count} tied AV committees exceed the limit of {tie_limit}"
        )));
    }

    let mut committees = Vec::with_capacity(count as usize);
    let mut chosen = Vec::with_capacity(pick);
    fn combine(
        tied: &[usize],
        start: usize,
        pick: usize,
        chosen: &mut Vec<usize>,
        sure: &[usize],
        m: usize,
        out: &mut Vec<Committee>,
    ) {
        if chosen.len() == pick {
            let members = sure.iter().chain(chosen.iter()).copied().collect();
            out.push(Committee::new(members, m).expect("valid by construction"));
            return;
        }
        for i in start..tied.len() {
            if tied.len() - i < pick - chosen.len() {
                break;
            }
            chosen.push(tied[i]);
            combine(tied, i + 1, pick, chosen, sure, m, out);
            chosen.pop();
        }
    }
    combine(&tied, 0, pick, &mut chosen, &sure, e.m(), &mut committees);
    committees.sort();
    Ok(committees)
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_scores(scores: &[usize]) -> Election {
        let n = *scores.iter().max().unwrap();
        let votes = (0..n.max(1))
            .map(|v| (0..scores.len()).filter(|&c| scores[c] > v).collect())
            .collect();
        Election::new(scores.len(), votes).unwrap()
    }

    fn members(cs: &[Committee]) -> Vec<Vec<usize>> {
        cs.iter().map(|c| c.members().to_vec()).collect()
    }

    #[test]
    fn av_examples() {
        let e = with_scores(&[3, 2, 1]);
        assert_eq!(
            members(&av_committee(&e, 2, 100).unwrap()),
            vec![vec![0, 1]]
        );

        let e = with_scores(&[1, 1, 1]);
        assert_eq!(
            members(&av_committee(&e, 1, 100).unwrap()),
            vec![vec![0], vec![1], vec![2]]
        );

        let e = with_scores(&[2, 2, 1]);
        assert_eq!(
            members(&av_committee(&e, 1, 100).unwrap()),
            vec![vec![0], vec![1]]
        );

        let e = with_scores(&[1, 3, 2, 2, 2]);
        assert_eq!(
            members(&av_committee(&e, 2, 100).unwrap()),
            vec![vec![1, 2], vec![1, 3], vec![1, 4]]
        );
    }

    #[test]
    fn av_errors() {
        let e = Election::empty(30, 2).unwrap();
        assert!(av_committee(&e, 0, 10).is_err());
        assert!(av_committee(&e, 31, 10).is_err());
        assert!(av_committee(&e, 15, DEFAULT_TIE_LIMIT)
            .unwrap_err()
            .is_resource_cap());
        assert_eq!(av_committee(&e, 30, 1).unwrap().len(), 1);
    }

    #[test]
    fn av_members_dominate_non_members() {
        use crate::cultures::CultureSpec;
        use crate::rng::RngSeed;
        for seed in 0..20 {
            let e = CultureSpec::Ic { p: 0.4 }
                .sample(9, 15, RngSeed(seed))
                .unwrap();
            let scores = e.approval_scores();
            for w in av_committee(&e, 4, DEFAULT_TIE_LIMIT).unwrap() {
                let low = w.members().iter().map(|&c| scores[c]).min().unwrap();
                assert!((0..9).filter(|c| !w.contains(*c)).all(|c| scores[c] <= low));
            }
        }
    }

    #[test]
    fn committee_validation() {
        assert!(Committee::new(vec![1, 1], 3).is_err());
        assert!(Committee::new(vec![3], 3).is_err());
        assert_eq!(Committee::new(vec![2, 0], 3).unwrap().members(), &[0, 2]);
    }
}
