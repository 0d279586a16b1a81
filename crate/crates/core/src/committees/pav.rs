//! Proportional Approval Voting, solved exactly.
//!
//! Scores are exact: internally every harmonic weight `1/j` is scaled by
//! `L = lcm(1..=k)` so the search compares integers, and results are reported as
//! reduced rationals.
//!
//! The solver is a depth-first branch and bound over include/exclude decisions.
//! Identical ballots are merged into weighted voters, and candidates with
//! identical approver sets are interchangeable, so excluding one excludes its
//! later clones too.
//!
//! Two bounds prune a node with `r` open seats. The cheap one is the current
//! score plus the `r` largest marginal gains, valid because `h` is concave. The
//! strong one relaxes the coupling between a voter's approved-member count and
//! the chosen set with one multiplier per voter; any multipliers give a valid
//! bound, and a few subgradient steps per node, warm-started from the parent,
//! push it toward the linear-relaxation value.
//!
//! After the optimum is known, a second phase fixes candidates in index order,
//! checking with the same search whether an optimal committee still exists, and
//! so returns the lexicographically smallest optimum.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use super::{check_committee_size, Committee};
use crate::election::Election;
use crate::error::Result;

pub type PavScore = Ratio<u128>;

/// `h(x) = 1 + 1/2 + … + 1/x`, exactly.
pub fn harmonic(x: usize) -> PavScore {
    (1..=x as u128).fold(Ratio::from_integer(0), |acc, j| acc + Ratio::new(1, j))
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_up_to(k: usize) -> u128 {
    (1..=k.max(1) as u128).fold(1, |acc, j| acc / gcd(acc, j) * j)
}

/// `Σ_v h(|A(v) ∩ W|)`, exactly.
pub fn pav_score(e: &Election, w: &Committee) -> PavScore {
    let counts: Vec<usize> = e
        .votes()
        .iter()
        .map(|b| w.members().iter().filter(|&&c| b.contains(c)).count())
        .collect();
    let scale = lcm_up_to(w.len());
    let total: u128 = counts
        .iter()
        .map(|&x| (1..=x as u128).map(|j| scale / j).sum::<u128>())
        .sum();
    Ratio::new(total, scale)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PavStatus {
    Optimal,
    /// The budget ran out; `upper_bound` bounds every committee's score.
    TimedOut {
        upper_bound: PavScore,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavOutcome {
    pub committee: Committee,
    pub score: PavScore,
    pub elapsed: Duration,
    pub status: PavStatus,
    /// Search nodes visited across both phases.
    pub nodes: u64,
    /// Time and nodes spent finding an optimum and proving it optimal, before
    /// the lexicographic tie-break.
    pub solve_elapsed: Duration,
    pub solve_nodes: u64,
}

impl PavOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == PavStatus::Optimal
    }

    /// Difference between the upper bound and the incumbent; zero when optimal.
    pub fn gap(&self) -> PavScore {
        match &self.status {
            PavStatus::Optimal => Ratio::from_integer(0),
            PavStatus::TimedOut { upper_bound } => upper_bound - self.score,
        }
    }
}

/// Sequential PAV: repeatedly add the candidate with the largest marginal gain
/// (lowest index on ties). A baseline, not an optimum.
pub fn greedy_pav(e: &Election, k: usize) -> Result<Committee> {
    check_committee_size(e, k)?;
    let inst = Instance::new(e, k);
    let members = greedy(&inst, &mut State::new(&inst)).0;
    Committee::new(members, e.m())
}

/// An optimal PAV committee of size `k`, lexicographically smallest among optima,
/// with wall-clock runtime. On budget exhaustion the best committee found so far
/// is returned with a [`PavStatus::TimedOut`] status.
pub fn pav_committee(e: &Election, k: usize, budget: Duration) -> Result<PavOutcome> {
    check_committee_size(e, k)?;
    let start = Instant::now();
    let deadline = start.checked_add(budget);
    let inst = Instance::new(e, k);

    let (incumbent, value) = greedy(&inst, &mut State::new(&inst));
    let mut search = Search::new(&inst, Goal::Improve, deadline);
    search.best = incumbent;
    search.best_value = value;
    search.run(State::new(&inst));
    let mut nodes = search.nodes;
    let solve_elapsed = start.elapsed();
    let solve_nodes = search.nodes;

    if search.timed_out {
        let upper = search.open_bound.max(search.best_value);
        return Ok(PavOutcome {
            committee: Committee::new(search.best, e.m())?,
            score: Ratio::new(search.best_value, inst.scale),
            elapsed: start.elapsed(),
            status: PavStatus::TimedOut {
                upper_bound: Ratio::new(upper, inst.scale),
            },
            nodes,
            solve_elapsed,
            solve_nodes,
        });
    }

    // Fix candidates in index order, keeping each one that some optimum
    // consistent with the earlier choices contains.
    let optimum = search.best_value;
    let mut witness = search.best;
    let mut fixed: Vec<usize> = Vec::with_capacity(k);
    for c in 0..e.m() {
        if fixed.len() == k {
            break;
        }
        if witness.contains(&c) {
            fixed.push(c);
            continue;
        }
        let mut state = State::new(&inst);
        for d in 0..c {
            if fixed.contains(&d) {
                state.include(&inst, d);
            } else {
                state.exclude(&inst, d);
            }
        }
        state.include(&inst, c);
        let mut check = Search::new(&inst, Goal::Reach(optimum), deadline);
        check.run(state);
        nodes += check.nodes;
        if check.timed_out {
            break;
        }
        if check.found {
            witness = check.best;
            fixed.push(c);
        }
    }
    let members = if fixed.len() == k { fixed } else { witness };
    Ok(PavOutcome {
        committee: Committee::new(members, e.m())?,
        score: Ratio::new(optimum, inst.scale),
        elapsed: start.elapsed(),
        status: PavStatus::Optimal,
        nodes,
        solve_elapsed,
        solve_nodes,
    })
}

/// The election reduced to distinct ballots with multiplicities.
struct Instance {
    k: usize,
    scale: u128,
    // slope[j] = scale / j: the value of a voter's j-th approved member
    slope: Vec<u128>,
    weight: Vec<u128>,
    approvers: Vec<Vec<usize>>,
    // later candidates with the same approver set
    clones_after: Vec<Vec<usize>>,
}

impl Instance {
    fn new(e: &Election, k: usize) -> Self {
        let scale = lcm_up_to(k);
        let slope = std::iter::once(0)
            .chain((1..=k as u128).map(|j| scale / j))
            .collect();
        let mut group: HashMap<&[usize], usize> = HashMap::new();
        let mut weight: Vec<u128> = Vec::new();
        let mut approvers = vec![Vec::new(); e.m()];
        for ballot in e.votes() {
            if ballot.is_empty() {
                continue;
            }
            let next = weight.len();
            let g = *group.entry(ballot.approved()).or_insert(next);
            if g == next {
                weight.push(0);
                for &c in ballot.approved() {
                    approvers[c].push(g);
                }
            }
            weight[g] += 1;
        }
        let mut classes: HashMap<&[usize], Vec<usize>> = HashMap::new();
        for (c, a) in approvers.iter().enumerate() {
            classes.entry(a.as_slice()).or_default().push(c);
        }
        let mut clones_after = vec![Vec::new(); e.m()];
        for members in classes.values() {
            for (i, &c) in members.iter().enumerate() {
                clones_after[c] = members[i + 1..].to_vec();
            }
        }
        Instance {
            k,
            scale,
            slope,
            weight,
            approvers,
            clones_after,
        }
    }

    fn m(&self) -> usize {
        self.approvers.len()
    }

    fn voters(&self) -> usize {
        self.weight.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Open,
    In,
    Out,
}

struct State {
    marks: Vec<Mark>,
    chosen: Vec<usize>,
    // per voter: approved members chosen, approved candidates still open
    counts: Vec<usize>,
    open_approved: Vec<usize>,
    open: usize,
    value: u128,
}

impl State {
    fn new(inst: &Instance) -> Self {
        let mut open_approved = vec![0; inst.voters()];
        for a in &inst.approvers {
            for &v in a {
                open_approved[v] += 1;
            }
        }
        State {
            marks: vec![Mark::Open; inst.m()],
            chosen: Vec::with_capacity(inst.k),
            counts: vec![0; inst.voters()],
            open_approved,
            open: inst.m(),
            value: 0,
        }
    }

    fn gain(&self, inst: &Instance, c: usize) -> u128 {
        inst.approvers[c]
            .iter()
            .map(|&v| inst.weight[v] * inst.slope.get(self.counts[v] + 1).copied().unwrap_or(0))
            .sum()
    }

    fn include(&mut self, inst: &Instance, c: usize) {
        self.value += self.gain(inst, c);
        for &v in &inst.approvers[c] {
            self.counts[v] += 1;
            self.open_approved[v] -= 1;
        }
        self.marks[c] = Mark::In;
        self.chosen.push(c);
        self.open -= 1;
    }

    fn uninclude(&mut self, inst: &Instance, c: usize) {
        for &v in &inst.approvers[c] {
            self.counts[v] -= 1;
            self.open_approved[v] += 1;
        }
        self.value -= self.gain(inst, c);
        self.marks[c] = Mark::Open;
        self.chosen.pop();
        self.open += 1;
    }

    fn exclude(&mut self, inst: &Instance, c: usize) {
        for &v in &inst.approvers[c] {
            self.open_approved[v] -= 1;
        }
        self.marks[c] = Mark::Out;
        self.open -= 1;
    }

    fn unexclude(&mut self, inst: &Instance, c: usize) {
        for &v in &inst.approvers[c] {
            self.open_approved[v] += 1;
        }
        self.marks[c] = Mark::Open;
        self.open += 1;
    }

    fn best_open(&self, inst: &Instance) -> Option<(usize, u128)> {
        (0..inst.m())
            .filter(|&c| self.marks[c] == Mark::Open)
            .map(|c| (c, self.gain(inst, c)))
            .max_by_key(|&(c, g)| (g, std::cmp::Reverse(c)))
    }
}

/// Completes `state` greedily to `k` members.
fn greedy(inst: &Instance, state: &mut State) -> (Vec<usize>, u128) {
    while state.chosen.len() < inst.k {
        let (c, _) = state.best_open(inst).expect("k <= m");
        state.include(inst, c);
    }
    (state.chosen.clone(), state.value)
}

#[derive(Debug, Clone, Copy)]
enum Goal {
    /// Find a committee scoring more than the incumbent, repeatedly.
    Improve,
    /// Find any committee scoring at least this much.
    Reach(u128),
}

const CLOCK_CHECK_INTERVAL: u64 = 64;
const ROOT_ITERATIONS: usize = 150;
const NODE_ITERATIONS: usize = 25;
const MIN_STEP_SCALE: f64 = 1.0 / 32.0;

struct Search<'a> {
    inst: &'a Instance,
    goal: Goal,
    best: Vec<usize>,
    best_value: u128,
    found: bool,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    // max bound over subtrees abandoned on timeout
    open_bound: u128,
    // multipliers by depth, warm-started from the parent
    multipliers: Vec<Vec<f64>>,
    gains: Vec<u128>,
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    candidate_weight: Vec<(f64, usize)>,
    hits: Vec<u32>,
    subgradient: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, goal: Goal, deadline: Option<Instant>) -> Self {
        Search {
            inst,
            goal,
            best: Vec::new(),
            best_value: 0,
            found: false,
            deadline,
            nodes: 0,
            timed_out: false,
            open_bound: 0,
            multipliers: Vec::new(),
            gains: Vec::new(),
            scratch: Scratch::default(),
        }
    }

    fn threshold(&self) -> u128 {
        match self.goal {
            Goal::Improve => self.best_value + 1,
            Goal::Reach(target) => target,
        }
    }

    fn stopped(&self) -> bool {
        self.found || self.timed_out
    }

    fn run(&mut self, mut state: State) {
        let root: Vec<f64> = (0..self.inst.voters())
            .map(|v| self.first_slope(&state, v))
            .collect();
        self.multipliers = vec![root; self.inst.m() + 2];
        self.node(&mut state, 0);
    }

    fn first_slope(&self, state: &State, v: usize) -> f64 {
        let next = self
            .inst
            .slope
            .get(state.counts[v] + 1)
            .copied()
            .unwrap_or(0);
        (self.inst.weight[v] * next) as f64
    }

    fn node(&mut self, state: &mut State, depth: usize) {
        if self.stopped() {
            return;
        }
        self.nodes += 1;
        let inst = self.inst;
        let seats = inst.k - state.chosen.len();
        if seats == 0 {
            if state.value >= self.threshold() {
                self.best = state.chosen.clone();
                self.best_value = state.value;
                if matches!(self.goal, Goal::Reach(_)) {
                    self.found = true;
                }
            }
            return;
        }
        if state.open < seats {
            return;
        }

        let threshold = self.threshold();
        let cheap = self.cheap_bound(state, seats);
        if cheap < threshold {
            return;
        }
        if self.nodes.is_multiple_of(CLOCK_CHECK_INTERVAL)
            && self.deadline.is_some_and(|d| Instant::now() >= d)
        {
            self.timed_out = true;
            self.open_bound = self.open_bound.max(cheap);
            return;
        }
        let iterations = if depth == 0 {
            ROOT_ITERATIONS
        } else {
            NODE_ITERATIONS
        };
        let strong = self.lagrangian_bound(state, seats, depth, threshold, cheap, iterations);
        if strong < threshold {
            return;
        }
        let bound = strong.min(cheap);

        let (c, _) = state.best_open(inst).expect("open >= seats > 0");
        let (parent, child) = self.multipliers.split_at_mut(depth + 1);
        child[0].copy_from_slice(&parent[depth]);
        state.include(inst, c);
        self.node(state, depth + 1);
        state.uninclude(inst, c);
        if self.stopped() {
            if self.timed_out {
                self.open_bound = self.open_bound.max(bound);
            }
            return;
        }

        let (parent, child) = self.multipliers.split_at_mut(depth + 1);
        child[0].copy_from_slice(&parent[depth]);
        let excluded: Vec<usize> = std::iter::once(c)
            .chain(
                inst.clones_after[c]
                    .iter()
                    .copied()
                    .filter(|&d| state.marks[d] == Mark::Open),
            )
            .collect();
        for &d in &excluded {
            state.exclude(inst, d);
        }
        self.node(state, depth + 1);
        for &d in excluded.iter().rev() {
            state.unexclude(inst, d);
        }
    }

    /// Current value plus the `seats` largest marginal gains.
    fn cheap_bound(&mut self, state: &State, seats: usize) -> u128 {
        let inst = self.inst;
        self.gains.clear();
        self.gains.extend(
            (0..inst.m())
                .filter(|&c| state.marks[c] == Mark::Open)
                .map(|c| state.gain(inst, c)),
        );
        let pivot = self.gains.len() - seats;
        self.gains.select_nth_unstable(pivot);
        state.value + self.gains[pivot..].iter().sum::<u128>()
    }

    /// Lagrangian bound, rounded up to an integer with a safety margin. Stops
    /// early once it drops below `threshold`.
    fn lagrangian_bound(
        &mut self,
        state: &State,
        seats: usize,
        depth: usize,
        threshold: u128,
        cheap: u128,
        iterations: usize,
    ) -> u128 {
        let inst = self.inst;
        let voters = inst.voters();
        let mu = &mut self.multipliers[depth];
        let Scratch {
            candidate_weight,
            hits,
            subgradient,
        } = &mut self.scratch;
        hits.resize(voters, 0);
        subgradient.resize(voters, 0.0);

        // slopes of voter v's gain function are w_v·L/(a_v + j), j = 1..=T_v
        let slope = |v: usize, j: usize| (inst.weight[v] * inst.slope[state.counts[v] + j]) as f64;
        let cap = |v: usize| seats.min(state.open_approved[v]);
        for (v, m) in mu.iter_mut().enumerate().take(voters) {
            let t = cap(v);
            if t > 0 {
                *m = m.clamp(slope(v, t), slope(v, 1));
            }
        }

        let base = state.value as f64;
        let lower = (threshold.max(1) - 1) as f64;
        let mut best = cheap as f64;
        let mut scale = 1.0;
        let mut stalled = 0;
        for _ in 0..iterations {
            let mut total = base;
            for v in 0..voters {
                let t = cap(v);
                let mut taken = 0;
                for j in 1..=t {
                    let s = slope(v, j);
                    if s <= mu[v] {
                        break;
                    }
                    total += s - mu[v];
                    taken += 1;
                }
                subgradient[v] = -(taken as f64);
                hits[v] = 0;
            }
            candidate_weight.clear();
            for c in 0..inst.m() {
                if state.marks[c] == Mark::Open {
                    let w: f64 = inst.approvers[c].iter().map(|&v| mu[v]).sum();
                    candidate_weight.push((w, c));
                }
            }
            let pivot = candidate_weight.len() - seats;
            candidate_weight.select_nth_unstable_by(pivot, |a, b| a.0.total_cmp(&b.0));
            for &(w, c) in &candidate_weight[pivot..] {
                total += w;
                for &v in &inst.approvers[c] {
                    hits[v] += 1;
                }
            }

            if total < best {
                best = total;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 4 {
                    scale *= 0.5;
                    stalled = 0;
                    if scale < MIN_STEP_SCALE {
                        break;
                    }
                }
            }
            if best + margin(best) < threshold as f64 {
                break;
            }
            let mut norm = 0.0;
            for v in 0..voters {
                subgradient[v] += hits[v] as f64;
                norm += subgradient[v] * subgradient[v];
            }
            if norm == 0.0 {
                break;
            }
            let step = scale * (total - lower).max(1.0) / norm;
            for v in 0..voters {
                let t = cap(v);
                if t > 0 {
                    mu[v] = (mu[v] - step * subgradient[v]).clamp(slope(v, t), slope(v, 1));
                }
            }
        }
        let rounded = (best + margin(best)).ceil();
        if rounded >= cheap as f64 {
            cheap
        } else {
            rounded as u128
        }
    }
}

fn margin(x: f64) -> f64 {
    1e-9 * x.abs() + 1e-6
}
