//! Statistical cultures: parameterized distributions over approval elections.
//!
//! Every sampler is a pure function of its parameters and the generator it is
//! handed. [`CultureSpec::sample`] wraps them behind a single seed.

use std::fmt;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::election::{Ballot, Election};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

// p·m is computed in floating point; 0.3 * 10 must round to 3, not 4.
const ROUNDING_SLACK: f64 = 1e-9;

/// `⌊p·m⌋`, the central-ballot size of the resampling and noise models.
pub fn floor_pm(p: f64, m: usize) -> usize {
    ((p * m as f64) + ROUNDING_SLACK)
        .floor()
        .clamp(0.0, m as f64) as usize
}

/// `⌈p·m⌉`, the ballot size of the truncated urn model.
pub fn ceil_pm(p: f64, m: usize) -> usize {
    ((p * m as f64) - ROUNDING_SLACK)
        .ceil()
        .clamp(0.0, m as f64) as usize
}

/// `t` evenly spaced interior points of `(a, b)`: `a + i(b-a)/(t+1)` for `i = 1..=t`.
pub fn interval_points(a: f64, b: f64, t: usize) -> Vec<f64> {
    (1..=t)
        .map(|i| a + i as f64 * (b - a) / (t + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteDistance {
    #[default]
    Hamming,
    Jaccard,
}

impl VoteDistance {
    /// Distance between a central ballot of size `z` and a ballot that keeps
    /// `x` of its members and adds `y` outsiders.
    pub fn from_counts(self, x: usize, y: usize, z: usize) -> f64 {
        let ham = (z - x + y) as f64;
        match self {
            VoteDistance::Hamming => ham,
            VoteDistance::Jaccard => {
                let union = z + y;
                if union == 0 {
                    0.0
                } else {
                    ham / union as f64
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EuclideanDim {
    One,
    Two,
}

impl EuclideanDim {
    pub fn get(self) -> usize {
        match self {
            EuclideanDim::One => 1,
            EuclideanDim::Two => 2,
        }
    }
}

impl TryFrom<usize> for EuclideanDim {
    type Error = Error;

    fn try_from(dim: usize) -> Result<Self> {
        match dim {
            1 => Ok(EuclideanDim::One),
            2 => Ok(EuclideanDim::Two),
            other => Err(Error::InvalidParameter(format!(
                "Euclidean dimension must be 1 or 2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extreme {
    Empty,
    Full,
    /// Resampling with φ = 0.
    Identity(f64),
    /// Resampling with φ = 1.
    Impartial(f64),
}

/// One statistical culture with its parameters.
///
/// Serializes as a flat JSON object `{kind, p, phi, g, alpha, radius, dim,
/// vote_distance}` carrying exactly the fields its kind requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CultureSpecWire", into = "CultureSpecWire")]
pub enum CultureSpec {
    Resampling {
        p: f64,
        phi: f64,
    },
    Disjoint {
        p: f64,
        phi: f64,
        g: usize,
    },
    Noise {
        p: f64,
        phi: f64,
        vote_distance: VoteDistance,
    },
    Euclidean {
        radius: f64,
        dim: EuclideanDim,
    },
    Urn {
        p: f64,
        alpha: f64,
    },
    Ic {
        p: f64,
    },
    Id {
        p: f64,
    },
    Empty,
    Full,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CultureSpecWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vote_distance: Option<VoteDistance>,
}

impl TryFrom<CultureSpecWire> for CultureSpec {
    type Error = Error;

    fn try_from(w: CultureSpecWire) -> Result<Self> {
        let kind = w.kind.to_ascii_lowercase();
        let need = |value: Option<f64>, name: &str| {
            value.ok_or_else(|| {
                Error::InvalidParameter(format!("culture `{kind}` requires `{name}`"))
            })
        };
        let spec = match kind.as_str() {
            "resampling" => CultureSpec::Resampling {
                p: need(w.p, "p")?,
                phi: need(w.phi, "phi")?,
            },
            "disjoint" => CultureSpec::Disjoint {
                p: need(w.p, "p")?,
                phi: need(w.phi, "phi")?,
                g: w.g.ok_or_else(|| {
                    Error::InvalidParameter("culture `disjoint` requires `g`".into())
                })?,
            },
            "noise" => CultureSpec::Noise {
                p: need(w.p, "p")?,
                phi: need(w.phi, "phi")?,
                vote_distance: w.vote_distance.unwrap_or_default(),
            },
            "euclidean" => CultureSpec::Euclidean {
                radius: need(w.radius, "radius")?,
                dim: EuclideanDim::try_from(w.dim.ok_or_else(|| {
                    Error::InvalidParameter("culture `euclidean` requires `dim`".into())
                })?)?,
            },
            "urn" => CultureSpec::Urn {
                p: need(w.p, "p")?,
                alpha: need(w.alpha, "alpha")?,
            },
            "ic" => CultureSpec::Ic { p: need(w.p, "p")? },
            "id" => CultureSpec::Id { p: need(w.p, "p")? },
            "empty" => CultureSpec::Empty,
            "full" => CultureSpec::Full,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown culture kind `{other}`"
                )))
            }
        };
        let wire_from_spec = CultureSpecWire::from(spec.clone());
        let extra = |given: bool, expected: bool, name: &str| -> Result<()> {
            if given && !expected {
                return Err(Error::InvalidParameter(format!(
                    "culture `{kind}` does not take `{name}`"
                )));
            }
            Ok(())
        };
        extra(w.p.is_some(), wire_from_spec.p.is_some(), "p")?;
        extra(w.phi.is_some(), wire_from_spec.phi.is_some(), "phi")?;
        extra(w.g.is_some(), wire_from_spec.g.is_some(), "g")?;
        extra(w.alpha.is_some(), wire_from_spec.alpha.is_some(), "alpha")?;
        extra(
            w.radius.is_some(),
            wire_from_spec.radius.is_some(),
            "radius",
        )?;
        extra(w.dim.is_some(), wire_from_spec.dim.is_some(), "dim")?;
        extra(
            w.vote_distance.is_some(),
            wire_from_spec.vote_distance.is_some(),
            "vote_distance",
        )?;
        spec.validate()?;
        Ok(spec)
    }
}

impl From<CultureSpec> for CultureSpecWire {
    fn from(spec: CultureSpec) -> Self {
        let mut w = CultureSpecWire {
            kind: spec.kind().to_string(),
            ..Default::default()
        };
        match spec {
            CultureSpec::Resampling { p, phi } => {
                w.p = Some(p);
                w.phi = Some(phi);
            }
            CultureSpec::Disjoint { p, phi, g } => {
                w.p = Some(p);
                w.phi = Some(phi);
                w.g = Some(g);
            }
            CultureSpec::Noise {
                p,
                phi,
                vote_distance,
            } => {
                w.p = Some(p);
                w.phi = Some(phi);
                w.vote_distance = Some(vote_distance);
            }
            CultureSpec::Euclidean { radius, dim } => {
                w.radius = Some(radius);
                w.dim = Some(dim.get());
            }
            CultureSpec::Urn { p, alpha } => {
                w.p = Some(p);
                w.alpha = Some(alpha);
            }
            CultureSpec::Ic { p } | CultureSpec::Id { p } => w.p = Some(p),
            CultureSpec::Empty | CultureSpec::Full => {}
        }
        w
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

impl CultureSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CultureSpec::Resampling { .. } => "resampling",
            CultureSpec::Disjoint { .. } => "disjoint",
            CultureSpec::Noise { .. } => "noise",
            CultureSpec::Euclidean { .. } => "euclidean",
            CultureSpec::Urn { .. } => "urn",
            CultureSpec::Ic { .. } => "ic",
            CultureSpec::Id { .. } => "id",
            CultureSpec::Empty => "empty",
            CultureSpec::Full => "full",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CultureSpec::Resampling { p, phi } | CultureSpec::Noise { p, phi, .. } => {
                check_unit("p", p)?;
                check_unit("phi", phi)
            }
            CultureSpec::Disjoint { p, phi, g } => {
                check_unit("p", p)?;
                check_unit("phi", phi)?;
                if g == 0 {
                    return Err(Error::InvalidParameter("g must be at least 1".into()));
                }
                Ok(())
            }
            CultureSpec::Euclidean { radius, .. } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "radius must be positive and finite, got {radius}"
                    )));
                }
                Ok(())
            }
            CultureSpec::Urn { p, alpha } => {
                check_unit("p", p)?;
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be non-negative and finite, got {alpha}"
                    )));
                }
                Ok(())
            }
            CultureSpec::Ic { p } | CultureSpec::Id { p } => check_unit("p", p),
            CultureSpec::Empty | CultureSpec::Full => Ok(()),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        m: usize,
        n: usize,
        rng: &mut R,
    ) -> Result<Election> {
        self.validate()?;
        match *self {
            CultureSpec::Resampling { p, phi } => sample_resampling(m, n, p, phi, rng),
            CultureSpec::Disjoint { p, phi, g } => sample_disjoint(m, n, p, phi, g, rng),
            CultureSpec::Noise {
                p,
                phi,
                vote_distance,
            } => sample_noise(m, n, p, phi, vote_distance, rng),
            CultureSpec::Euclidean { radius, dim } => sample_euclidean(m, n, dim, radius, rng),
            CultureSpec::Urn { p, alpha } => sample_urn(m, n, p, alpha, rng),
            CultureSpec::Ic { p } => make_extreme(m, n, Extreme::Impartial(p), rng),
            CultureSpec::Id { p } => make_extreme(m, n, Extreme::Identity(p), rng),
            CultureSpec::Empty => make_extreme(m, n, Extreme::Empty, rng),
            CultureSpec::Full => make_extreme(m, n, Extreme::Full, rng),
        }
    }

    pub fn sample(&self, m: usize, n: usize, seed: RngSeed) -> Result<Election> {
        self.sample_with(m, n, &mut seed.rng())
    }
}

impl fmt::Display for CultureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CultureSpec::Resampling { p, phi } => write!(f, "resampling(p={p}, phi={phi})"),
            CultureSpec::Disjoint { p, phi, g } => write!(f, "disjoint(p={p}, phi={phi}, g={g})"),
            CultureSpec::Noise {
                p,
                phi,
                vote_distance,
            } => {
                write!(f, "noise(p={p}, phi={phi}, d={vote_distance:?})")
            }
            CultureSpec::Euclidean { radius, dim } => {
                write!(f, "euclidean(dim={}, radius={radius})", dim.get())
            }
            CultureSpec::Urn { p, alpha } => write!(f, "urn(p={p}, alpha={alpha})"),
            CultureSpec::Ic { p } => write!(f, "{p}-IC"),
            CultureSpec::Id { p } => write!(f, "{p}-ID"),
            CultureSpec::Empty => f.write_str("empty"),
            CultureSpec::Full => f.write_str("full"),
        }
    }
}

fn check_size(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need m >= 1 and n >= 1, got m={m}, n={n}"
        )));
    }
    Ok(())
}

fn central_ballot<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Vec<bool> {
    let mut central = vec![false; m];
    for c in index::sample(rng, m, floor_pm(p, m)) {
        central[c] = true;
    }
    central
}

fn resample_vote<R: Rng + ?Sized>(central: &[bool], p: f64, phi: f64, rng: &mut R) -> Ballot {
    central
        .iter()
        .enumerate()
        .filter_map(|(c, &approved)| {
            let keep = if rng.gen_bool(phi) {
                rng.gen_bool(p)
            } else {
                approved
            };
            keep.then_some(c)
        })
        .collect()
}

/// (p, φ)-resampling: a central ballot of `⌊pm⌋` uniform candidates; each vote
/// copies it and, per candidate with probability φ, redraws the approval as a
/// p-coin.
pub fn sample_resampling<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    phi: f64,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    check_unit("p", p)?;
    check_unit("phi", phi)?;
    let central = central_ballot(m, p, rng);
    let votes = (0..n)
        .map(|_| resample_vote(&central, p, phi, rng))
        .collect();
    Election::from_ballots(m, votes)
}

/// Uniform assignment of candidates to `g` groups, redrawn until every group is
/// non-empty.
fn random_partition<R: Rng + ?Sized>(m: usize, g: usize, rng: &mut R) -> Vec<usize> {
    const MAX_REDRAWS: usize = 10_000;
    for _ in 0..MAX_REDRAWS {
        let groups: Vec<usize> = (0..m).map(|_| rng.gen_range(0..g)).collect();
        let mut sizes = vec![0usize; g];
        for &gr in &groups {
            sizes[gr] += 1;
        }
        if sizes.iter().all(|&s| s > 0) {
            return groups;
        }
    }
    // Rejection is hopeless when g is close to m: seed each group with one
    // distinct candidate and spread the rest uniformly.
    let mut groups = vec![0; m];
    let seeded = index::sample(rng, m, g).into_vec();
    let mut is_seed = vec![false; m];
    for (gr, &c) in seeded.iter().enumerate() {
        groups[c] = gr;
        is_seed[c] = true;
    }
    for c in 0..m {
        if !is_seed[c] {
            groups[c] = rng.gen_range(0..g);
        }
    }
    groups
}

/// (p, φ, g)-disjoint: a random partition into `g` groups; each vote picks a
/// group uniformly and is resampled around it.
pub fn sample_disjoint<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    phi: f64,
    g: usize,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    check_unit("p", p)?;
    check_unit("phi", phi)?;
    if g == 0 || g > m {
        return Err(Error::InvalidParameter(format!(
            "disjoint model needs 1 <= g <= m, got g={g}, m={m}"
        )));
    }
    let groups = random_partition(m, g, rng);
    let centrals: Vec<Vec<bool>> = (0..g)
        .map(|gr| groups.iter().map(|&x| x == gr).collect())
        .collect();
    let votes = (0..n)
        .map(|_| {
            let gr = rng.gen_range(0..g);
            resample_vote(&centrals[gr], p, phi, rng)
        })
        .collect();
    Election::from_ballots(m, votes)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unnormalized probability `C(z,x)·C(m−z,y)·φ^d(x,y,z)` of drawing a ballot with
/// `x` of the `z` central approvals and `y` of the `m − z` others; `0^0 = 1`.
pub fn noise_weight(
    x: usize,
    y: usize,
    z: usize,
    m: usize,
    phi: f64,
    distance: VoteDistance,
) -> Result<f64> {
    if z > m || x > z || y > m - z {
        return Err(Error::InvalidParameter(format!(
            "noise cell out of range: x={x}, y={y}, z={z}, m={m}"
        )));
    }
    check_unit("phi", phi)?;
    let d = distance.from_counts(x, y, z);
    Ok(binomial(z, x) * binomial(m - z, y) * phi.powf(d))
}

/// Normalized probabilities of the `(x, y)` cells, row-major in `x` with
/// `m − z + 1` columns. Computed in log space so large `m` cannot overflow.
pub fn noise_cell_probabilities(
    m: usize,
    z: usize,
    phi: f64,
    distance: VoteDistance,
) -> Result<Vec<f64>> {
    if z > m {
        return Err(Error::InvalidParameter(format!("z={z} exceeds m={m}")));
    }
    check_unit("phi", phi)?;
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=m).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_binom = |n: usize, k: usize| ln_fact[n] - ln_fact[k] - ln_fact[n - k];
    let mut log_weights = Vec::with_capacity((z + 1) * (m - z + 1));
    for x in 0..=z {
        for y in 0..=(m - z) {
            let d = distance.from_counts(x, y, z);
            let ln_phi_term = if d == 0.0 {
                0.0
            } else if phi == 0.0 {
                f64::NEG_INFINITY
            } else {
                d * phi.ln()
            };
            log_weights.push(ln_binom(z, x) + ln_binom(m - z, y) + ln_phi_term);
        }
    }
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// (p, φ, d)-noise: each vote is drawn with probability proportional to
/// `φ^d(u, v)` around a resampling-style central ballot `u`.
pub fn sample_noise<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    phi: f64,
    distance: VoteDistance,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    check_unit("p", p)?;
    let central = central_ballot(m, p, rng);
    let inside: Vec<usize> = (0..m).filter(|&c| central[c]).collect();
    let outside: Vec<usize> = (0..m).filter(|&c| !central[c]).collect();
    let z = inside.len();
    let probabilities = noise_cell_probabilities(m, z, phi, distance)?;
    let cells = WeightedIndex::new(&probabilities)
        .map_err(|e| Error::InvalidParameter(format!("noise weights: {e}")))?;
    let columns = m - z + 1;
    let votes = (0..n)
        .map(|_| {
            let cell = cells.sample(rng);
            let (x, y) = (cell / columns, cell % columns);
            let kept = index::sample(rng, z, x).into_iter().map(|i| inside[i]);
            let added = index::sample(rng, m - z, y).into_iter().map(|i| outside[i]);
            kept.chain(added).collect()
        })
        .collect();
    Election::from_ballots(m, votes)
}

/// Candidates and voters uniform on `[0,1]^dim`; approval iff distance ≤ radius.
pub fn sample_euclidean<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    dim: EuclideanDim,
    radius: f64,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let dim = dim.get();
    let point = |rng: &mut R| -> [f64; 2] {
        let mut pt = [0.0; 2];
        for coord in pt.iter_mut().take(dim) {
            *coord = rng.gen::<f64>();
        }
        pt
    };
    let candidates: Vec<[f64; 2]> = (0..m).map(|_| point(rng)).collect();
    let voters: Vec<[f64; 2]> = (0..n).map(|_| point(rng)).collect();
    let votes = voters
        .iter()
        .map(|v| {
            (0..m)
                .filter(|&c| {
                    let dx = v[0] - candidates[c][0];
                    let dy = v[1] - candidates[c][1];
                    (dx * dx + dy * dy).sqrt() <= radius
                })
                .collect()
        })
        .collect();
    Election::from_ballots(m, votes)
}

/// Truncated Pólya–Eggenberger urn over linear orders.
///
/// The urn starts with every order once and gets `α·m!` extra copies of each
/// drawn order, so draw `t` (from 0) is a fresh uniform order with probability
/// `1/(1 + tα)` and otherwise a copy of a uniformly chosen earlier draw. Only the
/// top `⌈pm⌉` of each order matters, so orders are never materialized.
pub fn sample_urn<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    check_unit("p", p)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be non-negative, got {alpha}"
        )));
    }
    let size = ceil_pm(p, m);
    let mut votes: Vec<Ballot> = Vec::with_capacity(n);
    for t in 0..n {
        let fresh = rng.gen::<f64>() * (1.0 + t as f64 * alpha) < 1.0;
        let ballot = if fresh {
            index::sample(rng, m, size).into_iter().collect()
        } else {
            votes[rng.gen_range(0..t)].clone()
        };
        votes.push(ballot);
    }
    Election::from_ballots(m, votes)
}

pub fn make_extreme<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    which: Extreme,
    rng: &mut R,
) -> Result<Election> {
    check_size(m, n)?;
    match which {
        Extreme::Empty => Election::empty(m, n),
        Extreme::Full => Election::full(m, n),
        Extreme::Identity(p) => sample_resampling(m, n, p, 0.0, rng),
        Extreme::Impartial(p) => sample_resampling(m, n, p, 1.0, rng),
    }
}
