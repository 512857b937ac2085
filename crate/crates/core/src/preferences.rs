//! Monotone preference models over committees.
//!
//! Every built-in model reduces a committee to a per-voter real key where
//! larger is better, so comparison is a single float comparison and ties are
//! exact equality of the key.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateId, Committee, Instance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PreferenceModel {
    /// Voter `v` approves `sets[v]`; more approved members is better.
    Approval { sets: Vec<Vec<CandidateId>> },
    /// `orders[v]` lists all candidates, most preferred first; a committee
    /// is as good as its best-ranked member.
    Ranking { orders: Vec<Vec<CandidateId>> },
    /// Additive utilities `utilities[v][i] >= 0`.
    Budget { utilities: Vec<Vec<f64>> },
    /// Distance `distances[v][i]` to candidate facility `i`; closer is better.
    Facility { distances: Vec<Vec<f64>> },
    /// Explicit per-voter scores over a bounded committee universe:
    /// `scores[v][k]` is voter `v`'s score for `universe[k]`.
    #[serde(rename = "oracle")]
    ExplicitOracle {
        universe: Vec<Committee>,
        scores: Vec<Vec<f64>>,
    },
}

/// Outcome of comparing two committees for one voter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    FirstStrict,
    SecondStrict,
    Tie,
}

impl PreferenceModel {
    pub fn kind(&self) -> &'static str {
        match self {
            PreferenceModel::Approval { .. } => "approval",
            PreferenceModel::Ranking { .. } => "ranking",
            PreferenceModel::Budget { .. } => "budget",
            PreferenceModel::Facility { .. } => "facility",
            PreferenceModel::ExplicitOracle { .. } => "oracle",
        }
    }

    fn voter_rows(&self) -> usize {
        match self {
            PreferenceModel::Approval { sets } => sets.len(),
            PreferenceModel::Ranking { orders } => orders.len(),
            PreferenceModel::Budget { utilities } => utilities.len(),
            PreferenceModel::Facility { distances } => distances.len(),
            PreferenceModel::ExplicitOracle { scores, .. } => scores.len(),
        }
    }

    /// Invariant violations for an instance with `m` candidates and `n` voters.
    pub fn violations(&self, m: usize, n: usize) -> Vec<String> {
        let mut v = Vec::new();
        if self.voter_rows() != n {
            v.push(format!(
                "{} preference model has {} voter rows, expected {n}",
                self.kind(),
                self.voter_rows()
            ));
        }
        let in_range = |c: &CandidateId| (*c as usize) < m;
        match self {
            PreferenceModel::Approval { sets } => {
                if !sets.iter().flatten().all(in_range) {
                    v.push("approval set names a candidate outside [0, m)".into());
                }
            }
            PreferenceModel::Ranking { orders } => {
                for (voter, order) in orders.iter().enumerate() {
                    let mut seen = vec![false; m];
                    let ok = order.len() == m
                        && order.iter().all(|&c| {
                            let c = c as usize;
                            c < m && !std::mem::replace(&mut seen[c], true)
                        });
                    if !ok {
                        v.push(format!("ranking of voter {voter} is not a permutation of [0, {m})"));
                    }
                }
            }
            PreferenceModel::Budget { utilities } => {
                if utilities.iter().any(|row| row.len() != m) {
                    v.push(format!("utility rows must have length m = {m}"));
                }
                if utilities.iter().flatten().any(|&u| !u.is_finite() || u < 0.0) {
                    v.push("utilities must be nonnegative and finite".into());
                }
            }
            PreferenceModel::Facility { distances } => {
                if distances.iter().any(|row| row.len() != m) {
                    v.push(format!("distance rows must have length m = {m}"));
                }
                if distances.iter().flatten().any(|&d| !d.is_finite() || d < 0.0) {
                    v.push("distances must be nonnegative and finite".into());
                }
            }
            PreferenceModel::ExplicitOracle { universe, scores } => {
                if universe.iter().flat_map(|c| c.members()).any(|c| !in_range(c)) {
                    v.push("oracle universe names a candidate outside [0, m)".into());
                }
                let mut sorted: Vec<&Committee> = universe.iter().collect();
                sorted.sort();
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    v.push("oracle universe contains a duplicate committee".into());
                }
                if scores.iter().any(|row| row.len() != universe.len()) {
                    v.push("oracle score rows must match the universe size".into());
                }
                if scores.iter().flatten().any(|s| !s.is_finite()) {
                    v.push("oracle scores must be finite".into());
                }
            }
        }
        v
    }

    /// Voter `v`'s key for a committee; larger keys are strictly preferred.
    pub(crate) fn key(&self, v: usize, s: &Committee) -> Result<f64> {
        let members = s.members();
        Ok(match self {
            PreferenceModel::Approval { sets } => {
                sets[v].iter().filter(|c| s.contains(**c)).count() as f64
            }
            PreferenceModel::Ranking { orders } => {
                if members.is_empty() {
                    f64::NEG_INFINITY
                } else {
                    let pos = orders[v].iter().position(|c| s.contains(*c)).unwrap_or(usize::MAX);
                    -(pos as f64)
                }
            }
            PreferenceModel::Budget { utilities } => {
                members.iter().map(|&c| utilities[v][c as usize]).sum()
            }
            PreferenceModel::Facility { distances } => {
                let d = members
                    .iter()
                    .map(|&c| distances[v][c as usize])
                    .fold(f64::INFINITY, f64::min);
                -d
            }
            PreferenceModel::ExplicitOracle { universe, scores } => {
                let k = universe
                    .iter()
                    .position(|u| u == s)
                    .ok_or_else(|| Error::UnsupportedCommittee(s.clone()))?;
                scores[v][k]
            }
        })
    }

    /// Keys of `s` for each voter in `voters`, in order.
    pub(crate) fn keys(&self, voters: &[usize], s: &Committee) -> Result<Vec<f64>> {
        voters.iter().map(|&v| self.key(v, s)).collect()
    }
}

fn order_keys(a: f64, b: f64) -> Ordering {
    if a > b {
        Ordering::FirstStrict
    } else if b > a {
        Ordering::SecondStrict
    } else {
        Ordering::Tie
    }
}

/// How voter `v` ranks `s1` against `s2`.
pub fn compare(model: &PreferenceModel, v: usize, s1: &Committee, s2: &Committee) -> Result<Ordering> {
    if v >= model.voter_rows() {
        return Err(Error::InvalidParameter(format!("voter {v} out of range")));
    }
    Ok(order_keys(model.key(v, s1)?, model.key(v, s2)?))
}

pub fn strictly_prefers(
    model: &PreferenceModel,
    v: usize,
    s_new: &Committee,
    s_old: &Committee,
) -> Result<bool> {
    Ok(compare(model, v, s_new, s_old)? == Ordering::FirstStrict)
}

/// `s1` is weakly preferred to `s2` by voter `v`.
pub fn weakly_prefers(model: &PreferenceModel, v: usize, s1: &Committee, s2: &Committee) -> Result<bool> {
    Ok(compare(model, v, s1, s2)? != Ordering::SecondStrict)
}

/// Witness of `smaller ⊆ larger` with `smaller` strictly preferred by `voter`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityWitness {
    pub smaller: Committee,
    pub larger: Committee,
    pub voter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub violation: Option<MonotonicityWitness>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Samples nested committee pairs and voters looking for a monotonicity
/// violation. Explicit-oracle models sample nested pairs from their universe.
pub fn check_monotonicity(inst: &Instance, trials: usize, seed: u64) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let model = inst.preference();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nested: Option<Vec<(usize, usize)>> = match model {
        PreferenceModel::ExplicitOracle { universe, .. } => {
            let mut pairs = Vec::new();
            for (i, a) in universe.iter().enumerate() {
                for (j, b) in universe.iter().enumerate() {
                    if i != j && a.is_subset(b) {
                        pairs.push((i, j));
                    }
                }
            }
            Some(pairs)
        }
        _ => None,
    };
    for _ in 0..trials {
        let (smaller, larger) = match (&nested, model) {
            (Some(pairs), PreferenceModel::ExplicitOracle { universe, .. }) => {
                if pairs.is_empty() {
                    break;
                }
                let (i, j) = pairs[rng.gen_range(0..pairs.len())];
                (universe[i].clone(), universe[j].clone())
            }
            _ => {
                let larger: Vec<CandidateId> =
                    (0..inst.m() as CandidateId).filter(|_| rng.gen_bool(0.5)).collect();
                let smaller: Vec<CandidateId> =
                    larger.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                (Committee::from_sorted(smaller), Committee::from_sorted(larger))
            }
        };
        let voter = rng.gen_range(0..inst.n());
        if strictly_prefers(model, voter, &smaller, &larger)? {
            return Ok(PropertyReport {
                trials,
                violation: Some(MonotonicityWitness { smaller, larger, voter }),
            });
        }
    }
    Ok(PropertyReport { trials, violation: None })
}
