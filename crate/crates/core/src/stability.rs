//! Pairwise scores, blocking checks and exhaustive stability verification
//! for committees and lotteries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{candidate_blockers, feasible_committees, EnumerationBound};
use crate::error::{Error, Result};
use crate::model::{Committee, Instance, Lottery, TOL};

/// A blocking ratio within this distance of the target counts as blocking.
pub const BLOCK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub target_c: f64,
    pub stable: bool,
    /// Largest `c` at which some enumerated committee still blocks.
    pub worst_ratio: f64,
    pub worst_blocker: Option<Committee>,
    pub bound: EnumerationBound,
}

impl StabilityReport {
    fn new(target_c: f64, worst: (Option<Committee>, f64), bound: EnumerationBound) -> Self {
        let (worst_blocker, worst_ratio) = worst;
        let stable = worst_blocker.is_none() || worst_ratio < target_c - BLOCK_TOL;
        StabilityReport { target_c, stable, worst_ratio, worst_blocker, bound }
    }
}

fn check_voters(inst: &Instance, voters: &[usize]) -> Result<()> {
    match voters.iter().find(|&&v| v >= inst.n()) {
        Some(v) => Err(Error::InvalidParameter(format!("voter {v} out of range"))),
        None => Ok(()),
    }
}

fn count_strict(better: &[f64], base: &[f64]) -> usize {
    better.iter().zip(base).filter(|(a, b)| a > b).count()
}

/// `|{v in voters : s_a strictly preferred to s}|`.
pub fn pairwise_score(inst: &Instance, voters: &[usize], s: &Committee, s_a: &Committee) -> Result<usize> {
    s.check_valid(inst.m())?;
    s_a.check_valid(inst.m())?;
    check_voters(inst, voters)?;
    let pref = inst.preference();
    let base = pref.keys(voters, s)?;
    let alt = pref.keys(voters, s_a)?;
    Ok(count_strict(&alt, &base))
}

/// `score * K / (w * n)`, where `score` is a (possibly expected) count of
/// strictly preferring voters among `n`.
fn ratio_of(score: f64, weight: f64, k: f64, n: usize, blocker: &Committee) -> Result<f64> {
    if score <= 0.0 {
        return Ok(0.0);
    }
    if weight <= 0.0 {
        return Err(Error::DegenerateBlocker(blocker.clone(), score.ceil() as usize));
    }
    Ok(score * k / (weight * n as f64))
}

/// Largest `c` for which `s_a` `c`-blocks `s`: `V(s, s_a) K / (w(s_a) n)`.
pub fn blocking_ratio(inst: &Instance, s: &Committee, s_a: &Committee) -> Result<f64> {
    let v = pairwise_score(inst, &inst.all_voters(), s, s_a)?;
    ratio_of(v as f64, inst.weight_of(s_a), inst.k(), inst.n(), s_a)
}

/// Keys of every enumerated blocker for a fixed voter set.
pub(crate) struct BlockerTable {
    pub committees: Vec<Committee>,
    pub weights: Vec<f64>,
    pub keys: Vec<Vec<f64>>,
}

impl BlockerTable {
    pub fn new(inst: &Instance, voters: &[usize], bound: EnumerationBound) -> Result<Self> {
        Self::from_committees(inst, voters, candidate_blockers(inst.m(), bound)?)
    }

    pub fn from_committees(inst: &Instance, voters: &[usize], committees: Vec<Committee>) -> Result<Self> {
        let pref = inst.preference();
        let keys = committees
            .par_iter()
            .map(|c| pref.keys(voters, c))
            .collect::<Result<Vec<_>>>()?;
        let weights = committees.iter().map(|c| inst.weight_of(c)).collect();
        Ok(BlockerTable { committees, weights, keys })
    }

    /// Worst blocker against a support given as (keys, probability) pairs.
    /// Ties on the ratio go to the lexicographically smallest committee.
    pub fn worst(&self, support: &[(&[f64], f64)], k: f64, n: usize) -> Result<(Option<Committee>, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, alt) in self.keys.iter().enumerate() {
            let score: f64 = support.iter().map(|(base, x)| x * count_strict(alt, base) as f64).sum();
            if score <= 0.0 {
                continue;
            }
            let r = ratio_of(score, self.weights[i], k, n, &self.committees[i])?;
            let better = match best {
                None => true,
                Some((j, br)) => r > br || (r == br && self.committees[i] < self.committees[j]),
            };
            if better {
                best = Some((i, r));
            }
        }
        Ok(match best {
            Some((i, r)) => (Some(self.committees[i].clone()), r),
            None => (None, 0.0),
        })
    }
}

/// Committee maximizing the blocking ratio against `s` among those with at
/// least one strictly preferring voter.
pub fn find_worst_blocker(
    inst: &Instance,
    s: &Committee,
    bound: EnumerationBound,
) -> Result<(Option<Committee>, f64)> {
    s.check_valid(inst.m())?;
    let voters = inst.all_voters();
    let table = BlockerTable::new(inst, &voters, bound)?;
    let base = inst.preference().keys(&voters, s)?;
    table.worst(&[(&base, 1.0)], inst.k(), inst.n())
}

fn check_committee_feasible(inst: &Instance, s: &Committee) -> Result<()> {
    s.check_valid(inst.m())?;
    let w = inst.weight_of(s);
    if w > inst.k() + TOL {
        return Err(Error::InfeasibleCommittee { committee: s.clone(), weight: w, limit: inst.k() });
    }
    Ok(())
}

/// Is `s` `c`-approximately stable against every committee within `bound`?
pub fn verify_committee(
    inst: &Instance,
    s: &Committee,
    c: f64,
    bound: EnumerationBound,
) -> Result<StabilityReport> {
    check_committee_feasible(inst, s)?;
    Ok(StabilityReport::new(c, find_worst_blocker(inst, s, bound)?, bound))
}

/// Expected pairwise score of `s_a` over committees drawn from `lottery`.
pub fn lottery_score(inst: &Instance, voters: &[usize], lottery: &Lottery, s_a: &Committee) -> Result<f64> {
    lottery
        .support()
        .iter()
        .map(|(s, x)| Ok(x * pairwise_score(inst, voters, s, s_a)? as f64))
        .sum()
}

/// [`verify_lottery`] restricted to a voter subset, with the lottery limit
/// as the weight scale and `voters.len()` as the electorate size.
pub fn verify_lottery_for(
    inst: &Instance,
    voters: &[usize],
    lottery: &Lottery,
    c: f64,
    bound: EnumerationBound,
) -> Result<StabilityReport> {
    lottery.check_feasible(inst)?;
    check_voters(inst, voters)?;
    if voters.is_empty() {
        return Err(Error::InvalidParameter("empty voter set".into()));
    }
    let table = BlockerTable::new(inst, voters, bound)?;
    Ok(StabilityReport::new(c, lottery_worst(inst, voters, lottery, &table)?, bound))
}

pub(crate) fn lottery_worst(
    inst: &Instance,
    voters: &[usize],
    lottery: &Lottery,
    table: &BlockerTable,
) -> Result<(Option<Committee>, f64)> {
    let pref = inst.preference();
    let keyed = lottery
        .support()
        .iter()
        .map(|(s, x)| Ok((pref.keys(voters, s)?, *x)))
        .collect::<Result<Vec<_>>>()?;
    let support: Vec<(&[f64], f64)> = keyed.iter().map(|(k, x)| (k.as_slice(), *x)).collect();
    table.worst(&support, lottery.limit(), voters.len())
}

/// Is the lottery `c`-approximately stable over all voters? The lottery's
/// own limit is the weight scale `K`.
pub fn verify_lottery(
    inst: &Instance,
    lottery: &Lottery,
    c: f64,
    bound: EnumerationBound,
) -> Result<StabilityReport> {
    verify_lottery_for(inst, &inst.all_voters(), lottery, c, bound)
}

/// Smallest worst-case blocking ratio over all feasible committees, with a
/// minimizing committee (first in enumeration order among ties).
pub fn min_deterministic_c(inst: &Instance, bound: EnumerationBound) -> Result<(f64, Committee)> {
    let voters = inst.all_voters();
    let table = BlockerTable::new(inst, &voters, bound)?;
    let feasible = feasible_committees(inst, inst.k(), None)?;
    let pref = inst.preference();
    let ratios = feasible
        .par_iter()
        .map(|s| {
            let base = pref.keys(&voters, s)?;
            Ok(table.worst(&[(&base, 1.0)], inst.k(), inst.n())?.1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (idx, best) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &r)| if r < acc.1 { (i, r) } else { acc });
    Ok((best, feasible[idx].clone()))
}
