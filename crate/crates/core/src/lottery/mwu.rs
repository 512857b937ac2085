//! Multiplicative-weights solver for `(2 + eps, L)`-approximately stable
//! lotteries.
//!
//! The attacker keeps exponential weights over committees of at most `L`
//! members and weight at most `K/2`; the defender answers each round with
//! one sampled [`defender_response`](super::defender_response). The output
//! is the empirical mixture of defender committees, and it is only returned
//! after passing exhaustive verification.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::defender::respond;
use crate::enumerate::{candidate_blockers, count_up_to, EnumerationBound};
use crate::error::{Error, Result};
use crate::model::{Committee, Instance, Lottery, TOL};
use crate::stability::{lottery_worst, BlockerTable, BLOCK_TOL};

/// Largest attacker strategy space (committees of size at most `L`).
pub const MAX_ATTACKER_STRATEGIES: u64 = 2_000_000;

/// The first verification happens after this many rounds; later ones at
/// each doubling.
const FIRST_CHECK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuParams {
    /// Size bound on attacker committees.
    pub l: usize,
    pub eps: f64,
    pub seed: u64,
    /// Round budget of the first attempt; `None` uses
    /// `ceil(64 ln N / eps^2)` for `N` attacker strategies.
    pub max_rounds: Option<usize>,
    /// Extra attempts, each doubling the round budget.
    pub retries: u32,
}

impl MwuParams {
    pub fn new(l: usize, eps: f64, seed: u64) -> Self {
        MwuParams { l, eps, seed, max_rounds: None, retries: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MwuOutcome {
    pub lottery: Lottery,
    /// Worst blocking ratio of the returned lottery at bound `L`.
    pub measured_c: f64,
    pub rounds: usize,
    /// Size of the attacker strategy space.
    pub strategies: usize,
}

/// Default round budget for `n_strategies` attacker strategies.
pub fn default_rounds(n_strategies: usize, eps: f64) -> usize {
    let ln = (n_strategies.max(2) as f64).ln();
    (64.0 * ln / (eps * eps)).ceil() as usize
}

/// How the defender answers the attacker mix.
enum Responder {
    /// Committees of weight at most `K/2` exist: the pruned best response.
    Pruned,
    /// Every committee within the bound is heavier than `K/2`: one draw
    /// from the attacker mix, which keeps each voter's attack probability
    /// at most 1/2 while the blocking threshold exceeds `n`.
    Draw,
    /// No nonempty committee is feasible at all.
    Empty,
}

/// Runs MWU for the voter subset `voters` at budget `k` and returns a
/// lottery that passes verification at `c = 2 + eps`, bound `UpToSize(L)`.
pub fn mwu_lottery(inst: &Instance, voters: &[usize], k: f64, params: &MwuParams) -> Result<MwuOutcome> {
    if params.l == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    if !(params.eps > 0.0 && params.eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {}", params.eps)));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
    }
    if voters.is_empty() {
        return Err(Error::InvalidParameter("empty voter set".into()));
    }
    let count = count_up_to(inst.m(), params.l);
    if count > MAX_ATTACKER_STRATEGIES {
        return Err(Error::InstanceTooLarge(format!(
            "{count} attacker committees exceed the limit of {MAX_ATTACKER_STRATEGIES}"
        )));
    }
    let bound = EnumerationBound::UpToSize(params.l);
    let all = candidate_blockers(inst.m(), bound)?;
    let verify_table = BlockerTable::from_committees(inst, voters, all.clone())?;

    let half: Vec<Committee> = all
        .iter()
        .filter(|c| {
            let w = inst.weight_of(c);
            w > 0.0 && w <= k / 2.0 + TOL
        })
        .cloned()
        .collect();
    let (responder, attackers) = if !half.is_empty() {
        (Responder::Pruned, half)
    } else {
        let feasible: Vec<Committee> = all
            .into_iter()
            .filter(|c| {
                let w = inst.weight_of(c);
                w > 0.0 && w <= k + TOL
            })
            .collect();
        if feasible.is_empty() {
            (Responder::Empty, feasible)
        } else {
            (Responder::Draw, feasible)
        }
    };
    let target = 2.0 + params.eps;
    if let Responder::Empty = responder {
        let lottery = Lottery::point_mass(k, Committee::empty())?;
        let (_, measured_c) = lottery_worst(inst, voters, &lottery, &verify_table)?;
        return finish(lottery, measured_c, target, 0, 0);
    }

    let table = BlockerTable::from_committees(inst, voters, attackers)?;
    let strategies = table.committees.len();
    let n = voters.len() as f64;
    let eta = params.eps / 8.0;
    let threshold: Vec<f64> = table.weights.iter().map(|w| 2.0 * w / k * n).collect();
    let pref = inst.preference();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut log_w = vec![0.0f64; strategies];
    let mut probs = vec![0.0f64; strategies];
    let mut counts: HashMap<Committee, usize> = HashMap::new();
    let mut keys: HashMap<Committee, Vec<f64>> = HashMap::new();
    let mut best: Option<(Lottery, f64)> = None;

    let mut budget = params.max_rounds.unwrap_or_else(|| default_rounds(strategies, params.eps)).max(1);
    let mut next_check = FIRST_CHECK.min(budget);
    let mut round = 0;
    for attempt in 0..=params.retries {
        while round < budget {
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (p, lw) in probs.iter_mut().zip(&log_w) {
                *p = (lw - top).exp();
            }
            let s_d = match responder {
                Responder::Pruned => respond(&table.weights, &probs, k, &mut rng)?
                    .into_iter()
                    .fold(Committee::empty(), |acc, i| acc.union(&table.committees[i])),
                _ => {
                    let dist = WeightedIndex::new(&probs).expect("weights are positive");
                    table.committees[dist.sample(&mut rng)].clone()
                }
            };
            if !keys.contains_key(&s_d) {
                keys.insert(s_d.clone(), pref.keys(voters, &s_d)?);
            }
            let base = &keys[&s_d];
            for (a, alt) in table.keys.iter().enumerate() {
                let score = alt.iter().zip(base).filter(|(x, y)| x > y).count() as f64;
                log_w[a] += eta * (score - threshold[a]) / n;
            }
            *counts.entry(s_d).or_insert(0) += 1;
            round += 1;

            if round == next_check || round == budget {
                if round == next_check {
                    next_check *= 2;
                }
                let lottery = Lottery::from_weights(k, counts.iter().map(|(c, &x)| (c.clone(), x as f64)))?;
                let (_, measured_c) = lottery_worst(inst, voters, &lottery, &verify_table)?;
                if measured_c < target - BLOCK_TOL {
                    return finish(lottery, measured_c, target, round, strategies);
                }
                if best.as_ref().is_none_or(|(_, c)| measured_c < *c) {
                    best = Some((lottery, measured_c));
                }
            }
        }
        if attempt < params.retries {
            budget = budget.saturating_mul(2);
        }
    }
    let (lottery, measured_c) = best.expect("at least one verification ran");
    Err(Error::Convergence { target_c: target, measured_c, best: Box::new(lottery) })
}

fn finish(lottery: Lottery, measured_c: f64, target: f64, rounds: usize, strategies: usize) -> Result<MwuOutcome> {
    if measured_c < target - BLOCK_TOL {
        Ok(MwuOutcome { lottery, measured_c, rounds, strategies })
    } else {
        Err(Error::Convergence { target_c: target, measured_c, best: Box::new(lottery) })
    }
}
