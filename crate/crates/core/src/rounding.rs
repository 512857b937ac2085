//! Iterated rounding of per-round lotteries into one deterministic
//! committee.
//!
//! Each round asks a lottery provider for a stable lottery over the voters
//! still uncovered at a shrinking budget, picks the support committee that
//! the most of those voters do not rank near the bottom of the lottery, adds
//! it to the output and removes the voters it covers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::{candidate_blockers, EnumerationBound};
use crate::error::{Error, Result};
use crate::lottery::{exact_game_for, mwu_lottery, MwuParams};
use crate::model::{Committee, Instance, Lottery, TOL};
use crate::preferences::PreferenceModel;
use crate::stability::verify_lottery_for;

/// Slack on the good- and bad-set mass thresholds.
const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingParams {
    /// Budget shrink factor between rounds.
    pub alpha: f64,
    /// Fraction of voters a round may leave uncovered.
    pub beta: f64,
    /// Slack of the lottery provider's stability factor `2 + epsilon`.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for RoundingParams {
    fn default() -> Self {
        RoundingParams { alpha: 0.5, beta: 0.25, epsilon: 0.1, seed: 0 }
    }
}

impl RoundingParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.beta && self.beta <= self.alpha && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < beta <= alpha < 1, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Stability factor of the rounded committee when every round's lottery is
/// 2-approximately stable: `2 alpha / (beta (1 - alpha) (alpha - beta))`.
pub fn theoretical_bound(alpha: f64, beta: f64) -> f64 {
    2.0 * alpha / (beta * (1.0 - alpha) * (alpha - beta))
}

/// Per-voter lottery mass on support committees weakly below support
/// committee `i`: `below[i][v]`.
fn mass_below(delta: &Lottery, model: &PreferenceModel, voters: &[usize]) -> Result<Vec<Vec<f64>>> {
    let keys = delta
        .support()
        .iter()
        .map(|(s, _)| model.keys(voters, s))
        .collect::<Result<Vec<_>>>()?;
    let probs: Vec<f64> = delta.support().iter().map(|e| e.1).collect();
    Ok(keys
        .par_iter()
        .map(|ki| {
            let mut down = vec![0.0; voters.len()];
            for (kj, x) in keys.iter().zip(&probs) {
                for v in 0..voters.len() {
                    if kj[v] <= ki[v] {
                        down[v] += x;
                    }
                }
            }
            down
        })
        .collect())
}

fn mass_where(delta: &Lottery, model: &PreferenceModel, v: usize, s: &Committee, keep: impl Fn(f64, f64) -> bool) -> Result<f64> {
    let base = model.key(v, s)?;
    delta.support().iter().try_fold(0.0, |acc, (t, x)| {
        Ok(if keep(model.key(v, t)?, base) { acc + x } else { acc })
    })
}

/// `S` is in voter `v`'s good set: the lottery mass on committees `v`
/// weakly prefers to `S` is at most `1 - beta`.
pub fn good_set_member(delta: &Lottery, model: &PreferenceModel, v: usize, s: &Committee, beta: f64) -> Result<bool> {
    Ok(mass_where(delta, model, v, s, |t, b| t >= b)? <= 1.0 - beta + MASS_TOL)
}

/// `S` is in voter `v`'s bad set: the lottery mass on committees `v`
/// weakly disprefers to `S` is at most `beta`.
pub fn bad_set_member(delta: &Lottery, model: &PreferenceModel, v: usize, s: &Committee, beta: f64) -> Result<bool> {
    Ok(mass_where(delta, model, v, s, |t, b| t <= b)? <= beta + MASS_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub committee: Committee,
    /// Voters for whom the committee is outside the bad set.
    pub covered: Vec<usize>,
}

/// Support committee outside the bad set of the most voters in `voters`;
/// ties go to the lexicographically smallest committee. Such a committee
/// covers at least `ceil((1 - beta) |voters|)` voters for every lottery.
pub fn select_representative(
    delta: &Lottery,
    model: &PreferenceModel,
    voters: &[usize],
    beta: f64,
) -> Result<Representative> {
    if voters.is_empty() {
        return Err(Error::InvalidParameter("empty voter set".into()));
    }
    let below = mass_below(delta, model, voters)?;
    let coverage: Vec<usize> =
        below.iter().map(|row| row.iter().filter(|&&m| m > beta + MASS_TOL).count()).collect();
    let support = delta.support();
    let best = (0..support.len())
        .max_by(|&i, &j| coverage[i].cmp(&coverage[j]).then_with(|| support[j].0.cmp(&support[i].0)))
        .expect("lottery support is nonempty");
    let need = ((1.0 - beta) * voters.len() as f64 - MASS_TOL).ceil() as usize;
    if coverage[best] < need {
        return Err(Error::TheoremViolation(format!(
            "best support committee covers {} of {} voters, below {need}",
            coverage[best],
            voters.len()
        )));
    }
    let covered = voters
        .iter()
        .zip(&below[best])
        .filter(|(_, &m)| m > beta + MASS_TOL)
        .map(|(&v, _)| v)
        .collect();
    Ok(Representative { committee: support[best].0.clone(), covered })
}

/// Looks for a counterexample to the good-set property: for a voter with
/// `S` outside the bad set, every blocker the voter strictly prefers to `S`
/// must lie in the good set.
pub fn claim1_violation(
    delta: &Lottery,
    model: &PreferenceModel,
    voters: &[usize],
    s: &Committee,
    beta: f64,
    blockers: &[Committee],
) -> Result<Option<(usize, Committee)>> {
    for &v in voters {
        if bad_set_member(delta, model, v, s, beta)? {
            continue;
        }
        let base = model.key(v, s)?;
        for b in blockers {
            if model.key(v, b)? > base && !good_set_member(delta, model, v, b, beta)? {
                return Ok(Some((v, b.clone())));
            }
        }
    }
    Ok(None)
}

/// A lottery for a voter subset together with its measured stability factor.
#[derive(Debug, Clone)]
pub struct ProvidedLottery {
    pub lottery: Lottery,
    pub measured_c: f64,
}

/// Source of approximately stable lotteries for a voter subset and budget.
pub trait LotteryProvider {
    fn provide(&mut self, inst: &Instance, voters: &[usize], k: f64) -> Result<ProvidedLottery>;
}

/// Multiplicative-weights lotteries, verified at `2 + eps` for blockers of
/// at most `L` members. Each call uses the next seed.
#[derive(Debug, Clone)]
pub struct MwuProvider {
    pub params: MwuParams,
    calls: u64,
}

impl MwuProvider {
    pub fn new(params: MwuParams) -> Self {
        MwuProvider { params, calls: 0 }
    }
}

impl LotteryProvider for MwuProvider {
    fn provide(&mut self, inst: &Instance, voters: &[usize], k: f64) -> Result<ProvidedLottery> {
        let params = MwuParams { seed: self.params.seed.wrapping_add(self.calls), ..self.params };
        self.calls += 1;
        let out = mwu_lottery(inst, voters, k, &params)?;
        Ok(ProvidedLottery { lottery: out.lottery, measured_c: out.measured_c })
    }
}

/// Optimal lotteries of the exact game at factor `c`.
#[derive(Debug, Clone, Copy)]
pub struct ExactGameProvider {
    pub c: f64,
    pub attacker_bound: EnumerationBound,
}

impl LotteryProvider for ExactGameProvider {
    fn provide(&mut self, inst: &Instance, voters: &[usize], k: f64) -> Result<ProvidedLottery> {
        let sol = exact_game_for(inst, voters, k, self.c, EnumerationBound::AllCommittees, self.attacker_bound)?;
        let report = verify_lottery_for(inst, voters, &sol.defender_lottery, self.c, self.attacker_bound)?;
        Ok(ProvidedLottery { lottery: sol.defender_lottery, measured_c: report.worst_ratio })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    /// Voters still uncovered at the start of the round.
    pub voters: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub committee: Committee,
    pub removed: usize,
    pub support: usize,
    pub measured_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub rounds: Vec<RoundRecord>,
    pub alpha: f64,
    pub beta: f64,
    /// [`theoretical_bound`] at the configured parameters.
    pub theoretical_bound: f64,
    /// Largest stability factor measured on any round's lottery.
    pub provider_c: f64,
}

impl RoundingTrace {
    /// Guarantee for the output given the measured provider factor: the
    /// bound scales by `c / 2` when lotteries are only `c`-stable.
    pub fn guaranteed_bound(&self) -> f64 {
        self.provider_c.max(2.0) / 2.0 * self.theoretical_bound
    }

    /// One JSON object per round.
    pub fn to_jsonl(&self) -> String {
        self.rounds
            .iter()
            .map(|r| serde_json::to_string(r).expect("round record serializes") + "\n")
            .collect()
    }
}

/// Iterated rounding: starting from budget `(1 - alpha) K` and all voters,
/// repeatedly take the provider's lottery for the uncovered voters, add its
/// representative committee, drop the covered voters and scale the budget
/// by `alpha`. The union weighs at most `K`.
pub fn iterated_rounding(
    inst: &Instance,
    params: &RoundingParams,
    provider: &mut dyn LotteryProvider,
) -> Result<(Committee, RoundingTrace)> {
    params.validate()?;
    let model = inst.preference();
    let mut voters = inst.all_voters();
    let mut out = Committee::empty();
    let mut k = (1.0 - params.alpha) * inst.k();
    let mut rounds = Vec::new();
    let singletons =
        if cfg!(debug_assertions) { candidate_blockers(inst.m(), EnumerationBound::UpToSize(1))? } else { Vec::new() };
    while !voters.is_empty() {
        let provided = provider.provide(inst, &voters, k)?;
        let rep = select_representative(&provided.lottery, model, &voters, params.beta)?;
        if cfg!(debug_assertions) {
            let mut blockers = singletons.clone();
            blockers.extend(provided.lottery.support().iter().map(|e| e.0.clone()));
            if let Some((v, b)) =
                claim1_violation(&provided.lottery, model, &rep.covered, &rep.committee, params.beta, &blockers)?
            {
                return Err(Error::TheoremViolation(format!(
                    "voter {v} prefers {b} to {} but {b} is outside the good set",
                    rep.committee
                )));
            }
        }
        rounds.push(RoundRecord {
            t: rounds.len(),
            voters: voters.len(),
            k,
            committee: rep.committee.clone(),
            removed: rep.covered.len(),
            support: provided.lottery.len(),
            measured_c: provided.measured_c,
        });
        voters.retain(|v| rep.covered.binary_search(v).is_err());
        out = out.union(&rep.committee);
        k *= params.alpha;
    }
    let w = inst.weight_of(&out);
    if w > inst.k() + TOL {
        return Err(Error::TheoremViolation(format!("rounded committee {out} weighs {w} > K = {}", inst.k())));
    }
    let provider_c = rounds.iter().map(|r| r.measured_c).fold(0.0, f64::max);
    let trace = RoundingTrace {
        rounds,
        alpha: params.alpha,
        beta: params.beta,
        theoretical_bound: theoretical_bound(params.alpha, params.beta),
        provider_c,
    };
    Ok((out, trace))
}
