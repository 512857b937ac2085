//! Exact zero-sum game between a defender choosing a lottery over feasible
//! committees and an attacker choosing a deviating committee.
//!
//! `M[d][a] = V(S_d, S_a) - c * w(S_a) / K * n`. A negative game value means
//! some lottery keeps every deviation's expected support below its
//! `c`-scaled threshold. The game is solved by double oracle: restricted
//! games are solved exactly and each side's best response over the full
//! matrix is added until the two bounds meet.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex::solve_matrix_game;
use crate::enumerate::{candidate_blockers, feasible_committees, EnumerationBound};
use crate::error::{Error, Result};
use crate::model::{Committee, Instance, Lottery, TOL};

/// Pure strategies allowed on each side.
pub const MAX_STRATEGIES: usize = 5000;

/// Stop once the upper and lower bounds on the value are this close.
pub const GAME_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    /// Upper bound on the game value: the defender lottery guarantees it.
    pub value: f64,
    /// Lower bound on the game value: the attacker mix guarantees it.
    pub lower_bound: f64,
    #[serde(with = "mix_json")]
    pub attacker_mix: Vec<(Committee, f64)>,
    pub defender_lottery: Lottery,
    pub iterations: usize,
    pub certified: bool,
}

mod mix_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::Committee;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        committee: Committee,
        prob: f64,
    }

    pub fn serialize<S: Serializer>(mix: &[(Committee, f64)], s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = mix.iter().map(|(c, p)| Entry { committee: c.clone(), prob: *p }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Committee, f64)>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| (e.committee, e.prob)).collect())
    }
}

/// Solves the game over all voters.
pub fn exact_game(
    inst: &Instance,
    k: f64,
    c: f64,
    defender_bound: EnumerationBound,
    attacker_bound: EnumerationBound,
) -> Result<GameSolution> {
    exact_game_for(inst, &inst.all_voters(), k, c, defender_bound, attacker_bound)
}

/// The game restricted to `voters`, with `n = voters.len()`.
///
/// Defenders are the committees of weight at most `k` within
/// `defender_bound`. Attackers are the positive-weight committees within
/// `attacker_bound`; for `c >= 2` those heavier than `k/2` are dropped when
/// any lighter one remains.
pub fn exact_game_for(
    inst: &Instance,
    voters: &[usize],
    k: f64,
    c: f64,
    defender_bound: EnumerationBound,
    attacker_bound: EnumerationBound,
) -> Result<GameSolution> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if voters.is_empty() {
        return Err(Error::InvalidParameter("empty voter set".into()));
    }
    if let Some(v) = voters.iter().find(|&&v| v >= inst.n()) {
        return Err(Error::InvalidParameter(format!("voter {v} out of range")));
    }
    if let EnumerationBound::UpToSize(0) = defender_bound {
        return Err(Error::InvalidParameter("defender size bound must be at least 1".into()));
    }
    let defenders = feasible_committees(inst, k, Some(defender_bound.max_size(inst.m())))?;
    let mut attackers: Vec<Committee> = candidate_blockers(inst.m(), attacker_bound)?
        .into_iter()
        .filter(|s| inst.weight_of(s) > 0.0)
        .collect();
    if c >= 2.0 {
        let light: Vec<Committee> =
            attackers.iter().filter(|s| inst.weight_of(s) <= k / 2.0 + TOL).cloned().collect();
        if !light.is_empty() {
            attackers = light;
        }
    }
    if attackers.is_empty() {
        return Err(Error::DegenerateAttacker("no positive-weight attacker committee".into()));
    }
    for (side, len) in [("defender", defenders.len()), ("attacker", attackers.len())] {
        if len > MAX_STRATEGIES {
            return Err(Error::InstanceTooLarge(format!(
                "{len} {side} strategies exceed the limit of {MAX_STRATEGIES}"
            )));
        }
    }

    let n = voters.len() as f64;
    let pref = inst.preference();
    let def_keys = defenders.par_iter().map(|s| pref.keys(voters, s)).collect::<Result<Vec<_>>>()?;
    let att_keys = attackers.par_iter().map(|s| pref.keys(voters, s)).collect::<Result<Vec<_>>>()?;
    let threshold: Vec<f64> = attackers.iter().map(|s| c * inst.weight_of(s) / k * n).collect();
    let payoff: Vec<Vec<f64>> = def_keys
        .par_iter()
        .map(|base| {
            att_keys
                .iter()
                .zip(&threshold)
                .map(|(alt, t)| alt.iter().zip(base).filter(|(x, y)| x > y).count() as f64 - t)
                .collect()
        })
        .collect();

    let (rows, cols, upper, lower, iterations) = double_oracle(&payoff);
    let defender_lottery =
        Lottery::from_weights(k, rows.iter().map(|&(d, x)| (defenders[d].clone(), x)))?;
    let mut attacker_mix: Vec<(Committee, f64)> =
        cols.iter().filter(|e| e.1 > 0.0).map(|&(a, y)| (attackers[a].clone(), y)).collect();
    attacker_mix.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(GameSolution {
        value: upper,
        lower_bound: lower,
        attacker_mix,
        defender_lottery,
        iterations,
        certified: upper - lower < GAME_TOL,
    })
}

type Mix = Vec<(usize, f64)>;

/// Returns the defender mix, attacker mix, upper and lower value bounds and
/// the iteration count.
fn double_oracle(m: &[Vec<f64>]) -> (Mix, Mix, f64, f64, usize) {
    let n_def = m.len();
    let n_att = m[0].len();
    // start from the attacker's best pure reply to a uniform defender
    let uniform: Vec<f64> = (0..n_att).map(|a| m.iter().map(|row| row[a]).sum::<f64>()).collect();
    let mut att: Vec<usize> = vec![argmax(&uniform)];
    let mut def: Vec<usize> = vec![argmin(&m.iter().map(|row| row[att[0]]).collect::<Vec<_>>())];
    let mut best: Option<(Mix, Mix, f64, f64)> = None;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let sub: Vec<Vec<f64>> = def.iter().map(|&d| att.iter().map(|&a| m[d][a]).collect()).collect();
        let sol = solve_matrix_game(&sub);
        let x: Mix = def.iter().copied().zip(sol.rows.iter().copied()).filter(|e| e.1 > 0.0).collect();
        let y: Mix = att.iter().copied().zip(sol.cols.iter().copied()).filter(|e| e.1 > 0.0).collect();

        let against_x: Vec<f64> =
            (0..n_att).map(|a| x.iter().map(|&(d, p)| p * m[d][a]).sum()).collect();
        let against_y: Vec<f64> =
            (0..n_def).map(|d| y.iter().map(|&(a, q)| q * m[d][a]).sum()).collect();
        let a_star = argmax(&against_x);
        let d_star = argmin(&against_y);
        let upper = against_x[a_star];
        let lower = against_y[d_star];
        debug_assert!(lower <= sol.value + 1e-6 && sol.value <= upper + 1e-6);

        let (bu, bl) = best.as_ref().map_or((f64::INFINITY, f64::NEG_INFINITY), |b| (b.2, b.3));
        let (nx, ny, nu, nl) = (
            if upper < bu { x.clone() } else { best.as_ref().unwrap().0.clone() },
            if lower > bl { y.clone() } else { best.as_ref().unwrap().1.clone() },
            upper.min(bu),
            lower.max(bl),
        );
        best = Some((nx, ny, nu, nl));
        let (_, _, u, l) = best.as_ref().unwrap();
        if u - l < GAME_TOL {
            break;
        }
        let mut grew = false;
        if !att.contains(&a_star) {
            att.push(a_star);
            grew = true;
        }
        if !def.contains(&d_star) {
            def.push(d_star);
            grew = true;
        }
        if !grew {
            // both best responses are already in play: the restricted
            // solution is optimal up to solver precision
            break;
        }
    }
    let (x, y, u, l) = best.unwrap();
    (x, y, u, l, iterations)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] < v[b] { i } else { b })
}
