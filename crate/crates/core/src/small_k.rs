//! Exactly stable lotteries for unit-weight instances with `K <= 3`, and the
//! sampling defenders behind them.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::EnumerationBound;
use crate::error::{Error, Result};
use crate::lottery::{exact_game, GameSolution, GAME_TOL};
use crate::model::{Committee, Instance, TOL};

fn check_mix(mix: &[(Committee, f64)], what: &str) -> Result<()> {
    if mix.is_empty() {
        return Err(Error::Precondition(format!("{what} is empty")));
    }
    if let Some((c, p)) = mix.iter().find(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Precondition(format!("{what}: probability {p} of {c}")));
    }
    let total: f64 = mix.iter().map(|e| e.1).sum();
    if (total - 1.0).abs() > TOL {
        return Err(Error::Precondition(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn draw<'a, R: Rng + ?Sized>(mix: &'a [(Committee, f64)], rng: &mut R) -> &'a Committee {
    let dist = WeightedIndex::new(mix.iter().map(|e| e.1)).expect("mix was checked");
    &mix[dist.sample(rng)].0
}

/// Defender against an attacker whose committees all weigh exactly `K'`:
/// the union of `t = floor(K / K')` independent draws from the attacker
/// distribution. A fixed voter then prefers an independent attack draw with
/// probability at most `1 / (t + 1)`.
pub fn same_size_defender<R: Rng + ?Sized>(
    inst: &Instance,
    attacker: &[(Committee, f64)],
    k: f64,
    rng: &mut R,
) -> Result<Committee> {
    check_mix(attacker, "attacker distribution")?;
    for (c, _) in attacker {
        c.check_valid(inst.m())?;
    }
    let k_prime = inst.weight_of(&attacker[0].0);
    if let Some((c, _)) = attacker.iter().find(|(c, _)| (inst.weight_of(c) - k_prime).abs() > TOL) {
        return Err(Error::Precondition(format!(
            "committee {c} weighs {} but {} weighs {k_prime}",
            inst.weight_of(c),
            attacker[0].0
        )));
    }
    if !(k_prime > 0.0 && k_prime <= k + TOL) {
        return Err(Error::Precondition(format!("common weight {k_prime} must lie in (0, K = {k}]")));
    }
    let t = ((k + TOL) / k_prime).floor() as usize;
    Ok((0..t).fold(Committee::empty(), |acc, _| acc.union(draw(attacker, rng))))
}

/// Attacker mix over committees of one and two members, split by size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAttack {
    /// Mass on single-member committees.
    pub p: f64,
    /// Conditional distribution over singletons.
    pub delta1: Vec<(Committee, f64)>,
    /// Conditional distribution over pairs.
    pub delta2: Vec<(Committee, f64)>,
}

impl SplitAttack {
    pub fn new(p: f64, delta1: Vec<(Committee, f64)>, delta2: Vec<(Committee, f64)>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!("p = {p} outside [0, 1]")));
        }
        if p > 0.0 {
            check_mix(&delta1, "singleton distribution")?;
        }
        if p < 1.0 {
            check_mix(&delta2, "pair distribution")?;
        }
        if delta1.iter().any(|(c, _)| c.len() != 1) {
            return Err(Error::Precondition("singleton distribution has a committee of another size".into()));
        }
        if delta2.iter().any(|(c, _)| c.len() != 2) {
            return Err(Error::Precondition("pair distribution has a committee of another size".into()));
        }
        Ok(SplitAttack { p, delta1, delta2 })
    }

    /// Splits a mixed strategy over committees of size 1 and 2.
    pub fn from_mixture(mix: &[(Committee, f64)]) -> Result<Self> {
        check_mix(mix, "attacker mix")?;
        if let Some((c, _)) = mix.iter().find(|(c, _)| c.len() != 1 && c.len() != 2) {
            return Err(Error::Precondition(format!("committee {c} has neither one nor two members")));
        }
        let part = |size: usize| -> (f64, Vec<(Committee, f64)>) {
            let items: Vec<_> = mix.iter().filter(|(c, x)| c.len() == size && *x > 0.0).cloned().collect();
            let mass: f64 = items.iter().map(|e| e.1).sum();
            (mass, items.into_iter().map(|(c, x)| (c, x / mass)).collect())
        };
        let (p, delta1) = part(1);
        let (_, delta2) = part(2);
        SplitAttack::new(p, delta1, delta2)
    }

    /// Expected attack size with unit weights: `p + 2 (1 - p)`.
    pub fn expected_weight(&self) -> f64 {
        self.p + 2.0 * (1.0 - self.p)
    }
}

/// Defender for `K = 3` against a mixed-size attack with `0 < p < 1`: with
/// probability `p^2` the union of two singleton draws, otherwise the union
/// of one singleton draw and one pair draw. A fixed voter prefers an
/// independent attack draw with probability at most `1/2 - p/6`.
pub fn k3_defender<R: Rng + ?Sized>(attack: &SplitAttack, rng: &mut R) -> Result<Committee> {
    if !(attack.p > 0.0 && attack.p < 1.0) {
        return Err(Error::Precondition(format!(
            "p = {} needs the same-size defender instead",
            attack.p
        )));
    }
    let first = draw(&attack.delta1, rng);
    let second = if rng.gen_bool(attack.p * attack.p) {
        draw(&attack.delta1, rng)
    } else {
        draw(&attack.delta2, rng)
    };
    Ok(first.union(second))
}

/// Solves the exact game at `c = 1` for a unit-weight instance with
/// `K` in {1, 2, 3} and returns the exactly stable lottery it finds.
pub fn verify_exact_small_k(inst: &Instance) -> Result<GameSolution> {
    let k = inst.k();
    if ![1.0, 2.0, 3.0].iter().any(|&x| (k - x).abs() <= TOL) {
        return Err(Error::Precondition(format!("K must be 1, 2 or 3, got {k}")));
    }
    if !inst.has_unit_weights() {
        return Err(Error::Precondition("candidate weights must all be 1".into()));
    }
    let all = EnumerationBound::AllCommittees;
    let sol = exact_game(inst, k.round(), 1.0, all, all)?;
    if !(sol.value < -GAME_TOL) {
        return Err(Error::TheoremViolation(format!(
            "no exactly stable lottery found for K = {k}: game value {}",
            sol.value
        )));
    }
    Ok(sol)
}
