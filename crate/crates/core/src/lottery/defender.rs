//! Defender best response to a mixed attacker strategy.

use rand::Rng;

use super::dependent::{dependent_round, FractionalVector};
use crate::error::{Error, Result};
use crate::model::{Committee, Instance, TOL};

/// Answers the attacker mix with a single committee of weight at most `k`.
///
/// Attacker committees heavier than `k / 2` are dropped and the rest
/// renormalized. With `beta = sum(alpha_i * w_i) / k`, each remaining
/// committee gets inclusion value `min(1, alpha_i / (2 beta))`; these are
/// dependently rounded and every committee with a positive outcome joins
/// the union.
pub fn defender_response<R: Rng + ?Sized>(
    inst: &Instance,
    attacker_mix: &[(Committee, f64)],
    k: f64,
    rng: &mut R,
) -> Result<Committee> {
    for (c, p) in attacker_mix {
        c.check_valid(inst.m())?;
        if !(p.is_finite() && *p >= 0.0) {
            return Err(Error::InvalidParameter(format!("attacker probability {p} for {c}")));
        }
    }
    let kept: Vec<(&Committee, f64, f64)> = attacker_mix
        .iter()
        .map(|(c, p)| (c, *p, inst.weight_of(c)))
        .filter(|&(_, p, w)| p > 0.0 && w <= k / 2.0 + TOL)
        .collect();
    let weights: Vec<f64> = kept.iter().map(|e| e.2).collect();
    let probs: Vec<f64> = kept.iter().map(|e| e.1).collect();
    let chosen = respond(&weights, &probs, k, rng)?;
    Ok(chosen.into_iter().fold(Committee::empty(), |acc, i| acc.union(kept[i].0)))
}

/// Index form of [`defender_response`] over pre-pruned attacker committees
/// (all weights at most `k / 2`). `probs` need not be normalized. Returns
/// the indices whose rounded value is positive.
pub(crate) fn respond<R: Rng + ?Sized>(
    weights: &[f64],
    probs: &[f64],
    k: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateAttacker(
            "no attacker mass on committees of weight at most K/2".into(),
        ));
    }
    let beta: f64 = probs.iter().zip(weights).map(|(a, w)| a / total * w).sum::<f64>() / k;
    if !(beta > 0.0) {
        return Err(Error::DegenerateAttacker("every attacker committee has zero weight".into()));
    }
    let values: Vec<f64> = probs.iter().map(|a| (a / total / (2.0 * beta)).min(1.0)).collect();
    let frac = FractionalVector::new(values, weights.to_vec(), k / 2.0)?;
    let x = dependent_round(&frac, rng);
    Ok((0..x.len()).filter(|&i| x[i] > 0.0).collect())
}
