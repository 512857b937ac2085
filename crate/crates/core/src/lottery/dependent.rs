//! Weighted pairwise dependent rounding.
//!
//! Two fractional entries at a time are moved along the direction that keeps
//! their weighted sum fixed, with step probabilities chosen so each entry's
//! expectation is unchanged. Every step fixes at least one of the pair, so
//! at most one positive-weight entry is left fractional.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::TOL;

const SNAP: f64 = 1e-12;

/// Fractional inclusion values in `[0, 1]` with item weights and a cap on
/// the weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalVector {
    values: Vec<f64>,
    weights: Vec<f64>,
    cap: f64,
}

impl FractionalVector {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, cap: f64) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidFractional(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidFractional(format!("value {v} outside [0, 1]")));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidFractional(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
        if !(total <= cap + TOL) {
            return Err(Error::InvalidFractional(format!(
                "weighted sum {total} exceeds the cap {cap}"
            )));
        }
        Ok(FractionalVector { values, weights, cap })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn weighted_sum(&self) -> f64 {
        weighted_sum(&self.values, &self.weights)
    }
}

pub fn weighted_sum(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

fn is_fractional(x: f64) -> bool {
    x > SNAP && x < 1.0 - SNAP
}

fn snap(x: f64) -> f64 {
    if x <= SNAP {
        0.0
    } else if x >= 1.0 - SNAP {
        1.0
    } else {
        x
    }
}

/// Rounds `p` so that all but at most one entry end in `{0, 1}`, each
/// entry's expectation equals its input value, the weighted sum is
/// preserved, and complements are negatively correlated. Zero-weight
/// entries are rounded independently.
pub fn dependent_round<R: Rng + ?Sized>(p: &FractionalVector, rng: &mut R) -> Vec<f64> {
    let w = &p.weights;
    let mut x: Vec<f64> = p.values.iter().map(|&v| snap(v)).collect();
    for i in 0..x.len() {
        if w[i] == 0.0 && is_fractional(x[i]) {
            x[i] = if rng.gen_bool(x[i]) { 1.0 } else { 0.0 };
        }
    }
    let mut cursor = 0;
    loop {
        let mut frac = (cursor..x.len()).filter(|&k| is_fractional(x[k]));
        let Some(i) = frac.next() else { break };
        let Some(j) = frac.next() else { break };
        cursor = i;
        let ratio = w[j] / w[i];
        let up = (1.0 - x[i]).min(x[j] * ratio);
        let down = x[i].min((1.0 - x[j]) * ratio);
        if rng.gen_bool(down / (up + down)) {
            // x_i rises by `up`, x_j falls
            if up == 1.0 - x[i] {
                x[i] = 1.0;
                x[j] = snap(x[j] - up / ratio);
            } else {
                x[i] = snap(x[i] + up);
                x[j] = 0.0;
            }
        } else if down == x[i] {
            x[i] = 0.0;
            x[j] = snap(x[j] + down / ratio);
        } else {
            x[i] = snap(x[i] - down);
            x[j] = 1.0;
        }
    }
    x
}
