//! Instance families: the cyclic and grid lower-bound constructions, and
//! seeded random instances for each preference model.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateId, Instance, WeightSpec};
use crate::preferences::PreferenceModel;

/// Cyclic instance: `m` unit-weight candidates, `m` voters, `K = 2 - eps/2`.
/// Voter `i` ranks `c_i > c_{i+1} > ... > c_{i-1}`, encoded as additive
/// utilities `m - ((j - i) mod m)`.
pub fn gen_cyclic(m: usize, eps: f64) -> Result<Instance> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("cyclic instance needs m >= 2, got {m}")));
    }
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 2), got {eps}")));
    }
    let utilities = (0..m)
        .map(|i| (0..m).map(|j| (m - (j + m - i) % m) as f64).collect())
        .collect();
    Instance::new(m, m, 2.0 - eps / 2.0, WeightSpec::unit(m), PreferenceModel::Budget { utilities })
}

/// Grid instance on `r` rows and `ell` columns with `K = r - 1`. Candidate
/// and voter `(i, j)` both have index `i * ell + j`. Voter `(i, j)` orders
/// candidates by cyclic row distance from `i`, then cyclic column distance
/// from `j`.
pub fn gen_ranking_grid(r: usize, ell: usize) -> Result<Instance> {
    if r < 2 || ell < 1 {
        return Err(Error::InvalidParameter(format!(
            "grid instance needs r >= 2 and ell >= 1, got r = {r}, ell = {ell}"
        )));
    }
    let m = r * ell;
    let orders = (0..m)
        .map(|v| {
            let (vi, vj) = (v / ell, v % ell);
            let mut order: Vec<CandidateId> = (0..m as CandidateId).collect();
            order.sort_by_key(|&c| {
                let (ci, cj) = (c as usize / ell, c as usize % ell);
                ((ci + r - vi) % r, (cj + ell - vj) % ell)
            });
            order
        })
        .collect();
    Instance::new(m, m, (r - 1) as f64, WeightSpec::unit(m), PreferenceModel::Ranking { orders })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Approval,
    Ranking,
    Budget,
    Facility,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::Approval, ModelKind::Ranking, ModelKind::Budget, ModelKind::Facility];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Approval => "approval",
            ModelKind::Ranking => "ranking",
            ModelKind::Budget => "budget",
            ModelKind::Facility => "facility",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approval" => Ok(ModelKind::Approval),
            "ranking" => Ok(ModelKind::Ranking),
            "budget" => Ok(ModelKind::Budget),
            "facility" => Ok(ModelKind::Facility),
            other => Err(Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    /// Per-(voter, candidate) approval probability.
    pub density: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { density: 0.5 }
    }
}

/// Seeded random instance. Budget instances draw weights from
/// `[0.5, 1.5]`; every other model uses unit weights.
pub fn gen_random(
    kind: ModelKind,
    m: usize,
    n: usize,
    k: f64,
    params: RandomParams,
    seed: u64,
) -> Result<Instance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("m and n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(Error::InvalidParameter(format!("density {} not in [0, 1]", params.density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = WeightSpec::unit(m);
    let preference = match kind {
        ModelKind::Approval => PreferenceModel::Approval {
            sets: (0..n)
                .map(|_| (0..m as CandidateId).filter(|_| rng.gen_bool(params.density)).collect())
                .collect(),
        },
        ModelKind::Ranking => PreferenceModel::Ranking {
            orders: (0..n)
                .map(|_| {
                    let mut o: Vec<CandidateId> = (0..m as CandidateId).collect();
                    o.shuffle(&mut rng);
                    o
                })
                .collect(),
        },
        ModelKind::Budget => {
            weights = WeightSpec::Additive { s: (0..m).map(|_| rng.gen_range(0.5..=1.5)).collect() };
            PreferenceModel::Budget {
                utilities: (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect()).collect(),
            }
        }
        ModelKind::Facility => {
            let mut point = || (rng.gen::<f64>(), rng.gen::<f64>());
            let facilities: Vec<(f64, f64)> = (0..m).map(|_| point()).collect();
            let voters: Vec<(f64, f64)> = (0..n).map(|_| point()).collect();
            PreferenceModel::Facility {
                distances: voters
                    .iter()
                    .map(|v| facilities.iter().map(|f| (v.0 - f.0).hypot(v.1 - f.1)).collect())
                    .collect(),
            }
        }
    };
    Instance::new(m, n, k, weights, preference)
}
