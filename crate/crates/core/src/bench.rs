//! Benchmark suites that tabulate lower bounds, small-budget game values and
//! rounding quality as CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::EnumerationBound;
use crate::error::{Error, Result};
use crate::generators::{gen_cyclic, gen_random, gen_ranking_grid, ModelKind, RandomParams};
use crate::lottery::MwuParams;
use crate::model::TOL;
use crate::rounding::{iterated_rounding, MwuProvider, RoundingParams};
use crate::small_k::verify_exact_small_k;
use crate::stability::find_worst_blocker;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    LowerBounds,
    SmallK,
    Rounding,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowerbounds" => Ok(Suite::LowerBounds),
            "smallk" => Ok(Suite::SmallK),
            "rounding" => Ok(Suite::Rounding),
            other => Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::LowerBounds => "lowerbounds",
            Suite::SmallK => "smallk",
            Suite::Rounding => "rounding",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundRow {
    pub family: String,
    pub params: String,
    #[serde(rename = "K")]
    pub k: f64,
    /// Blocker size bound used for the brute force.
    pub bound: String,
    pub formula: f64,
    pub measured: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallKRow {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: u32,
    pub kind: ModelKind,
    pub m: usize,
    pub n: usize,
    pub value: f64,
    pub certified: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingRow {
    pub seed: u64,
    pub kind: ModelKind,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub committee: String,
    pub weight: f64,
    pub rounds: usize,
    pub provider_c: f64,
    pub worst_ratio: f64,
    pub theoretical_bound: f64,
    pub within_bound: bool,
}

pub const CYCLIC_SIZES: [usize; 3] = [5, 10, 20];
pub const CYCLIC_EPS: f64 = 0.2;
pub const GRID_SIDES: [usize; 3] = [3, 4, 5];

/// Minimum deterministic blocking ratio of the cyclic and grid families
/// next to their closed-form lower bounds, with singleton blockers.
pub fn lower_bounds() -> Result<Vec<LowerBoundRow>> {
    let l1 = EnumerationBound::UpToSize(1);
    let mut rows = Vec::new();
    for m in CYCLIC_SIZES {
        let inst = gen_cyclic(m, CYCLIC_EPS)?;
        let (measured, _) = crate::stability::min_deterministic_c(&inst, l1)?;
        let formula = (m as f64 - 1.0) / m as f64 * (2.0 - CYCLIC_EPS / 2.0);
        rows.push(LowerBoundRow {
            family: "cyclic".into(),
            params: format!("m={m} eps={CYCLIC_EPS}"),
            k: inst.k(),
            bound: "L=1".into(),
            formula,
            measured,
            holds: (measured - formula).abs() <= TOL,
        });
    }
    for r in GRID_SIDES {
        for ell in GRID_SIDES {
            let inst = gen_ranking_grid(r, ell)?;
            let (measured, _) = crate::stability::min_deterministic_c(&inst, l1)?;
            let formula = (2 * ell - 1) as f64 * (r - 1) as f64 / (ell * r) as f64;
            rows.push(LowerBoundRow {
                family: "grid".into(),
                params: format!("r={r} ell={ell}"),
                k: inst.k(),
                bound: "L=1".into(),
                formula,
                measured,
                holds: measured >= formula - TOL,
            });
        }
    }
    Ok(rows)
}

/// Exact `c = 1` game values on random unit-weight instances for each
/// `K` in {1, 2, 3}.
pub fn small_k(seeds: u64) -> Result<Vec<SmallKRow>> {
    let mut rows = Vec::new();
    for seed in 0..seeds {
        for k in 1..=3u32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 3 + k as u64);
            let kind = if rng.gen_bool(0.5) { ModelKind::Approval } else { ModelKind::Ranking };
            let m = rng.gen_range(3..=6);
            let n = rng.gen_range(3..=6);
            let inst = gen_random(kind, m, n, k as f64, RandomParams::default(), rng.gen())?;
            let (value, certified, passed) = match verify_exact_small_k(&inst) {
                Ok(sol) => (sol.value, sol.certified, true),
                Err(Error::TheoremViolation(_)) => {
                    let sol = crate::lottery::exact_game(
                        &inst,
                        k as f64,
                        1.0,
                        EnumerationBound::AllCommittees,
                        EnumerationBound::AllCommittees,
                    )?;
                    (sol.value, sol.certified, false)
                }
                Err(e) => return Err(e),
            };
            rows.push(SmallKRow { seed, k, kind, m, n, value, certified, passed });
        }
    }
    Ok(rows)
}

/// Iterated rounding with default parameters and full-size MWU lotteries,
/// measured against every deviating committee.
pub fn rounding(seeds: u64) -> Result<Vec<RoundingRow>> {
    let kinds = [ModelKind::Approval, ModelKind::Ranking, ModelKind::Budget];
    let mut rows = Vec::new();
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = kinds[(seed % 3) as usize];
        let m = rng.gen_range(4..=8);
        let n = rng.gen_range(4..=10);
        let k = rng.gen_range(2..=4) as f64;
        let inst = gen_random(kind, m, n, k, RandomParams::default(), rng.gen())?;
        let params = RoundingParams { seed, ..RoundingParams::default() };
        let mut provider = MwuProvider::new(MwuParams::new(m, params.epsilon, seed));
        let (committee, trace) = iterated_rounding(&inst, &params, &mut provider)?;
        let (_, worst_ratio) = find_worst_blocker(&inst, &committee, EnumerationBound::AllCommittees)?;
        rows.push(RoundingRow {
            seed,
            kind,
            m,
            n,
            k,
            committee: committee.to_string(),
            weight: crate::model::committee_weight(&inst, &committee)?,
            rounds: trace.rounds.len(),
            provider_c: trace.provider_c,
            worst_ratio,
            theoretical_bound: trace.theoretical_bound,
            within_bound: worst_ratio < trace.theoretical_bound,
        });
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(())
}

/// Runs a suite and writes its table; returns the number of rows and how
/// many of them met their bound.
pub fn run_suite<W: Write>(suite: Suite, seeds: u64, out: W) -> Result<(usize, usize)> {
    match suite {
        Suite::LowerBounds => {
            let rows = lower_bounds()?;
            write_csv(&rows, out)?;
            Ok((rows.len(), rows.iter().filter(|r| r.holds).count()))
        }
        Suite::SmallK => {
            let rows = small_k(seeds)?;
            write_csv(&rows, out)?;
            Ok((rows.len(), rows.iter().filter(|r| r.passed).count()))
        }
        Suite::Rounding => {
            let rows = rounding(seeds)?;
            write_csv(&rows, out)?;
            Ok((rows.len(), rows.iter().filter(|r| r.within_bound).count()))
        }
    }
}
