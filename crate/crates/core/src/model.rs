//! Instances, committees, lotteries and the committee weight function.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preferences::PreferenceModel;

/// Tolerance used for every weight-limit and probability-sum comparison.
pub const TOL: f64 = 1e-9;

/// Index of a candidate, in `[0, m)`.
pub type CandidateId = u32;

/// A set of candidates, kept sorted and duplicate-free so that equality,
/// ordering and hashing are canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Committee(Vec<CandidateId>);

impl Committee {
    pub fn new<I: IntoIterator<Item = CandidateId>>(members: I) -> Self {
        let mut v: Vec<CandidateId> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Committee(v)
    }

    pub fn empty() -> Self {
        Committee(Vec::new())
    }

    /// Caller guarantees `members` is strictly increasing.
    pub(crate) fn from_sorted(members: Vec<CandidateId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Committee(members)
    }

    pub fn members(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn is_subset(&self, other: &Committee) -> bool {
        self.0.iter().all(|c| other.contains(*c))
    }

    pub fn union(&self, other: &Committee) -> Committee {
        Committee::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// All members lie in `[0, m)`.
    pub fn check_valid(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&c| c as usize >= m) {
            Some(c) => Err(Error::InvalidCommittee(format!(
                "candidate {c} out of range for m = {m}"
            ))),
            None => Ok(()),
        }
    }
}

impl<'de> Deserialize<'de> for Committee {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<CandidateId>::deserialize(d)?;
        Ok(Committee::new(v))
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// How candidate weights are specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum WeightSpec {
    Additive {
        s: Vec<f64>,
    },
    /// `w[j][i]` is the weight of candidate `i` on resource `j`; `limits[j]`
    /// bounds resource `j`.
    Multi {
        w: Vec<Vec<f64>>,
        limits: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn unit(m: usize) -> Self {
        WeightSpec::Additive { s: vec![1.0; m] }
    }
}

/// Single weight function seen by the solvers. Multi-resource weights are
/// rescaled so every resource shares the limit `K`, and a committee's
/// weight is the maximum over resources.
#[derive(Debug, Clone, PartialEq)]
enum WeightFn {
    Additive(Vec<f64>),
    MaxOf(Vec<Vec<f64>>),
}

impl WeightFn {
    fn build(spec: &WeightSpec, k: f64) -> Self {
        match spec {
            WeightSpec::Additive { s } => WeightFn::Additive(s.clone()),
            WeightSpec::Multi { w, limits } => WeightFn::MaxOf(
                w.iter()
                    .zip(limits)
                    .map(|(row, &lim)| row.iter().map(|x| x * k / lim).collect())
                    .collect(),
            ),
        }
    }

    fn eval(&self, members: &[CandidateId]) -> f64 {
        match self {
            WeightFn::Additive(s) => members.iter().fold(0.0, |acc, &c| acc + s[c as usize]),
            WeightFn::MaxOf(rows) => rows
                .iter()
                .map(|row| members.iter().map(|&c| row[c as usize]).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    fn is_unit(&self) -> bool {
        matches!(self, WeightFn::Additive(s) if s.iter().all(|&x| x == 1.0))
    }
}

/// Unvalidated instance as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub weights: WeightSpec,
    pub preference: PreferenceModel,
}

/// Outcome of [`validate_instance`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&str> {
        self.violations.first().map(String::as_str)
    }
}

fn bad_number(x: f64) -> bool {
    !x.is_finite() || x < 0.0
}

/// Checks every structural invariant of an instance.
pub fn validate_instance(raw: &RawInstance) -> ValidationReport {
    let mut v = Vec::new();
    if raw.m == 0 {
        v.push("candidate count m must be at least 1".to_string());
    }
    if raw.n == 0 {
        v.push("voter count n must be at least 1".to_string());
    }
    if !(raw.k.is_finite() && raw.k > 0.0) {
        v.push(format!("weight limit K must be positive and finite, got {}", raw.k));
    }
    match &raw.weights {
        WeightSpec::Additive { s } => {
            if s.len() != raw.m {
                v.push(format!("expected {} candidate weights, got {}", raw.m, s.len()));
            }
            if s.iter().any(|&x| bad_number(x)) {
                v.push("negative candidate weight".to_string());
            }
        }
        WeightSpec::Multi { w, limits } => {
            if w.is_empty() {
                v.push("multi-constraint weights need at least one resource".to_string());
            }
            if limits.len() != w.len() {
                v.push(format!(
                    "{} resource weight vectors but {} limits",
                    w.len(),
                    limits.len()
                ));
            }
            if w.iter().any(|row| row.len() != raw.m) {
                v.push(format!("resource weight vectors must all have length m = {}", raw.m));
            }
            if w.iter().flatten().any(|&x| bad_number(x)) {
                v.push("negative candidate weight".to_string());
            }
            if limits.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
                v.push("resource limits must be positive and finite".to_string());
            }
        }
    }
    v.extend(raw.preference.violations(raw.m, raw.n));
    ValidationReport { violations: v }
}

/// A validated committee selection instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    m: usize,
    n: usize,
    k: f64,
    weights: WeightSpec,
    preference: PreferenceModel,
    weight_fn: WeightFn,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        let report = validate_instance(&raw);
        if let Some(first) = report.first() {
            return Err(Error::InvalidInstance(first.to_string()));
        }
        let weight_fn = WeightFn::build(&raw.weights, raw.k);
        Ok(Instance {
            m: raw.m,
            n: raw.n,
            k: raw.k,
            weights: raw.weights,
            preference: raw.preference,
            weight_fn,
        })
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            m: inst.m,
            n: inst.n,
            k: inst.k,
            weights: inst.weights,
            preference: inst.preference,
        }
    }
}

impl Instance {
    pub fn new(
        m: usize,
        n: usize,
        k: f64,
        weights: WeightSpec,
        preference: PreferenceModel,
    ) -> Result<Self> {
        RawInstance { m, n, k, weights, preference }.try_into()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawInstance =
            serde_json::from_str(s).map_err(|e| Error::InvalidInstance(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight limit `K`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn weights(&self) -> &WeightSpec {
        &self.weights
    }

    pub fn preference(&self) -> &PreferenceModel {
        &self.preference
    }

    /// Same instance with a different weight limit. Multi-resource limits
    /// are scaled by the same factor.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        let weights = match &self.weights {
            WeightSpec::Multi { w, limits } => WeightSpec::Multi {
                w: w.clone(),
                limits: limits.iter().map(|l| l * k / self.k).collect(),
            },
            other => other.clone(),
        };
        Instance::new(self.m, self.n, k, weights, self.preference.clone())
    }

    pub fn all_voters(&self) -> Vec<usize> {
        (0..self.n).collect()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weight_fn.is_unit()
    }

    /// Weight of a committee already known to be valid.
    pub(crate) fn weight_of(&self, s: &Committee) -> f64 {
        self.weight_fn.eval(s.members())
    }

    pub(crate) fn weight_of_members(&self, members: &[CandidateId]) -> f64 {
        self.weight_fn.eval(members)
    }

    pub fn is_feasible(&self, s: &Committee) -> bool {
        self.weight_of(s) <= self.k + TOL
    }
}

/// Weight of `s`: the additive sum, or for multi-resource instances the
/// maximum normalized per-resource sum.
pub fn committee_weight(inst: &Instance, s: &Committee) -> Result<f64> {
    s.check_valid(inst.m())?;
    Ok(inst.weight_of(s))
}

/// A finite-support distribution over distinct committees of weight at
/// most `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    limit: f64,
    support: Vec<(Committee, f64)>,
}

#[derive(Serialize, Deserialize)]
struct SupportEntry {
    committee: Committee,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
struct LotteryJson {
    #[serde(rename = "K")]
    k: f64,
    support: Vec<SupportEntry>,
}

impl Serialize for Lottery {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LotteryJson {
            k: self.limit,
            support: self
                .support
                .iter()
                .map(|(c, p)| SupportEntry { committee: c.clone(), prob: *p })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lottery {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LotteryJson::deserialize(d)?;
        Lottery::new(raw.k, raw.support.into_iter().map(|e| (e.committee, e.prob)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl Lottery {
    /// Checked constructor: positive probabilities summing to one, distinct
    /// committees, positive limit.
    pub fn new(limit: f64, support: Vec<(Committee, f64)>) -> Result<Self> {
        if !(limit.is_finite() && limit > 0.0) {
            return Err(Error::InvalidLottery(format!("limit must be positive, got {limit}")));
        }
        if support.is_empty() {
            return Err(Error::InvalidLottery("empty support".into()));
        }
        if let Some((c, p)) = support.iter().find(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidLottery(format!("probability {p} of {c} is not positive")));
        }
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidLottery(format!("probabilities sum to {total}, not 1")));
        }
        let mut seen: Vec<&Committee> = support.iter().map(|(c, _)| c).collect();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidLottery("duplicate committee in support".into()));
        }
        Ok(Lottery { limit, support })
    }

    /// Builds a lottery from nonnegative masses: duplicates are merged, zero
    /// masses dropped and the rest normalized. Support is sorted by committee.
    pub fn from_weights<I>(limit: f64, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Committee, f64)>,
    {
        let mut merged: BTreeMap<Committee, f64> = BTreeMap::new();
        for (c, w) in items {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidLottery(format!("mass {w} of {c} is not valid")));
            }
            if w > 0.0 {
                *merged.entry(c).or_insert(0.0) += w;
            }
        }
        let total: f64 = merged.values().sum();
        if total <= 0.0 {
            return Err(Error::InvalidLottery("no positive mass".into()));
        }
        Lottery::new(limit, merged.into_iter().map(|(c, w)| (c, w / total)).collect())
    }

    pub fn point_mass(limit: f64, s: Committee) -> Result<Self> {
        Lottery::new(limit, vec![(s, 1.0)])
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn support(&self) -> &[(Committee, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Every support committee is valid for `inst` and weighs at most the
    /// lottery limit.
    pub fn check_feasible(&self, inst: &Instance) -> Result<()> {
        for (c, _) in &self.support {
            c.check_valid(inst.m())?;
            let w = inst.weight_of(c);
            if w > self.limit + TOL {
                return Err(Error::InfeasibleLottery {
                    committee: c.clone(),
                    weight: w,
                    limit: self.limit,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("lottery serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: LotteryJson = serde_json::from_str(s).map_err(|e| Error::InvalidLottery(e.to_string()))?;
        Lottery::new(raw.k, raw.support.into_iter().map(|e| (e.committee, e.prob)).collect())
    }
}
