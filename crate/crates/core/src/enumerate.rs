//! Exhaustive committee enumeration in a fixed order: ascending size, then
//! lexicographic within a size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateId, Committee, Instance, TOL};

/// Largest `m` accepted for enumeration over all committees.
pub const MAX_ALL_CANDIDATES: usize = 25;

/// Hard cap on the number of committees any single enumeration produces.
pub const MAX_ENUMERATED: u64 = 40_000_000;

/// Which deviating committees a stability check considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationBound {
    AllCommittees,
    /// Committees with at most `L` members.
    UpToSize(usize),
}

impl EnumerationBound {
    pub fn max_size(self, m: usize) -> usize {
        match self {
            EnumerationBound::AllCommittees => m,
            EnumerationBound::UpToSize(l) => l.min(m),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundJson {
    Tag(String),
    Size {
        #[serde(rename = "L")]
        l: usize,
    },
}

impl Serialize for EnumerationBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            EnumerationBound::AllCommittees => BoundJson::Tag("all".into()),
            EnumerationBound::UpToSize(l) => BoundJson::Size { l },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnumerationBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match BoundJson::deserialize(d)? {
            BoundJson::Tag(t) if t == "all" => Ok(EnumerationBound::AllCommittees),
            BoundJson::Tag(t) => Err(serde::de::Error::custom(format!("unknown bound {t:?}"))),
            BoundJson::Size { l } => Ok(EnumerationBound::UpToSize(l)),
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of nonempty committees with at most `l` members.
pub fn count_up_to(m: usize, l: usize) -> u64 {
    (1..=l.min(m) as u64).fold(0u64, |acc, k| acc.saturating_add(binomial(m as u64, k)))
}

fn check_bound(m: usize, bound: EnumerationBound) -> Result<usize> {
    if let EnumerationBound::UpToSize(0) = bound {
        return Err(Error::InvalidParameter("size bound L must be at least 1".into()));
    }
    if bound == EnumerationBound::AllCommittees && m > MAX_ALL_CANDIDATES {
        return Err(Error::InstanceTooLarge(format!(
            "enumerating all committees needs m <= {MAX_ALL_CANDIDATES}, got m = {m}"
        )));
    }
    let l = bound.max_size(m);
    let count = count_up_to(m, l);
    if count > MAX_ENUMERATED {
        return Err(Error::InstanceTooLarge(format!(
            "{count} committees of size <= {l} exceed the enumeration cap"
        )));
    }
    Ok(l)
}

/// Nonempty committees within `bound`.
pub fn candidate_blockers(m: usize, bound: EnumerationBound) -> Result<Vec<Committee>> {
    let l = check_bound(m, bound)?;
    let mut out = Vec::with_capacity(count_up_to(m, l) as usize);
    for size in 1..=l {
        combinations(m, size, &mut |c| {
            out.push(Committee::from_sorted(c.to_vec()));
            true
        });
    }
    Ok(out)
}

/// Calls `f` on each `size`-subset of `[0, m)` in lexicographic order.
/// `f` returning false prunes every extension of that prefix; since only
/// full-size subsets are reported this is used for monotone filters.
fn combinations(m: usize, size: usize, f: &mut dyn FnMut(&[CandidateId]) -> bool) {
    fn rec(
        start: usize,
        m: usize,
        size: usize,
        prefix: &mut Vec<CandidateId>,
        f: &mut dyn FnMut(&[CandidateId]) -> bool,
    ) {
        if prefix.len() == size {
            f(prefix);
            return;
        }
        let remaining = size - prefix.len();
        for c in start..=(m - remaining) {
            prefix.push(c as CandidateId);
            rec(c + 1, m, size, prefix, f);
            prefix.pop();
        }
    }
    if size > m {
        return;
    }
    let mut prefix = Vec::with_capacity(size);
    rec(0, m, size, &mut prefix, f);
}

/// All committees (including the empty one) of weight at most `limit` and
/// at most `max_size` members, in enumeration order.
pub fn feasible_committees(
    inst: &Instance,
    limit: f64,
    max_size: Option<usize>,
) -> Result<Vec<Committee>> {
    let m = inst.m();
    let max_size = max_size.unwrap_or(m).min(m);
    let mut out = vec![Committee::empty()];
    for size in 1..=max_size {
        let before = out.len();
        let mut prefix = Vec::with_capacity(size);
        let mut overflow = false;
        feasible_rec(inst, limit, 0, size, &mut prefix, &mut out, &mut overflow);
        if overflow {
            return Err(Error::InstanceTooLarge(format!(
                "more than {MAX_ENUMERATED} feasible committees"
            )));
        }
        if out.len() == before {
            // weight is monotone: no feasible set of this size means none larger
            break;
        }
    }
    Ok(out)
}

fn feasible_rec(
    inst: &Instance,
    limit: f64,
    start: usize,
    size: usize,
    prefix: &mut Vec<CandidateId>,
    out: &mut Vec<Committee>,
    overflow: &mut bool,
) {
    if *overflow {
        return;
    }
    if prefix.len() == size {
        out.push(Committee::from_sorted(prefix.clone()));
        if out.len() as u64 > MAX_ENUMERATED {
            *overflow = true;
        }
        return;
    }
    let m = inst.m();
    let remaining = size - prefix.len();
    for c in start..=(m - remaining) {
        prefix.push(c as CandidateId);
        if inst.weight_of_members(prefix) <= limit + TOL {
            feasible_rec(inst, limit, c + 1, size, prefix, out, overflow);
        }
        prefix.pop();
    }
}
