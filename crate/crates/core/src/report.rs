//! JSON report emitted by the command-line tool.
//!
//! All numbers that come out of the solver are strings: `p/q` for exact
//! rationals, shortest round-trip decimals for floats. Per-user maps are keyed
//! by user id and serialize in increasing id order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::omniscience::{GameContext, Partition};
use crate::rate::RateVector;
use crate::source_model::UserSet;
use crate::value::Value;

/// User id → encoded value.
pub type RateRecord = BTreeMap<u32, String>;

pub fn rate_record<T: Value>(users: &UserSet, r: &RateVector<T>) -> RateRecord {
    r.iter().map(|(i, v)| (users.id(i), v.encode())).collect()
}

pub fn partition_ids(users: &UserSet, p: &Partition) -> Vec<Vec<u32>> {
    p.blocks().iter().map(|&b| users.ids_of(b)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(rename = "R_CO")]
    pub r_co: String,
    pub fundamental_partition: Vec<Vec<u32>>,
    #[serde(rename = "I")]
    pub shared_randomness: String,
    #[serde(rename = "H_V")]
    pub total_entropy: String,
    pub vertex: RateRecord,
}

impl Solution {
    pub fn from_context<T: Value>(ctx: &GameContext<T>) -> Self {
        let users = ctx.users();
        Solution {
            r_co: ctx.r_co().encode(),
            fundamental_partition: partition_ids(users, ctx.partition()),
            shared_randomness: ctx.shared_randomness().encode(),
            total_entropy: ctx.total_entropy().encode(),
            vertex: rate_record(users, ctx.vertex()),
        }
    }
}

/// One steepest-descent iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `(increase, decrease)` user ids of the step leading here.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exchange: Option<(u32, u32)>,
    pub rates: RateRecord,
    pub objective: String,
    /// `ℓ1` distance to the final iterate.
    pub distance_to_end: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub default_k: bool,
    pub locally_optimal: bool,
    pub left_core: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// A fair allocation with how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fairness {
    pub method: String,
    pub mode: String,
    pub rates: RateRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub permutations: Option<usize>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Vec<Diagnostics>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEntry>>,
}

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "minimal_K")]
    pub minimal_k: u64,
    pub chunks: BTreeMap<u32, i128>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: serde_json::Value,
    pub solution: Solution,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fairness: Option<Fairness>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub verification: Vec<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split_plan: Option<SplitRecord>,
    pub timings: Timings,
}

/// Error record written when a run fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}
