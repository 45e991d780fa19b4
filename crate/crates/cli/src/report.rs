//! JSON report shapes. Field order is the serialization order, which keeps
//! reports byte-stable for fixed inputs; anything that can vary between
//! runs (timings) is opt-in and absent by default.

use std::collections::BTreeMap;

use propp_core::suites::SuiteOutcome;
use propp_core::verdicts::FmVerdict;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Echo {
    /// canonical presentation text; parsing it back gives the same group
    pub presentation: String,
    pub sigma: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureBlock {
    pub order: u64,
    pub d: usize,
    pub d_plus: Option<usize>,
    pub d_minus: Option<usize>,
    pub powerful: bool,
    pub layer_ranks: Vec<usize>,
    pub abelian: bool,
    pub exponent: u64,
    pub frattini_order: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologyBlock {
    pub h1: usize,
    pub h1_plus: Option<usize>,
    pub h1_minus: Option<usize>,
    pub h2: usize,
    pub h2_plus: Option<usize>,
    pub h2_minus: Option<usize>,
    pub p_h2_qpzp: usize,
    pub p_h2_qpzp_plus: Option<usize>,
    pub p_h2_qpzp_minus: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetaBlock {
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_table: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsonReport {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echo: Option<Echo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<CohomologyBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<FmVerdict>,
    pub meta: MetaBlock,
}

impl JsonReport {
    pub fn new(command: &str, meta: MetaBlock) -> Self {
        JsonReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            echo: None,
            structure: None,
            cohomology: None,
            suite: None,
            verdict: None,
            meta,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
