use serde::Serialize;

use crate::lab::{Table1Report, Verdict};
use crate::ucalc::EquivalenceReport;

#[derive(Serialize)]
pub struct ProbeReport {
    pub command: &'static str,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
}

#[derive(Serialize)]
pub struct Table1Json {
    pub command: &'static str,
    pub seed: u64,
    #[serde(flatten)]
    pub table: Table1Report,
}

#[derive(Serialize)]
pub struct TranslateItem {
    pub source: String,
    pub translation: String,
    pub certification: EquivalenceReport,
}

#[derive(Serialize)]
pub struct TranslateReport {
    pub command: &'static str,
    pub seed: u64,
    pub vars: Vec<String>,
    pub team_vars: Vec<String>,
    pub items: Vec<TranslateItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disjunction: Option<DisjunctionItem>,
}

#[derive(Serialize)]
pub struct DisjunctionItem {
    pub dependency: String,
    pub translation: String,
    pub certification: EquivalenceReport,
}

#[derive(Serialize)]
pub struct RelativizeReport {
    pub command: &'static str,
    pub seed: u64,
    pub dependency: String,
    pub predicate: String,
    pub formula: String,
    pub certification: EquivalenceReport,
}

#[derive(Serialize)]
pub struct NonjumpingReport {
    pub command: &'static str,
    pub seed: u64,
    pub verdict: Verdict,
}
