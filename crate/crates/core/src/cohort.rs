//! Two-stage funnel: sift, keep relevant posts, keep diagnostic posts.

use std::collections::BTreeMap;

use crate::convnet::{CnnModel, Diagnosis};
use crate::corpus::Post;
use crate::relevance::{Label, TfIdfLogisticModel};
use crate::sift::{apply_filters, FilterConfig, FilterReport};

#[derive(Debug, Clone, PartialEq)]
pub struct CohortReport {
    pub sift: FilterReport,
    pub relevant: usize,
    pub diagnostic: usize,
    /// Diagnostic post count per author.
    pub users: BTreeMap<String, usize>,
}

impl CohortReport {
    pub fn input(&self) -> usize {
        self.sift.input_count
    }

    pub fn sifted(&self) -> usize {
        self.sift.kept_count
    }
}

/// Returns the diagnostic posts in input order, with the funnel counts.
pub fn run_cohort(
    posts: &[Post],
    filter: &FilterConfig,
    relevance: &TfIdfLogisticModel,
    diagnosis: &CnnModel,
) -> (Vec<Post>, CohortReport) {
    let (kept, sift) = apply_filters(posts, filter);
    let relevant: Vec<Post> = kept
        .into_iter()
        .filter(|p| relevance.predict_tokens(p.tokens()).label == Label::Relevant)
        .collect();
    let n_relevant = relevant.len();
    let diagnostic: Vec<Post> = relevant
        .into_iter()
        .filter(|p| diagnosis.predict_tokens(p.tokens()).label == Diagnosis::Diagnostic)
        .collect();
    let mut users = BTreeMap::new();
    for p in &diagnostic {
        *users.entry(p.user_id.clone()).or_default() += 1;
    }
    let report = CohortReport {
        sift,
        relevant: n_relevant,
        diagnostic: diagnostic.len(),
        users,
    };
    (diagnostic, report)
}
