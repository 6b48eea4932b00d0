use std::collections::BTreeSet;
use std::sync::OnceLock;

use hedonic_core::cohort::run_cohort;
use hedonic_core::convnet::{train_cnn, CnnHyper};
use hedonic_core::relevance::{train_logistic, LogisticHyper, TfIdfLogisticModel};
use hedonic_core::sift::{apply_filters, FilterConfig};
use hedonic_core::synth::{cohort_corpus, marker_corpus, separable_corpus};
use hedonic_core::CnnModel;

fn train_models() -> (TfIdfLogisticModel, CnnModel) {
    let hyper = LogisticHyper {
        lr: 2.0,
        epochs: 5000,
        l2_lambda: 1e-5,
        ..LogisticHyper::default()
    };
    let (rel, _) = train_logistic(&separable_corpus(2000, 21), &hyper).unwrap();
    let (cnn, _) = train_cnn(
        &marker_corpus(1000, 22),
        &CnnHyper {
            seed: 22,
            ..CnnHyper::default()
        },
    )
    .unwrap();
    (rel, cnn)
}

fn models() -> &'static (TfIdfLogisticModel, CnnModel) {
    static MODELS: OnceLock<(TfIdfLogisticModel, CnnModel)> = OnceLock::new();
    MODELS.get_or_init(train_models)
}

#[test]
fn funnel_equals_planted_counts() {
    let (rel, cnn) = models();
    let plant = cohort_corpus(1_500, 300, 23);
    let cfg = FilterConfig::default();
    let (cohort, report) = run_cohort(&plant.posts, &cfg, rel, cnn);

    assert_eq!(report.input(), 1_500);
    assert_eq!(report.sifted(), plant.sifted());
    assert_eq!(report.relevant, plant.relevant());
    assert_eq!(report.diagnostic, plant.diagnostic());
    assert_eq!(report.users, plant.cohort());

    let (sifted, _) = apply_filters(&plant.posts, &cfg);
    let sifted_ids: BTreeSet<&str> = sifted.iter().map(|p| p.id.as_str()).collect();
    assert!(cohort.iter().all(|p| sifted_ids.contains(p.id.as_str())));
}

#[test]
fn no_relevant_posts_gives_empty_cohort() {
    let (rel, cnn) = models();
    let plant = cohort_corpus(400, 50, 24);
    let unrelated: Vec<_> = plant
        .posts
        .iter()
        .zip(&plant.kinds)
        .filter(|(_, k)| **k == hedonic_core::synth::PlantKind::Unrelated)
        .map(|(p, _)| p.clone())
        .collect();
    let (cohort, report) = run_cohort(&unrelated, &FilterConfig::default(), rel, cnn);
    assert!(cohort.is_empty());
    assert_eq!((report.relevant, report.diagnostic, report.users.len()), (0, 0, 0));
}

#[test]
fn all_diagnostic_input_keeps_every_author() {
    let (rel, cnn) = models();
    let plant = cohort_corpus(400, 50, 25);
    let diagnostic: Vec<_> = plant
        .posts
        .iter()
        .zip(&plant.kinds)
        .filter(|(_, k)| **k == hedonic_core::synth::PlantKind::Diagnostic)
        .map(|(p, _)| p.clone())
        .collect();
    let authors: BTreeSet<&str> = diagnostic.iter().map(|p| p.user_id.as_str()).collect();
    let (cohort, report) = run_cohort(&diagnostic, &FilterConfig::default(), rel, cnn);
    assert_eq!(cohort.len(), diagnostic.len());
    assert_eq!(report.users.keys().map(String::as_str).collect::<BTreeSet<_>>(), authors);
}

