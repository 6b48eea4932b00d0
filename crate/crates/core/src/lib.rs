//! Corpus analytics for social-media health studies: post sifting,
//! lexicon-based happiness scoring, word shifts, a two-stage text classifier
//! (tf-idf logistic relevance, then a convolutional diagnostic model), and a
//! rate-capped feed simulator with sampling-proportion estimation.

pub mod cohort;
pub mod config;
pub mod convnet;
pub mod corpus;
pub mod error;
pub mod feedsim;
pub mod hedonometer;
pub mod modelfile;
pub mod relevance;
pub mod report;
pub mod sift;
pub mod synth;
pub mod wordshift;

pub use cohort::{run_cohort, CohortReport};
pub use config::PipelineConfig;
pub use convnet::{grad_check, train_cnn, CnnHyper, CnnModel, Diagnosis, DiagnosisPrediction};
pub use corpus::{freq_dist, ingest, load_lexicon, tokenize, FreqDist, Lexicon, LexiconFormat, Post};
pub use error::{Error, Result};
pub use feedsim::{consume, estimate_sampling, FeedServer, LimitNotice, ServerConfig, StreamStats};
pub use hedonometer::{hashtag_table, score, timeseries, Bin, HappinessScore, HashtagSort, HashtagTable, Lens};
pub use relevance::{train_logistic, Label, LabeledExample, LogisticHyper, Ratio, RelevancePrediction, TfIdfLogisticModel};
pub use sift::{apply_filters, FilterConfig, FilterReport};
pub use wordshift::{shift, WordShift};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
