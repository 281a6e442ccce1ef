//! Aspect-controllable opinion summarization.
//!
//! * [`corpus`]: review corpora, segmentation, seed words and silver labels
//! * [`encoder`]: frozen token encodings
//! * [`mil`]: the controller induction model and its training
//! * [`synthesis`]: pseudo-summary sampling, aspect controllers and the
//!   synthetic training set
//! * [`summarizer`]: controller-driven extractive summaries and baselines
//! * [`eval`]: ROUGE, aspect F1, planted corpora and ablations

pub mod corpus;
pub mod encoder;
pub mod mil;
pub mod synthesis;
pub mod summarizer;
pub mod eval;
