//! Budget-constrained active learning for regression surrogates.
//!
//! This crate trains a *student* network as a cheap surrogate for an
//! expensive simulator and a small *teacher* classifier that predicts
//! where the student currently fails. The teacher guides each iteration's
//! batch of simulator evaluations through one of four query strategies:
//! uniform random, top-B by failure probability, diversity-batched
//! clustering (DBAL), or the epsilon-weighted hybrid strategy that spends
//! an epsilon fraction of the batch inside the predicted-failure region
//! and the rest on uniform exploration.
//!
//! A full benchmark is one call:
//!
//! ```
//! use epshqs::config::ExperimentConfig;
//! use epshqs::harness::run_experiment;
//!
//! let toml = r#"
//!     strategies = ["random", "eps_hqs:0.5"]
//!     seeds = [1]
//!     test_set_size = 100
//!     output_dir = "target/book-demo"
//!
//!     [oracle]
//!     kind = "styblinski_tang"
//!     dim = 2
//!
//!     [loop]
//!     iterations = 2
//!     batch_size = 5
//!     proposal_size = 50
//!     seed = 7
//!
//!     [student]
//!     hidden = [8]
//!     epochs_initial = 5
//!     epochs_warm = 3
//!
//!     [teacher]
//!     hidden = [4]
//!     epochs_initial = 5
//!     epochs_warm = 3
//! "#;
//! let cfg = ExperimentConfig::from_toml_str(toml).unwrap();
//! let outcome = run_experiment(&cfg, 1, None).unwrap();
//! assert_eq!(outcome.curves.len(), 2);
//! assert_eq!(outcome.curves[0].rows.len(), 2);
//! ```
//!
//! Lower-level pieces (design spaces, the MLP, the strategies, the loop)
//! are usable on their own; see the module docs and the book under
//! `book/`.

pub mod al_loop;
pub mod config;
pub mod design_space;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod oracle;
pub mod strategies;

pub use error::{Error, Result};
