//! Takeover-outcome prediction pipeline.
//!
//! The crate covers the whole path from raw deal records to evaluated
//! classifiers:
//!
//! * [`dataset`]: deal records, CSV I/O, temporal splits and a synthetic deal generator.
//! * [`impute`]: k-nearest-neighbour imputation with partial distances.
//! * [`reduce`]: one-hot encoding, PCA on numeric features and MCA on indicators.
//! * [`resample`]: SMOTE oversampling of the minority class.
//! * [`neural`]: dense and LSTM layers with hand-written backpropagation, the four
//!   classification losses, Adam, and an LSTM sequence autoencoder.
//! * [`metrics`]: confusion matrices, threshold metrics, ROC and PR curves.
//! * [`pipeline`]: the three classification frameworks, logit baselines and
//!   seeded hyperparameter search.

pub mod dataset;
pub mod impute;
pub mod linalg;
pub mod metrics;
pub mod neural;
pub mod pipeline;
pub mod reduce;
pub mod resample;
pub mod rng;

pub use dataset::{DatasetSchema, DealRecord};
