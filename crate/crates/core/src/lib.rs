//! Two-stage job title classification.
//!
//! Stage one discovers title clusters: a truncated SVD of the tf-idf
//! term-document matrix induces label phrases from the left-singular
//! vectors and documents join clusters by cosine threshold. The clusters
//! become meta-documents for an inverted-index k-NN classifier. Stage two
//! routes documents through a linear L2-SVM over the two-digit SOC major
//! groups to per-group vertical k-NN classifiers.
//!
//! The numeric core is generic over the scalar type (`f32` or `f64`, see
//! [`Scalar`]); the CLI and the persisted model formats use the `f64`
//! aliases exported at the crate root.

pub mod cascade;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod linear_svm;
pub mod persist;
pub mod proximity_knn;
pub mod scalar;
pub mod textprep;
pub mod title_cluster;
pub mod vectorspace;

pub use config::Config;
pub use corpus::{load_jsonl, Document, DocumentSet, SocCode};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use textprep::{StopList, TextPipeline};

/// `f64` specializations used by the CLI and the on-disk model formats.
pub type SparseVec = vectorspace::SparseVector<f64>;
pub type TfIdf = vectorspace::TfIdfModel<f64>;
pub type Svd = title_cluster::SvdResult<f64>;
pub type Clusters = title_cluster::ClusterSet<f64>;
pub type TitleIndex = proximity_knn::ProximityIndex<f64>;
pub type SvmModel = linear_svm::LinearModel<f64>;
pub type Cascade = cascade::CascadeModel<f64>;
pub type Prediction = cascade::CascadePrediction<f64>;
