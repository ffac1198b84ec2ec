//! Correlation-tensor entanglement detection for multipartite qudit states.
//!
//! States are [`DensityMatrix`] values with per-party dimensions. Their
//! correlation tensors in normalized Gell-Mann bases are matricized across
//! bipartitions, and the Correlation Minor Norm of each matricization is
//! compared against closed-form separability bounds.

pub mod audit;
pub mod basis;
pub mod bounds;
pub mod cmn;
pub mod detect;
pub mod discord;
pub mod error;
pub mod linalg;
pub mod normal_form;
pub mod report;
pub mod tensor;
pub mod zoo;

pub use basis::{normalized_generalized_gell_mann, OperatorBasis};
pub use bounds::Verdict;
pub use cmn::{cmn, CmnParams, SchattenP};
pub use detect::{detect, BoundReport, Criterion, DetectConfig, DetectionVerdict};
pub use discord::{bipartite_discord_cmn, global_discord_cmn, DiscordResult, OptimizerCfg, Side};
pub use error::{Error, Result};
pub use linalg::{BlochVector, CMatrix, DensityMatrix, PureState, RMatrix, C64};
pub use tensor::{Bipartition, CorrelationTensor, RealTensor};
