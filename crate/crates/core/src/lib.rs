//! Marginal contribution feature importance (MCI) toolkit.
//!
//! A feature's MCI score is the largest marginal contribution it makes to
//! any context of other features, I(f) = max over S of ν(S∪{f}) − ν(S), the
//! unique score satisfying the marginal-contribution, elimination and
//! minimalism axioms. This crate provides:
//!
//! - evaluation functions ν backed by explicit tables, plug-in mutual
//!   information over discrete datasets, or an external oracle process, with
//!   elimination/duplication transforms, monotone closure and diagnostics
//!   ([`valuation`]);
//! - exact, size-bounded, branch-and-bound and permutation-sampled MCI with
//!   per-feature context sets ([`mci`]);
//! - Shapley (exact and sampled), ablation and bivariate baselines
//!   ([`baselines`]);
//! - ranking construction, NDCG, minimizing Kendall distance and the
//!   duplication-robustness harness ([`metrics`]);
//! - the PAC sample-size calculator and its deterministic stability
//!   inequality ([`pac`]).
//!
//! All scoring is deterministic: sampled estimators derive permutation `j`
//! from `(seed, j)` and reductions run in fixed order, so results are
//! bit-identical across thread counts.

pub mod baselines;
pub mod error;
pub mod feature_set;
mod kahan;
pub mod mci;
pub mod metrics;
pub mod pac;
pub mod permutation;
pub mod scores;
pub mod valuation;

pub use error::{Error, Result};
pub use feature_set::{FeatureSet, MAX_FEATURES};
pub use permutation::{PermutationPlan, DEFAULT_PERMUTATION_COUNT};
pub use scores::{BoundKind, ImportanceScores, Method, MethodSpec};
pub use valuation::{
    check_valuation, BinningMode, BinningSpec, CheckOptions, CheckReport, Dataset, Valuation,
    ValuationTable, CHECK_CAP, ENUMERATION_CAP,
};

pub use baselines::{ablation, bivariate, shapley_exact, shapley_sampled};
pub use mci::{mci_branch_and_bound, mci_exact, mci_k_bounded, mci_sampled};
pub use metrics::{mkd, ndcg_at_k, rank, robustness_harness, Ranking, RobustnessReport};
pub use pac::{mci_stability_check, sample_size, valuation_deviation_bound, PacParameters};
