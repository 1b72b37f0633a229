//! Importance-score containers, method identifiers and their JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::permutation::PermutationPlan;
use crate::valuation::Valuation;

/// Scoring methods the toolkit implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MciExact,
    MciK,
    MciBnb,
    MciSampled,
    ShapleyExact,
    ShapleySampled,
    Ablation,
    Bivariate,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MciExact => "mci-exact",
            Method::MciK => "mci-k",
            Method::MciBnb => "mci-bnb",
            Method::MciSampled => "mci-sampled",
            Method::ShapleyExact => "shapley-exact",
            Method::ShapleySampled => "shapley-sampled",
            Method::Ablation => "ablation",
            Method::Bivariate => "bivariate",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mci-exact" => Ok(Method::MciExact),
            "mci-k" => Ok(Method::MciK),
            "mci-bnb" => Ok(Method::MciBnb),
            "mci-sampled" => Ok(Method::MciSampled),
            "shapley-exact" => Ok(Method::ShapleyExact),
            "shapley-sampled" => Ok(Method::ShapleySampled),
            "ablation" => Ok(Method::Ablation),
            "bivariate" => Ok(Method::Bivariate),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// What the reported scores guarantee relative to the method's true value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Scores are the exact quantity.
    Exact,
    /// Scores never exceed the exact quantity.
    Lower,
    /// Scores are lower bounds and `intervals` bracket the exact quantity.
    Interval,
    /// Scores are an unbiased estimate with no deterministic bracket.
    Estimate,
}

/// Per-feature importance scores from one method.
#[derive(Clone, Debug)]
pub struct ImportanceScores {
    pub method: Method,
    pub bound_kind: BoundKind,
    pub scores: Vec<f64>,
    /// For MCI methods, the context set attaining each reported score.
    pub contexts: Option<Vec<FeatureSet>>,
    /// For branch and bound, per-feature (lower, upper) brackets.
    pub intervals: Option<Vec<(f64, f64)>>,
    /// Distinct subsets newly evaluated while computing these scores.
    pub valuation_calls: u64,
    /// Seed of the permutation plan, for sampled methods.
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ScoresFile {
    method: Method,
    bound_kind: BoundKind,
    scores: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contexts: Option<Vec<Option<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals: Option<Vec<[f64; 2]>>,
    valuation_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl ImportanceScores {
    pub fn n(&self) -> usize {
        self.scores.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = ScoresFile {
            method: self.method,
            bound_kind: self.bound_kind,
            scores: self.scores.clone(),
            contexts: self
                .contexts
                .as_ref()
                .map(|cs| cs.iter().map(|c| Some(c.key())).collect()),
            intervals: self
                .intervals
                .as_ref()
                .map(|is| is.iter().map(|&(lo, hi)| [lo, hi]).collect()),
            valuation_calls: self.valuation_calls,
            seed: self.seed,
        };
        serde_json::to_value(file).expect("scores serialize")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("scores serialize")
    }
}

/// A method together with the parameters it needs to run.
#[derive(Clone, Debug, PartialEq)]
pub enum MethodSpec {
    MciExact,
    MciK { k: usize },
    MciBnb { tolerance: f64 },
    MciSampled { seed: u64, count: usize },
    ShapleyExact,
    ShapleySampled { seed: u64, count: usize },
    Ablation,
    Bivariate,
}

impl MethodSpec {
    pub fn method(&self) -> Method {
        match self {
            MethodSpec::MciExact => Method::MciExact,
            MethodSpec::MciK { .. } => Method::MciK,
            MethodSpec::MciBnb { .. } => Method::MciBnb,
            MethodSpec::MciSampled { .. } => Method::MciSampled,
            MethodSpec::ShapleyExact => Method::ShapleyExact,
            MethodSpec::ShapleySampled { .. } => Method::ShapleySampled,
            MethodSpec::Ablation => Method::Ablation,
            MethodSpec::Bivariate => Method::Bivariate,
        }
    }

    /// Runs the method on `v`, constructing the permutation plan for the
    /// valuation's own feature count so that runs on transformed valuations
    /// stay seed-paired.
    pub fn score(&self, v: &Valuation) -> Result<ImportanceScores> {
        match self {
            MethodSpec::MciExact => crate::mci::mci_exact(v),
            MethodSpec::MciK { k } => crate::mci::mci_k_bounded(v, *k),
            MethodSpec::MciBnb { tolerance } => crate::mci::mci_branch_and_bound(v, *tolerance),
            MethodSpec::MciSampled { seed, count } => {
                let plan = PermutationPlan::seeded(*seed, *count, v.n());
                crate::mci::mci_sampled(v, &plan)
            }
            MethodSpec::ShapleyExact => crate::baselines::shapley_exact(v),
            MethodSpec::ShapleySampled { seed, count } => {
                let plan = PermutationPlan::seeded(*seed, *count, v.n());
                crate::baselines::shapley_sampled(v, &plan)
            }
            MethodSpec::Ablation => crate::baselines::ablation(v),
            MethodSpec::Bivariate => crate::baselines::bivariate(v),
        }
    }
}
