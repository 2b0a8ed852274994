//! Treatment choice under partial identification with a two-point robust
//! Bayes prior class.
//!
//! A policy maker observes a Gaussian signal `Y ~ N(μ, Σ)` and must choose a
//! treatment probability in `[0, 1]`. The welfare contrast of treating is only
//! partially identified: each reduced-form mean `μ` pins it down to an
//! interval `[lower(μ), upper(μ)]`. Priors place equal mass on two symmetric
//! locations `±μ̄` and are otherwise unrestricted over the interval, and rules
//! are ranked by expected regret.
//!
//! The crate computes, verifies, and compares the two classic robust Bayes
//! solutions for this problem:
//!
//! - the ex-ante minimax-regret rule set ([`mmr::solve_mmr`]), including every
//!   named closed-form rule family, the optimal threshold pair, purified
//!   threshold rules in higher dimensions, and the least favorable prior;
//! - the ex-post posterior-regret rule ([`per::solve_per`]), with and without
//!   randomization, and the agreement classification between the two
//!   criteria.
//!
//! Every closed form is cross-checked against brute-force oracles
//! ([`oracle`]): a discretized minimax search over tabulated rules, a grid
//! search for the posterior problem, Monte Carlo acceptance probabilities,
//! and profiled-regret dominance scans.

pub mod error;
pub mod gauss;
pub mod linalg;
pub mod model;
pub mod mmr;
pub mod oracle;
pub mod per;
pub mod regret;
pub mod rules;

pub use error::{Error, Result};
pub use gauss::Probability;
pub use linalg::SpdMatrix;
pub use model::{
    classify_regime, efficient_index, make_evidence_aggregation, make_stoye, normalize,
    EfficientIndex, IdentifiedBounds, ModelConfig, ProblemSpec, Regime, RegimeTag, SiteConfig,
};
pub use mmr::{solve_mmr, MmrSolution};
pub use per::{classify_agreement, solve_per, AgreementReport, PerSolution};
pub use regret::GammaPrior;
pub use rules::{AcceptanceProbability, DecisionRule};
