//! Ex-post solver: rules that minimize worst-case posterior expected regret
//! at every data realization, with and without randomization, and the
//! agreement classification between the ex-ante and ex-post criteria.

use crate::error::Result;
use crate::model::{classify_regime, efficient_index, ProblemSpec, RegimeTag};
use crate::mmr::{verify_moment_conditions, TOL_CLOSED_FORM};
use crate::rules::DecisionRule;
use serde::Serialize;

pub const LABEL_PER: &str = "d_per";
pub const LABEL_PER_NONRANDOMIZED: &str = "d_per_nonrandomized";

/// Output of [`solve_per`].
///
/// When the sign of the welfare contrast is ambiguous at the prior location
/// (`lower < 0 < upper`), the unique optimum randomizes: it plays
/// `-lower/(upper-lower)` on a negative index and `upper/(upper-lower)`
/// otherwise. Without that ambiguity — and always, once randomization is
/// forbidden — the zero threshold on the efficient index is optimal.
#[derive(Clone, Debug, Serialize)]
pub struct PerSolution {
    pub randomized_rule: DecisionRule,
    pub nonrandomized_rule: DecisionRule,
    pub ambiguous_sign: bool,
}

/// Whether the ex-ante and ex-post optima coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    /// Rules coincide when randomization is allowed: requires the welfare
    /// contrast to have known sign at the prior location (`lower ≥ 0`).
    pub with_randomization: bool,
    /// Rules coincide when actions are restricted to `{0, 1}`: the strictly
    /// weaker strong-identification condition `ratio ≥ Φ(‖w‖)`.
    pub without_randomization: bool,
}

pub fn solve_per(spec: &ProblemSpec) -> Result<PerSolution> {
    let idx = efficient_index(spec)?;
    let bounds = spec.bounds_at_mu_bar()?;
    let threshold = DecisionRule::threshold(idx.w.clone(), 0.0)?;
    let ambiguous_sign = bounds.lower < 0.0 && bounds.upper > 0.0;
    let randomized_rule = if ambiguous_sign {
        let width = bounds.width();
        DecisionRule::two_step(idx.w, -bounds.lower / width, bounds.upper / width)?
    } else {
        threshold.clone()
    };
    Ok(PerSolution {
        randomized_rule,
        nonrandomized_rule: threshold,
        ambiguous_sign,
    })
}

/// Closed-form agreement conditions.
pub fn classify_agreement(spec: &ProblemSpec) -> Result<AgreementReport> {
    let bounds = spec.bounds_at_mu_bar()?;
    let regime = classify_regime(spec)?;
    Ok(AgreementReport {
        with_randomization: bounds.lower >= 0.0,
        without_randomization: regime.ratio >= regime.phi_norm,
    })
}

/// Agreement decided by comparing the solvers' rules rather than the
/// closed-form conditions: the ex-post rule agrees with the ex-ante optimum
/// set when it is a member of that set. Under strong identification the set
/// is the single zero-threshold rule; under weak identification membership
/// is exactly the acceptance-condition certificate.
pub fn agreement_by_rule_identity(spec: &ProblemSpec) -> Result<AgreementReport> {
    let regime = classify_regime(spec)?;
    let per = solve_per(spec)?;
    let report = match regime.tag {
        // the unique ex-ante optimum is the zero threshold, which is also the
        // ex-post nonrandomized rule; the randomized ex-post rule matches it
        // exactly when it does not randomize
        RegimeTag::CaseI => AgreementReport {
            with_randomization: per.randomized_rule == per.nonrandomized_rule,
            without_randomization: true,
        },
        RegimeTag::CaseII => AgreementReport {
            with_randomization: verify_moment_conditions(
                &per.randomized_rule,
                spec,
                TOL_CLOSED_FORM,
            )?
            .pass,
            without_randomization: verify_moment_conditions(
                &per.nonrandomized_rule,
                spec,
                TOL_CLOSED_FORM,
            )?
            .pass,
        },
    };
    Ok(report)
}
