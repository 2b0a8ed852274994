//! Ex-ante minimax-regret solver.
//!
//! In the strong-identification regime the unique optimum is the zero
//! threshold on the efficient index and the least favorable prior is
//! two-point. Otherwise optima are exactly the rules whose acceptance
//! probabilities at `±μ̄` hit `(upper, -lower)/(upper - lower)`; this module
//! constructs the named generators of that set (probit smoothing,
//! clamped-linear, symmetric two-step, and — in higher dimensions — purified
//! zero-threshold rules), the best thresholds `±c*` in the efficient-index
//! direction, the four-point least favorable prior, and verification
//! certificates for all of them.

use crate::error::{Error, Result};
use crate::gauss::{phi_cdf, quantile_raw, std_normal_cdf_antiderivative, Probability};
use crate::linalg::dot;
use crate::model::{
    classify_regime, efficient_index, EfficientIndex, IdentifiedBounds, ProblemSpec, Regime,
    RegimeTag,
};
use crate::regret::{worst_case_bayes_regret, GammaPrior};
use crate::rules::{acceptance_probability, AcceptanceMethod, DecisionRule};
use serde::Serialize;

/// Residual tolerance for identities evaluated through closed forms.
pub const TOL_CLOSED_FORM: f64 = 1e-10;
/// Residual tolerance for identities that pass through quadrature.
pub const TOL_QUADRATURE: f64 = 1e-8;

pub const LABEL_W0: &str = "d_w0";
pub const LABEL_RT: &str = "d_rt";
pub const LABEL_LINEAR: &str = "d_linear";
pub const LABEL_STEP: &str = "d_step";
pub const LABEL_WT_PLUS: &str = "d_wt_plus";
pub const LABEL_WT_MINUS: &str = "d_wt_minus";
pub const LABEL_THRESHOLD_PLUS: &str = "d_threshold_plus";
pub const LABEL_THRESHOLD_MINUS: &str = "d_threshold_minus";

/// What a rule in the solution claims to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleClaim {
    /// Attains the minimax value over all rules.
    GammaMmrOptimal,
    /// Best among thresholds on the efficient index, but strictly worse than
    /// the minimax value.
    BestThresholdInIndex,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledRule {
    pub label: String,
    pub claim: RuleClaim,
    pub rule: DecisionRule,
}

/// Acceptance residuals against the two optimality conditions
/// `E_{μ̄}[d] = upper/(upper-lower)` and `E_{-μ̄}[d] = -lower/(upper-lower)`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentCertificate {
    pub e_plus: f64,
    pub e_minus: f64,
    pub target_plus: f64,
    pub target_minus: f64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Per-rule verification record attached to a solution.
#[derive(Clone, Debug, Serialize)]
pub struct RuleCertificate {
    pub label: String,
    pub claim: RuleClaim,
    /// Worst-case Bayes regret of the rule.
    pub worst_case: f64,
    /// Minimax value claimed by the solution.
    pub solution_value: f64,
    /// Moment-condition residuals; present for optimal rules in the
    /// weak-identification regime.
    pub moment: Option<MomentCertificate>,
    pub tol: f64,
    pub pass: bool,
}

/// Least favorable prior: two-point under strong identification (all mass on
/// the upper bound at `μ̄` and on the lower bound at `-μ̄`), four-point
/// otherwise with masses that make Nature indifferent
/// (`q·upper + (1-q)·lower = 0` at each location), so the data carry no
/// information about the welfare contrast in equilibrium.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LfpRecord {
    pub kind: LfpKind,
    pub prior: GammaPrior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LfpKind {
    TwoPoint,
    FourPoint,
}

/// Output of [`solve_mmr`].
#[derive(Clone, Debug, Serialize)]
pub struct MmrSolution {
    pub regime: Regime,
    pub value: f64,
    pub rules: Vec<LabeledRule>,
    pub lfp: LfpRecord,
    pub certificates: Vec<RuleCertificate>,
}

impl MmrSolution {
    pub fn rule(&self, label: &str) -> Option<&DecisionRule> {
        self.rules.iter().find(|r| r.label == label).map(|r| &r.rule)
    }

    pub fn optimal_rules(&self) -> impl Iterator<Item = &LabeledRule> {
        self.rules
            .iter()
            .filter(|r| r.claim == RuleClaim::GammaMmrOptimal)
    }
}

/// Solver context shared by the constant constructors.
struct Context {
    index: EfficientIndex,
    bounds: IdentifiedBounds,
    regime: Regime,
}

fn context(spec: &ProblemSpec) -> Result<Context> {
    Ok(Context {
        index: efficient_index(spec)?,
        bounds: spec.bounds_at_mu_bar()?,
        regime: classify_regime(spec)?,
    })
}

fn require_case_ii(ctx: &Context, what: &str) -> Result<()> {
    if ctx.regime.tag != RegimeTag::CaseII {
        return Err(Error::Regime {
            detail: format!(
                "{what} exists only when identification is weak relative to the data \
                 (ratio {} < Φ(‖w‖) = {})",
                ctx.regime.ratio, ctx.regime.phi_norm
            ),
        });
    }
    Ok(())
}

/// Dithering scale of the probit generator:
/// `σ̃ = √((‖w‖² / Φ⁻¹(ratio))² - ‖w‖²)`.
pub fn sigma_tilde(spec: &ProblemSpec) -> Result<f64> {
    let ctx = context(spec)?;
    require_case_ii(&ctx, "the probit smoothing scale")?;
    let norm = ctx.index.norm;
    let q = quantile_raw(ctx.regime.ratio);
    let ratio_sq = (norm / q) * (norm / q);
    Ok(norm * (ratio_sq - 1.0).sqrt())
}

/// Half-width of the clamped-linear generator: the unique root of
/// `f(ρ) = ratio` where
/// `f(ρ) = 1 - (‖w‖ / 2ρ) · [G((ρ - ‖w‖²)/‖w‖) - G((-ρ - ‖w‖²)/‖w‖)]`
/// and `G` is the antiderivative of Φ. `f` is strictly decreasing from
/// `Φ(‖w‖)` at 0⁺ to 1/2 at ∞, so a sign-change bracket plus bisection
/// pins the root; the large-`ρ` asymptote `f ≈ (ρ + ‖w‖²)/2ρ` seeds the
/// upper end at `2‖w‖²/(2·ratio - 1)`.
pub fn rho_star(spec: &ProblemSpec) -> Result<f64> {
    let ctx = context(spec)?;
    require_case_ii(&ctx, "the clamped-linear half-width")?;
    let norm = ctx.index.norm;
    let target = ctx.regime.ratio;
    let f = |rho: f64| -> f64 {
        let a = (-rho - norm * norm) / norm;
        let b = (rho - norm * norm) / norm;
        1.0 - norm / (2.0 * rho)
            * (std_normal_cdf_antiderivative(b) - std_normal_cdf_antiderivative(a))
    };

    let mut lo = 1e-8;
    let mut hi = 2.0 * norm * norm / (2.0 * target - 1.0);
    let f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut expansions = 0;
    while f_hi > target {
        hi *= 2.0;
        f_hi = f(hi);
        expansions += 1;
        if expansions > 200 {
            return Err(Error::RootFind {
                detail: "no sign change while expanding the half-width bracket".into(),
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
    }
    if f_lo < target {
        return Err(Error::RootFind {
            detail: "lower bracket end does not exceed the target acceptance".into(),
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    let residual = (f(root) - target).abs();
    if residual > TOL_CLOSED_FORM {
        return Err(Error::RootFind {
            detail: format!("bisection stalled with residual {residual}"),
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        });
    }
    Ok(root)
}

/// Step size of the symmetric two-step generator:
/// `β* = (ratio - 1/2) / (2Φ(‖w‖) - 1) ∈ (0, 1/2)`.
pub fn beta_star(spec: &ProblemSpec) -> Result<f64> {
    let ctx = context(spec)?;
    require_case_ii(&ctx, "the two-step half-gap")?;
    Ok((ctx.regime.ratio - 0.5) / (2.0 * ctx.regime.phi_norm - 1.0))
}

/// Best threshold magnitude among rules `1{wᵀY ≥ c}`:
/// `c* = ‖w‖² - ‖w‖·Φ⁻¹(ratio) > 0`; both `+c*` and `-c*` attain the
/// threshold-family optimum.
pub fn c_star(spec: &ProblemSpec) -> Result<f64> {
    let ctx = context(spec)?;
    require_case_ii(&ctx, "the optimal threshold offset")?;
    let norm = ctx.index.norm;
    Ok(norm * norm - norm * quantile_raw(ctx.regime.ratio))
}

/// One root of the purified-threshold construction.
#[derive(Clone, Debug, Serialize)]
pub struct TStarRoot {
    pub t: f64,
    pub rule: DecisionRule,
}

/// Both purified zero-threshold rules available when `n > 1`.
#[derive(Clone, Debug, Serialize)]
pub struct TStarRules {
    pub plus: TStarRoot,
    pub minus: TStarRoot,
    pub mu_dot: Vec<f64>,
    pub s_star: f64,
}

/// Mix the prior location with a direction `μ̇` carrying no signal about
/// `±μ̄` (`μ̇ᵀΣ⁻¹μ̄ = 0`) so that the *nonrandomized* zero-threshold rule on
/// `w_t = Σ⁻¹(t μ̄ + (1-t) μ̇)` has acceptance exactly `ratio` at `μ̄`:
///
/// `t = 1 / (1 ± √((1-s*)/s* · ‖w‖² / μ̇ᵀΣ⁻¹μ̇))`,
/// `s* = Φ⁻¹(ratio)² / ‖w‖² ∈ (0, 1)`.
///
/// The noise dimension acts as a randomization device. Both roots solve the
/// squared acceptance equation; each index vector is oriented so its inner
/// product with `μ̄` is positive, which selects the branch that meets the
/// acceptance conditions rather than their mirror image.
///
/// `mu_dot` defaults to the first standard basis vector with the
/// `μ̄`-component projected out in the Σ⁻¹ inner product.
pub fn t_star(spec: &ProblemSpec, mu_dot: Option<&[f64]>) -> Result<TStarRules> {
    let ctx = context(spec)?;
    require_case_ii(&ctx, "purified threshold rules")?;
    let n = spec.dim();
    if n < 2 {
        return Err(Error::Dimension { expected: 2, got: n });
    }
    let w = &ctx.index.w;
    let norm_sq = ctx.index.norm * ctx.index.norm;

    let mu_dot: Vec<f64> = match mu_dot {
        Some(v) => {
            if v.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: v.len(),
                });
            }
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if scale == 0.0 {
                return Err(Error::Domain("μ̇ must be nonzero".into()));
            }
            let inner = dot(v, w);
            if inner.abs() > 1e-10 * scale * ctx.index.norm.max(1.0) {
                return Err(Error::Domain(format!(
                    "μ̇ must satisfy μ̇ᵀΣ⁻¹μ̄ = 0, got {inner}"
                )));
            }
            v.to_vec()
        }
        None => generate_orthogonal_direction(spec, w, norm_sq)?,
    };

    let q = quantile_raw(ctx.regime.ratio);
    let s_star = q * q / norm_sq;
    if !(0.0 < s_star && s_star < 1.0) {
        return Err(Error::Regime {
            detail: format!("purification parameter {s_star} outside (0, 1)"),
        });
    }
    let dot_norm_sq = dot(&mu_dot, &spec.sigma().solve(&mu_dot));
    let radical = ((1.0 - s_star) / s_star * norm_sq / dot_norm_sq).sqrt();

    let build = |t: f64| -> Result<TStarRoot> {
        let combo: Vec<f64> = spec
            .mu_bar()
            .iter()
            .zip(&mu_dot)
            .map(|(m, d)| t * m + (1.0 - t) * d)
            .collect();
        let mut w_t = spec.sigma().solve(&combo);
        if dot(&w_t, spec.mu_bar()) < 0.0 {
            for v in &mut w_t {
                *v = -*v;
            }
        }
        let rule = DecisionRule::threshold(w_t, 0.0)?;
        let acc = acceptance_probability(&rule, spec.mu_bar(), spec.sigma())?
            .value
            .value();
        if (acc - ctx.regime.ratio).abs() > TOL_CLOSED_FORM {
            return Err(Error::RootFind {
                detail: format!(
                    "purified rule misses the target acceptance: {acc} vs {}",
                    ctx.regime.ratio
                ),
                lo: t,
                hi: t,
                f_lo: acc,
                f_hi: ctx.regime.ratio,
            });
        }
        Ok(TStarRoot { t, rule })
    };

    Ok(TStarRules {
        plus: build(1.0 / (1.0 + radical))?,
        minus: build(1.0 / (1.0 - radical))?,
        mu_dot,
        s_star,
    })
}

fn generate_orthogonal_direction(
    spec: &ProblemSpec,
    w: &[f64],
    norm_sq: f64,
) -> Result<Vec<f64>> {
    let n = spec.dim();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        // project out the μ̄ component in the Σ⁻¹ inner product
        let coeff = w[j] / norm_sq;
        let cand: Vec<f64> = e
            .iter()
            .zip(spec.mu_bar())
            .map(|(ej, m)| ej - coeff * m)
            .collect();
        let scale = cand.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale > 1e-8 {
            return Ok(cand);
        }
    }
    Err(Error::DegenerateSpec(
        "no direction orthogonal to the prior location".into(),
    ))
}

/// Check the two acceptance conditions that characterize optimality under
/// weak identification. A failed check is a negative certificate, not an
/// error.
pub fn verify_moment_conditions(
    rule: &DecisionRule,
    spec: &ProblemSpec,
    tol: f64,
) -> Result<MomentCertificate> {
    let bounds = spec.bounds_at_mu_bar()?;
    let width = bounds.width();
    let (target_plus, target_minus) = if width == 0.0 {
        (1.0, 0.0)
    } else {
        (bounds.upper / width, -bounds.lower / width)
    };
    let e_plus = acceptance_probability(rule, spec.mu_bar(), spec.sigma())?
        .value
        .value();
    let e_minus = acceptance_probability(rule, &spec.neg_mu_bar(), spec.sigma())?
        .value
        .value();
    let residual_plus = (e_plus - target_plus).abs();
    let residual_minus = (e_minus - target_minus).abs();
    Ok(MomentCertificate {
        e_plus,
        e_minus,
        target_plus,
        target_minus,
        residual_plus,
        residual_minus,
        tol,
        pass: residual_plus <= tol && residual_minus <= tol,
    })
}

/// Regime-appropriate least favorable prior.
pub fn least_favorable_prior(spec: &ProblemSpec) -> Result<LfpRecord> {
    let ctx = context(spec)?;
    match ctx.regime.tag {
        RegimeTag::CaseI => Ok(LfpRecord {
            kind: LfpKind::TwoPoint,
            prior: GammaPrior {
                q_plus: Probability::ONE,
                q_minus: Probability::ZERO,
            },
        }),
        RegimeTag::CaseII => {
            let bp = ctx.bounds;
            let bm = spec.bounds_at_neg_mu_bar()?;
            // q·upper + (1-q)·lower = 0 at each location
            let q_plus = -bp.lower / bp.width();
            let q_minus = -bm.lower / bm.width();
            Ok(LfpRecord {
                kind: LfpKind::FourPoint,
                prior: GammaPrior::new(q_plus, q_minus)?,
            })
        }
    }
}

fn certificate_for(
    label: &str,
    claim: RuleClaim,
    rule: &DecisionRule,
    spec: &ProblemSpec,
    value: f64,
    regime: RegimeTag,
) -> Result<RuleCertificate> {
    let tol = match acceptance_probability(rule, spec.mu_bar(), spec.sigma())?.method {
        AcceptanceMethod::ClosedForm => TOL_CLOSED_FORM,
        AcceptanceMethod::Quadrature => TOL_QUADRATURE,
    };
    let (worst_case, _) = worst_case_bayes_regret(rule, spec)?;
    let (moment, pass) = match (claim, regime) {
        (RuleClaim::GammaMmrOptimal, RegimeTag::CaseII) => {
            let moment = verify_moment_conditions(rule, spec, tol)?;
            let pass = moment.pass && (worst_case - value).abs() <= tol;
            (Some(moment), pass)
        }
        (RuleClaim::GammaMmrOptimal, RegimeTag::CaseI) => {
            (None, (worst_case - value).abs() <= tol)
        }
        (RuleClaim::BestThresholdInIndex, _) => (None, worst_case >= value - tol),
    };
    Ok(RuleCertificate {
        label: label.to_string(),
        claim,
        worst_case,
        solution_value: value,
        moment,
        tol,
        pass,
    })
}

/// Solve the ex-ante problem end to end: classify the regime, construct the
/// regime's rule set and least favorable prior, and attach verification
/// certificates.
pub fn solve_mmr(spec: &ProblemSpec) -> Result<MmrSolution> {
    let ctx = context(spec)?;
    let bounds = ctx.bounds;
    let lfp = least_favorable_prior(spec)?;

    match ctx.regime.tag {
        RegimeTag::CaseI => {
            let value = bounds.upper * phi_cdf(-ctx.index.norm);
            let rule = DecisionRule::threshold(ctx.index.w.clone(), 0.0)?;
            let rules = vec![LabeledRule {
                label: LABEL_W0.into(),
                claim: RuleClaim::GammaMmrOptimal,
                rule: rule.clone(),
            }];
            let certificates = vec![certificate_for(
                LABEL_W0,
                RuleClaim::GammaMmrOptimal,
                &rule,
                spec,
                value,
                RegimeTag::CaseI,
            )?];
            Ok(MmrSolution {
                regime: ctx.regime,
                value,
                rules,
                lfp,
                certificates,
            })
        }
        RegimeTag::CaseII => {
            let value = -bounds.upper * bounds.lower / bounds.width();
            let w = ctx.index.w.clone();

            let mut rules = vec![
                LabeledRule {
                    label: LABEL_RT.into(),
                    claim: RuleClaim::GammaMmrOptimal,
                    rule: DecisionRule::probit(w.clone(), sigma_tilde(spec)?)?,
                },
                LabeledRule {
                    label: LABEL_LINEAR.into(),
                    claim: RuleClaim::GammaMmrOptimal,
                    rule: DecisionRule::clamped_linear(w.clone(), rho_star(spec)?)?,
                },
                {
                    let beta = beta_star(spec)?;
                    LabeledRule {
                        label: LABEL_STEP.into(),
                        claim: RuleClaim::GammaMmrOptimal,
                        rule: DecisionRule::two_step(w.clone(), 0.5 - beta, 0.5 + beta)?,
                    }
                },
            ];
            if spec.dim() > 1 {
                let ts = t_star(spec, None)?;
                rules.push(LabeledRule {
                    label: LABEL_WT_PLUS.into(),
                    claim: RuleClaim::GammaMmrOptimal,
                    rule: ts.plus.rule,
                });
                rules.push(LabeledRule {
                    label: LABEL_WT_MINUS.into(),
                    claim: RuleClaim::GammaMmrOptimal,
                    rule: ts.minus.rule,
                });
            }
            let c = c_star(spec)?;
            rules.push(LabeledRule {
                label: LABEL_THRESHOLD_PLUS.into(),
                claim: RuleClaim::BestThresholdInIndex,
                rule: DecisionRule::threshold(w.clone(), c)?,
            });
            rules.push(LabeledRule {
                label: LABEL_THRESHOLD_MINUS.into(),
                claim: RuleClaim::BestThresholdInIndex,
                rule: DecisionRule::threshold(w, -c)?,
            });

            let certificates = rules
                .iter()
                .map(|lr| {
                    certificate_for(&lr.label, lr.claim, &lr.rule, spec, value, RegimeTag::CaseII)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MmrSolution {
                regime: ctx.regime,
                value,
                rules,
                lfp,
                certificates,
            })
        }
    }
}
