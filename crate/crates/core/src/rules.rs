//! Decision rules and their acceptance probabilities `E_μ[d(Y)]`.
//!
//! Every non-constant rule the solvers construct acts through one scalar
//! linear index `t = wᵀY`, which is normal with mean `wᵀμ` and variance
//! `wᵀΣw`. That reduces every acceptance probability to a one-dimensional
//! integral; threshold, probit, and step rules have closed forms, while the
//! clamped-linear and tabulated families integrate the index response against
//! the Gaussian density. A seeded Monte Carlo estimate provides an
//! independent cross-check for all of them.

use crate::error::{Error, Result};
use crate::gauss::{self, phi_cdf, phi_pdf, GaussLegendre, Probability};
use crate::linalg::{dot, SpdMatrix};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Index integrals run over mean ± `INDEX_RANGE_SD` standard deviations; the
/// truncated tail mass is below 1e-16.
const INDEX_RANGE_SD: f64 = 8.5;

/// A (possibly randomized) treatment rule mapping data to a treatment
/// probability.
///
/// `Threshold`, `Probit`, `ClampedLinear`, `TwoStep`, and `Tabulated` act on
/// the scalar index `wᵀY`; `Mixture` takes convex combinations. Ties
/// `wᵀY = c` take the upper action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DecisionRule {
    /// `1{wᵀY ≥ c}`.
    Threshold { w: Vec<f64>, c: f64 },
    /// `Φ(wᵀY / σ̃)`: a randomized-threshold rule with Gaussian dithering.
    Probit { w: Vec<f64>, sigma_tilde: f64 },
    /// `clamp((wᵀY + ρ) / 2ρ)` to `[0, 1]`.
    ClampedLinear { w: Vec<f64>, rho: f64 },
    /// `lo` below the zero threshold, `hi` at or above it.
    TwoStep { w: Vec<f64>, lo: f64, hi: f64 },
    /// Ignore the data.
    Constant { a: f64 },
    /// Convex combination of component rules.
    Mixture {
        weights: Vec<f64>,
        components: Vec<DecisionRule>,
    },
    /// Piecewise-constant in the index: `values[i]` on `(knots[i-1], knots[i]]`,
    /// with `values[0]` below the first knot and the last value above the
    /// last knot. One more value than knots.
    Tabulated {
        w: Vec<f64>,
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

/// An acceptance probability together with the route that produced it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AcceptanceProbability {
    pub value: Probability,
    pub method: AcceptanceMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceMethod {
    ClosedForm,
    Quadrature,
}

impl DecisionRule {
    pub fn threshold(w: Vec<f64>, c: f64) -> Result<Self> {
        let rule = DecisionRule::Threshold { w, c };
        rule.validate()?;
        Ok(rule)
    }

    pub fn probit(w: Vec<f64>, sigma_tilde: f64) -> Result<Self> {
        let rule = DecisionRule::Probit { w, sigma_tilde };
        rule.validate()?;
        Ok(rule)
    }

    pub fn clamped_linear(w: Vec<f64>, rho: f64) -> Result<Self> {
        let rule = DecisionRule::ClampedLinear { w, rho };
        rule.validate()?;
        Ok(rule)
    }

    pub fn two_step(w: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        let rule = DecisionRule::TwoStep { w, lo, hi };
        rule.validate()?;
        Ok(rule)
    }

    pub fn constant(a: f64) -> Result<Self> {
        let rule = DecisionRule::Constant { a };
        rule.validate()?;
        Ok(rule)
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<DecisionRule>) -> Result<Self> {
        let rule = DecisionRule::Mixture {
            weights,
            components,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn tabulated(w: Vec<f64>, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let rule = DecisionRule::Tabulated { w, knots, values };
        rule.validate()?;
        Ok(rule)
    }

    /// Check structural invariants (weights on the simplex, actions in
    /// `[0, 1]`, sorted knots, nonzero index vectors). Deserialized rules
    /// should be validated before use.
    pub fn validate(&self) -> Result<()> {
        fn check_w(w: &[f64]) -> Result<()> {
            if w.is_empty() || w.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("rule index vector"));
            }
            if w.iter().all(|&v| v == 0.0) {
                return Err(Error::DegenerateIndex(0.0));
            }
            Ok(())
        }
        fn check_action(a: f64) -> Result<()> {
            Probability::new(a).map(|_| ())
        }
        match self {
            DecisionRule::Threshold { w, c } => {
                check_w(w)?;
                if !c.is_finite() {
                    return Err(Error::NonFinite("threshold"));
                }
                Ok(())
            }
            DecisionRule::Probit { w, sigma_tilde } => {
                check_w(w)?;
                if !sigma_tilde.is_finite() || *sigma_tilde <= 0.0 {
                    return Err(Error::Domain(format!(
                        "probit scale must be positive, got {sigma_tilde}"
                    )));
                }
                Ok(())
            }
            DecisionRule::ClampedLinear { w, rho } => {
                check_w(w)?;
                if !rho.is_finite() || *rho <= 0.0 {
                    return Err(Error::Domain(format!(
                        "clamped-linear half-width must be positive, got {rho}"
                    )));
                }
                Ok(())
            }
            DecisionRule::TwoStep { w, lo, hi } => {
                check_w(w)?;
                check_action(*lo)?;
                check_action(*hi)
            }
            DecisionRule::Constant { a } => check_action(*a),
            DecisionRule::Mixture {
                weights,
                components,
            } => {
                if weights.len() != components.len() || weights.is_empty() {
                    return Err(Error::Dimension {
                        expected: components.len(),
                        got: weights.len(),
                    });
                }
                if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
                    return Err(Error::Domain("mixture weights must be nonnegative".into()));
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "mixture weights must sum to 1, got {sum}"
                    )));
                }
                components.iter().try_for_each(|c| c.validate())
            }
            DecisionRule::Tabulated { w, knots, values } => {
                check_w(w)?;
                if values.len() != knots.len() + 1 {
                    return Err(Error::Dimension {
                        expected: knots.len() + 1,
                        got: values.len(),
                    });
                }
                if knots.windows(2).any(|p| p[0] >= p[1]) {
                    return Err(Error::Domain("tabulated knots must be strictly increasing".into()));
                }
                if knots.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("tabulated knots"));
                }
                values.iter().try_for_each(|&v| check_action(v))
            }
        }
    }

    /// Dimension of the data the rule reads, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            DecisionRule::Threshold { w, .. }
            | DecisionRule::Probit { w, .. }
            | DecisionRule::ClampedLinear { w, .. }
            | DecisionRule::TwoStep { w, .. }
            | DecisionRule::Tabulated { w, .. } => Some(w.len()),
            DecisionRule::Constant { .. } => None,
            DecisionRule::Mixture { components, .. } => {
                components.iter().find_map(|c| c.dim())
            }
        }
    }

    /// Index vector, when the rule is a function of a single linear index.
    pub fn index_vector(&self) -> Option<&[f64]> {
        match self {
            DecisionRule::Threshold { w, .. }
            | DecisionRule::Probit { w, .. }
            | DecisionRule::ClampedLinear { w, .. }
            | DecisionRule::TwoStep { w, .. }
            | DecisionRule::Tabulated { w, .. } => Some(w),
            _ => None,
        }
    }

    /// Response as a function of the scalar index `t = wᵀY`. Errors for
    /// rules that are not a function of one index (mixtures over different
    /// index vectors).
    pub fn evaluate_index(&self, t: f64) -> Result<f64> {
        Ok(match self {
            DecisionRule::Threshold { c, .. } => {
                if t >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            DecisionRule::Probit { sigma_tilde, .. } => phi_cdf(t / sigma_tilde),
            DecisionRule::ClampedLinear { rho, .. } => ((t + rho) / (2.0 * rho)).clamp(0.0, 1.0),
            DecisionRule::TwoStep { lo, hi, .. } => {
                if t >= 0.0 {
                    *hi
                } else {
                    *lo
                }
            }
            DecisionRule::Constant { a } => *a,
            DecisionRule::Mixture {
                weights,
                components,
            } => {
                let mut acc = 0.0;
                for (wt, comp) in weights.iter().zip(components) {
                    acc += wt * comp.evaluate_index(t)?;
                }
                acc
            }
            DecisionRule::Tabulated { knots, values, .. } => {
                // first knot with t ≤ knot picks its left segment; ties go up
                let pos = knots.partition_point(|&k| k < t);
                // pos = number of knots strictly below t; at t == knot the
                // convention "ties take the upper action" means segment pos+?
                // values[i] covers (knots[i-1], knots[i]], so index by the
                // count of knots strictly below t, bumping on exact hits.
                let mut i = pos;
                if i < knots.len() && t == knots[i] {
                    i += 1;
                }
                values[i.min(values.len() - 1)]
            }
        })
    }

    /// The rule's action at data `Y`.
    pub fn evaluate(&self, y: &[f64]) -> Result<Probability> {
        let action = match self {
            DecisionRule::Constant { a } => *a,
            DecisionRule::Mixture {
                weights,
                components,
            } => {
                let mut acc = 0.0;
                for (wt, comp) in weights.iter().zip(components) {
                    acc += wt * comp.evaluate(y)?.value();
                }
                acc
            }
            _ => {
                let w = self.index_vector().expect("index rule");
                if y.len() != w.len() {
                    return Err(Error::Dimension {
                        expected: w.len(),
                        got: y.len(),
                    });
                }
                self.evaluate_index(dot(w, y))?
            }
        };
        Probability::new_clamped(action, 1e-12)
    }

    /// Kinks of the index response, used to split quadrature panels.
    fn index_breakpoints(&self) -> Vec<f64> {
        match self {
            DecisionRule::Threshold { c, .. } => vec![*c],
            DecisionRule::TwoStep { .. } => vec![0.0],
            DecisionRule::ClampedLinear { rho, .. } => vec![-rho, *rho],
            DecisionRule::Tabulated { knots, .. } => knots.clone(),
            _ => Vec::new(),
        }
    }
}

/// Mean and standard deviation of the index `t = wᵀY` under `Y ~ N(μ, Σ)`.
fn index_moments(w: &[f64], mu: &[f64], sigma: &SpdMatrix) -> Result<(f64, f64)> {
    if mu.len() != w.len() || sigma.dim() != w.len() {
        return Err(Error::Dimension {
            expected: w.len(),
            got: mu.len(),
        });
    }
    let mean = dot(w, mu);
    let var = sigma.quad_form(w);
    if var <= 0.0 {
        return Err(Error::DegenerateIndex(var));
    }
    Ok((mean, var.sqrt()))
}

fn quadrature_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Integrate the index response against the `N(mean, sd²)` density over
/// mean ± 8.5 sd, splitting panels at the response's kinks.
fn acceptance_by_quadrature(rule: &DecisionRule, mean: f64, sd: f64) -> Result<f64> {
    let lo = mean - INDEX_RANGE_SD * sd;
    let hi = mean + INDEX_RANGE_SD * sd;
    let mut cuts = vec![lo];
    let mut breaks = rule.index_breakpoints();
    breaks.retain(|b| *b > lo && *b < hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.extend(breaks);
    cuts.push(hi);

    let gl = quadrature_rule();
    let mut acc = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        // 12 panels of an order-20 rule per smooth segment
        let panels = 12;
        let h = (b - a) / panels as f64;
        for i in 0..panels {
            let pa = a + i as f64 * h;
            let pb = if i + 1 == panels { b } else { pa + h };
            acc += gl.integrate_panel(
                &|t: f64| {
                    rule.evaluate_index(t).expect("index rule")
                        * phi_pdf((t - mean) / sd)
                        / sd
                },
                pa,
                pb,
            );
        }
    }
    Ok(acc)
}

/// `E_μ[d(Y)]` under `Y ~ N(μ, Σ)`.
///
/// Threshold, probit, two-step, and constant rules use closed forms; the
/// probit form follows from viewing the rule as a zero threshold applied
/// after adding independent `N(0, σ̃²)` noise to the index. Clamped-linear
/// responses are integrated by quadrature (absolute error well below 1e-10);
/// tabulated rules sum exact cell masses.
pub fn acceptance_probability(
    rule: &DecisionRule,
    mu: &[f64],
    sigma: &SpdMatrix,
) -> Result<AcceptanceProbability> {
    let (value, method) = acceptance_inner(rule, mu, sigma)?;
    Ok(AcceptanceProbability {
        value: Probability::new_clamped(value, 1e-9)?,
        method,
    })
}

fn acceptance_inner(
    rule: &DecisionRule,
    mu: &[f64],
    sigma: &SpdMatrix,
) -> Result<(f64, AcceptanceMethod)> {
    use AcceptanceMethod::*;
    match rule {
        DecisionRule::Constant { a } => Ok((*a, ClosedForm)),
        DecisionRule::Mixture {
            weights,
            components,
        } => {
            let mut acc = 0.0;
            let mut method = ClosedForm;
            for (wt, comp) in weights.iter().zip(components) {
                let part = acceptance_inner(comp, mu, sigma)?;
                acc += wt * part.0;
                if part.1 == Quadrature {
                    method = Quadrature;
                }
            }
            Ok((acc, method))
        }
        DecisionRule::Threshold { w, c } => {
            let (mean, sd) = index_moments(w, mu, sigma)?;
            Ok((1.0 - phi_cdf((c - mean) / sd), ClosedForm))
        }
        DecisionRule::Probit { w, sigma_tilde } => {
            let (mean, sd) = index_moments(w, mu, sigma)?;
            let total = (sigma_tilde * sigma_tilde + sd * sd).sqrt();
            Ok((phi_cdf(mean / total), ClosedForm))
        }
        DecisionRule::TwoStep { w, lo, hi } => {
            let (mean, sd) = index_moments(w, mu, sigma)?;
            let below = phi_cdf(-mean / sd);
            Ok((lo * below + hi * (1.0 - below), ClosedForm))
        }
        DecisionRule::ClampedLinear { w, .. } => {
            let (mean, sd) = index_moments(w, mu, sigma)?;
            Ok((acceptance_by_quadrature(rule, mean, sd)?, Quadrature))
        }
        DecisionRule::Tabulated { w, knots, values } => {
            let (mean, sd) = index_moments(w, mu, sigma)?;
            let mut acc = 0.0;
            let mut prev_cdf = 0.0;
            for (i, &k) in knots.iter().enumerate() {
                let cdf = phi_cdf((k - mean) / sd);
                acc += values[i] * (cdf - prev_cdf);
                prev_cdf = cdf;
            }
            acc += values[knots.len()] * (1.0 - prev_cdf);
            Ok((acc, Quadrature))
        }
    }
}

/// Monte Carlo estimate of the acceptance probability with its standard
/// error; the independent cross-check for the closed forms above.
pub fn mc_acceptance(
    rule: &DecisionRule,
    mu: &[f64],
    sigma: &SpdMatrix,
    count: usize,
    seed: u64,
) -> Result<(Probability, f64)> {
    if count == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one draw".into()));
    }
    let draws = gauss::sample_gaussian(mu, sigma, count, seed)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for y in &draws {
        let a = rule.evaluate(y)?.value();
        sum += a;
        sum_sq += a * a;
    }
    let n = count as f64;
    let mean = sum / n;
    let var = if count > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((
        Probability::new_clamped(mean, 1e-12)?,
        (var / n).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{efficient_index, make_stoye};
    use approx::assert_abs_diff_eq;

    const PHI_1: f64 = 0.8413447460685429;

    #[test]
    fn evaluate_conventions() {
        let thr = DecisionRule::threshold(vec![1.0], 0.0).unwrap();
        // weak inequality at the boundary
        assert_eq!(thr.evaluate(&[0.0]).unwrap().value(), 1.0);
        assert_eq!(thr.evaluate(&[-0.1]).unwrap().value(), 0.0);

        let cons = DecisionRule::constant(0.3).unwrap();
        assert_eq!(cons.evaluate(&[5.0]).unwrap().value(), 0.3);

        let step = DecisionRule::two_step(vec![1.0], 0.45, 0.55).unwrap();
        assert_eq!(step.evaluate(&[-2.0]).unwrap().value(), 0.45);
        assert_eq!(step.evaluate(&[0.0]).unwrap().value(), 0.55);

        assert!(thr.evaluate(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn tabulated_segment_lookup() {
        let tab =
            DecisionRule::tabulated(vec![1.0], vec![-1.0, 0.0, 1.0], vec![0.0, 0.25, 0.75, 1.0])
                .unwrap();
        assert_eq!(tab.evaluate_index(-2.0).unwrap(), 0.0);
        assert_eq!(tab.evaluate_index(-1.0).unwrap(), 0.25); // tie goes up
        assert_eq!(tab.evaluate_index(-0.5).unwrap(), 0.25);
        assert_eq!(tab.evaluate_index(0.0).unwrap(), 0.75);
        assert_eq!(tab.evaluate_index(0.5).unwrap(), 0.75);
        assert_eq!(tab.evaluate_index(1.0).unwrap(), 1.0);
        assert_eq!(tab.evaluate_index(9.0).unwrap(), 1.0);
    }

    #[test]
    fn validation_catches_bad_rules() {
        assert!(DecisionRule::two_step(vec![1.0], -0.1, 0.5).is_err());
        assert!(DecisionRule::constant(1.5).is_err());
        assert!(DecisionRule::probit(vec![1.0], 0.0).is_err());
        assert!(DecisionRule::threshold(vec![0.0], 0.0).is_err());
        assert!(DecisionRule::mixture(
            vec![0.6, 0.6],
            vec![
                DecisionRule::constant(0.0).unwrap(),
                DecisionRule::constant(1.0).unwrap()
            ]
        )
        .is_err());
        assert!(
            DecisionRule::tabulated(vec![1.0], vec![0.0, 0.0], vec![0.0, 0.5, 1.0]).is_err()
        );
    }

    #[test]
    fn threshold_acceptance_closed_form() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let w = efficient_index(&spec).unwrap().w;
        let rule = DecisionRule::threshold(w, 0.0).unwrap();
        let acc = acceptance_probability(&rule, spec.mu_bar(), spec.sigma()).unwrap();
        assert_abs_diff_eq!(acc.value.value(), PHI_1, epsilon = 1e-12);
        assert_eq!(acc.method, AcceptanceMethod::ClosedForm);
    }

    #[test]
    fn probit_acceptance_hits_target_ratio() {
        // scale chosen so that the acceptance at μ̄ equals 0.55 for the
        // wide-bounds scalar model (‖w‖ = 1, ratio = 0.55)
        let sigma_tilde = 7.894815873534781;
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        let rule = DecisionRule::probit(vec![1.0], sigma_tilde).unwrap();
        let acc = acceptance_probability(&rule, spec.mu_bar(), spec.sigma()).unwrap();
        assert_abs_diff_eq!(acc.value.value(), 0.55, epsilon = 1e-10);
    }

    #[test]
    fn clamped_linear_limits() {
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        // huge half-width: the response is nearly flat at 1/2 near the mean
        let wide = DecisionRule::clamped_linear(vec![1.0], 1e6).unwrap();
        let acc = acceptance_probability(&wide, spec.mu_bar(), spec.sigma()).unwrap();
        assert_abs_diff_eq!(acc.value.value(), 0.5, epsilon = 1e-5);
        assert_eq!(acc.method, AcceptanceMethod::Quadrature);

        // tiny half-width: indistinguishable from the zero-threshold rule
        let narrow = DecisionRule::clamped_linear(vec![1.0], 1e-8).unwrap();
        let acc = acceptance_probability(&narrow, spec.mu_bar(), spec.sigma()).unwrap();
        assert_abs_diff_eq!(acc.value.value(), PHI_1, epsilon = 1e-8);
    }

    #[test]
    fn clamped_linear_acceptance_decreases_in_rho() {
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        let mut prev = f64::INFINITY;
        for rho in [0.01, 0.1, 1.0, 5.0, 10.0, 50.0, 500.0] {
            let rule = DecisionRule::clamped_linear(vec![1.0], rho).unwrap();
            let acc = acceptance_probability(&rule, spec.mu_bar(), spec.sigma())
                .unwrap()
                .value
                .value();
            assert!(acc < prev, "acceptance not decreasing at rho = {rho}");
            prev = acc;
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        let spec = make_stoye(0.7, 1.3, 2.0).unwrap();
        let sd = spec.sigma().quad_form(&[1.0]).sqrt();
        for mu in [-1.0, 0.0, 0.4, 2.0] {
            for rule in [
                DecisionRule::threshold(vec![1.0], 0.3).unwrap(),
                DecisionRule::two_step(vec![1.0], 0.2, 0.9).unwrap(),
                DecisionRule::probit(vec![1.0], 2.5).unwrap(),
            ] {
                let mean = mu;
                let closed = acceptance_inner(&rule, &[mu], spec.sigma()).unwrap().0;
                let quad = acceptance_by_quadrature(&rule, mean, sd).unwrap();
                assert_abs_diff_eq!(closed, quad, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn acceptance_symmetry_for_symmetric_rules() {
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        let rules = [
            DecisionRule::threshold(vec![1.0], 0.0).unwrap(),
            DecisionRule::probit(vec![1.0], 3.0).unwrap(),
            DecisionRule::clamped_linear(vec![1.0], 2.0).unwrap(),
            DecisionRule::two_step(vec![1.0], 0.45, 0.55).unwrap(),
        ];
        for rule in &rules {
            for m in [0.3, 1.0, 2.5] {
                let plus = acceptance_probability(rule, &[m], spec.sigma())
                    .unwrap()
                    .value
                    .value();
                let minus = acceptance_probability(rule, &[-m], spec.sigma())
                    .unwrap()
                    .value
                    .value();
                assert_abs_diff_eq!(plus + minus, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mixture_acceptance_is_weighted() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let mix = DecisionRule::mixture(
            vec![0.5, 0.5],
            vec![
                DecisionRule::constant(0.0).unwrap(),
                DecisionRule::constant(1.0).unwrap(),
            ],
        )
        .unwrap();
        let acc = acceptance_probability(&mix, spec.mu_bar(), spec.sigma()).unwrap();
        assert_eq!(acc.value.value(), 0.5);
    }

    #[test]
    fn tabulated_acceptance_matches_threshold() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let tab = DecisionRule::tabulated(vec![1.0], vec![0.0], vec![0.0, 1.0]).unwrap();
        let thr = DecisionRule::threshold(vec![1.0], 0.0).unwrap();
        let a = acceptance_probability(&tab, spec.mu_bar(), spec.sigma()).unwrap();
        let b = acceptance_probability(&thr, spec.mu_bar(), spec.sigma()).unwrap();
        assert_abs_diff_eq!(a.value.value(), b.value.value(), epsilon = 1e-14);
    }

    #[test]
    fn monte_carlo_cross_checks() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let rule = DecisionRule::threshold(vec![1.0], 0.0).unwrap();
        let (est, se) = mc_acceptance(&rule, spec.mu_bar(), spec.sigma(), 200_000, 11).unwrap();
        assert!((est.value() - PHI_1).abs() <= 4.0 * se, "outside 4-sigma band");

        let cons = DecisionRule::constant(0.3).unwrap();
        let (est, se) = mc_acceptance(&cons, spec.mu_bar(), spec.sigma(), 1000, 3).unwrap();
        assert_abs_diff_eq!(est.value(), 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(se, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_index_is_rejected() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let rule = DecisionRule::Threshold {
            w: vec![0.0],
            c: 0.0,
        };
        assert!(acceptance_probability(&rule, spec.mu_bar(), spec.sigma()).is_err());
    }

    #[test]
    fn rules_round_trip_through_json() {
        let rules = vec![
            DecisionRule::threshold(vec![1.0, 0.5], 0.2).unwrap(),
            DecisionRule::probit(vec![1.0], 7.9).unwrap(),
            DecisionRule::mixture(
                vec![0.25, 0.75],
                vec![
                    DecisionRule::constant(0.1).unwrap(),
                    DecisionRule::two_step(vec![1.0], 0.4, 0.6).unwrap(),
                ],
            )
            .unwrap(),
        ];
        for rule in rules {
            let json = serde_json::to_string(&rule).unwrap();
            let back: DecisionRule = serde_json::from_str(&json).unwrap();
            assert_eq!(back, rule);
        }
        let json = serde_json::to_string(&DecisionRule::constant(0.3).unwrap()).unwrap();
        assert_eq!(json, r#"{"type":"constant","a":0.3}"#);
    }
}
