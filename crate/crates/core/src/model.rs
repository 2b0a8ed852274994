//! Problem specification: the Gaussian signal model, identified-set bounds,
//! the sign normalization, the efficient linear index, and regime
//! classification.
//!
//! Identified-set bounds are supplied as a callback `μ ↦ (lower, upper)`, so
//! new models plug in without touching the solvers. Two constructors are
//! built in: a scalar model with fixed-width bounds `[μ - k, μ + k]`
//! (an external-validity setup) and a multi-site evidence-aggregation model
//! with Lipschitz intersection bounds.

use crate::error::{Error, Result};
use crate::gauss::phi_cdf;
use crate::linalg::{dot, SpdMatrix};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Lower and upper bound of the welfare-contrast identified set at some `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedBounds {
    pub lower: f64,
    pub upper: f64,
}

impl IdentifiedBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

type BoundsFn = Arc<dyn Fn(&[f64]) -> IdentifiedBounds + Send + Sync>;

/// A treatment choice problem: signal covariance, prior location, and
/// identified-set bounds.
///
/// Construction normalizes the sign of the prior location so that
/// `upper + lower > 0` at `μ̄`; every solver relies on that convention.
#[derive(Clone)]
pub struct ProblemSpec {
    sigma: SpdMatrix,
    mu_bar: Vec<f64>,
    bounds: BoundsFn,
    label: String,
    config: Option<ModelConfig>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("n", &self.sigma.dim())
            .field("mu_bar", &self.mu_bar)
            .finish()
    }
}

impl ProblemSpec {
    /// General constructor for custom identified-set models. The callback
    /// must satisfy `lower ≤ upper` wherever it is evaluated and the point
    /// reflection `bounds(-μ) = (-upper(μ), -lower(μ))`; the built-in
    /// constructors guarantee both.
    pub fn with_bounds(
        sigma: SpdMatrix,
        mu_bar: Vec<f64>,
        label: impl Into<String>,
        bounds: BoundsFn,
    ) -> Result<Self> {
        if mu_bar.len() != sigma.dim() {
            return Err(Error::Dimension {
                expected: sigma.dim(),
                got: mu_bar.len(),
            });
        }
        if mu_bar.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ProblemSpec::with_bounds"));
        }
        if mu_bar.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateSpec(
                "prior location μ̄ must be nonzero".into(),
            ));
        }
        let spec = ProblemSpec {
            sigma,
            mu_bar,
            bounds,
            label: label.into(),
            config: None,
        };
        normalize(spec)
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn mu_bar(&self) -> &[f64] {
        &self.mu_bar
    }

    pub fn neg_mu_bar(&self) -> Vec<f64> {
        self.mu_bar.iter().map(|v| -v).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Serializable description, present when built from a built-in
    /// constructor.
    pub fn config(&self) -> Option<&ModelConfig> {
        self.config.as_ref()
    }

    /// Identified-set bounds at `μ`.
    pub fn bounds_at(&self, mu: &[f64]) -> Result<IdentifiedBounds> {
        if mu.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: mu.len(),
            });
        }
        let b = (self.bounds)(mu);
        if !b.lower.is_finite() || !b.upper.is_finite() {
            return Err(Error::NonFinite("bounds_at"));
        }
        if b.lower > b.upper {
            return Err(Error::InfeasibleBounds {
                context: format!("μ = {mu:?}"),
                lower: b.lower,
                upper: b.upper,
            });
        }
        Ok(b)
    }

    pub fn bounds_at_mu_bar(&self) -> Result<IdentifiedBounds> {
        self.bounds_at(&self.mu_bar)
    }

    pub fn bounds_at_neg_mu_bar(&self) -> Result<IdentifiedBounds> {
        self.bounds_at(&self.neg_mu_bar())
    }
}

/// Flip the sign of `μ̄` if needed so that `upper + lower > 0` there.
/// The point reflection of the bounds guarantees the flip changes the sign of
/// the sum; an exactly vanishing sum is a knife edge the solvers do not
/// define, and is rejected.
pub fn normalize(spec: ProblemSpec) -> Result<ProblemSpec> {
    let b = spec.bounds_at_mu_bar()?;
    let sum = b.upper + b.lower;
    if sum > 0.0 {
        return Ok(spec);
    }
    let flipped = ProblemSpec {
        mu_bar: spec.neg_mu_bar(),
        ..spec
    };
    let bf = flipped.bounds_at_mu_bar()?;
    let sum_f = bf.upper + bf.lower;
    if sum_f > 0.0 {
        Ok(flipped)
    } else {
        Err(Error::KnifeEdge { sum: sum_f })
    }
}

/// Scalar external-validity model: signal `N(μ, σ²)`, bounds `[μ-k, μ+k]`.
pub fn make_stoye(mu_bar: f64, sigma: f64, k: f64) -> Result<ProblemSpec> {
    if !(mu_bar.is_finite() && sigma.is_finite() && k.is_finite()) {
        return Err(Error::NonFinite("make_stoye"));
    }
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if k < 0.0 {
        return Err(Error::Domain(format!("k must be nonnegative, got {k}")));
    }
    if mu_bar == 0.0 {
        return Err(Error::DegenerateSpec(
            "prior location μ̄ must be nonzero".into(),
        ));
    }
    let cov = SpdMatrix::scalar(sigma * sigma)?;
    let bounds: BoundsFn = Arc::new(move |mu: &[f64]| IdentifiedBounds {
        lower: mu[0] - k,
        upper: mu[0] + k,
    });
    let spec = ProblemSpec {
        sigma: cov,
        mu_bar: vec![mu_bar],
        bounds,
        label: "stoye".into(),
        config: Some(ModelConfig::Stoye { mu_bar, sigma, k }),
    };
    let normalized = normalize(spec)?;
    // keep the stored configuration in sync with the possibly flipped μ̄
    let mu_final = normalized.mu_bar[0];
    Ok(ProblemSpec {
        config: Some(ModelConfig::Stoye {
            mu_bar: mu_final,
            sigma,
            k,
        }),
        ..normalized
    })
}

/// Evidence-aggregation model: independent site estimates `Yᵢ ~ N(μᵢ, σᵢ²)`
/// and intersection bounds
/// `[maxᵢ(μᵢ - C‖xᵢ-x₀‖), minᵢ(μᵢ + C‖xᵢ-x₀‖)]`
/// on the welfare contrast at the target covariate `x₀`.
pub fn make_evidence_aggregation(
    x0: &[f64],
    sites: &[(Vec<f64>, f64)],
    c: f64,
    mu_bar: Vec<f64>,
) -> Result<ProblemSpec> {
    if sites.is_empty() {
        return Err(Error::Domain("at least one site is required".into()));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::Domain(format!(
            "Lipschitz constant must be nonnegative and finite, got {c}"
        )));
    }
    if mu_bar.len() != sites.len() {
        return Err(Error::Dimension {
            expected: sites.len(),
            got: mu_bar.len(),
        });
    }
    let mut variances = Vec::with_capacity(sites.len());
    let mut distances = Vec::with_capacity(sites.len());
    for (x, var) in sites {
        if x.len() != x0.len() {
            return Err(Error::Dimension {
                expected: x0.len(),
                got: x.len(),
            });
        }
        if !var.is_finite() || *var <= 0.0 {
            return Err(Error::Domain(format!(
                "site variance must be positive, got {var}"
            )));
        }
        variances.push(*var);
        let d2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
        distances.push(d2.sqrt());
    }
    let cov = SpdMatrix::diagonal(&variances)?;
    let slack: Vec<f64> = distances.iter().map(|d| c * d).collect();
    let slack_for_bounds = slack.clone();
    let bounds: BoundsFn = Arc::new(move |mu: &[f64]| {
        let lower = mu
            .iter()
            .zip(&slack_for_bounds)
            .map(|(m, s)| m - s)
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = mu
            .iter()
            .zip(&slack_for_bounds)
            .map(|(m, s)| m + s)
            .fold(f64::INFINITY, f64::min);
        IdentifiedBounds { lower, upper }
    });
    if mu_bar.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSpec(
            "prior location μ̄ must be nonzero".into(),
        ));
    }
    let config = ModelConfig::Evidence {
        x0: x0.to_vec(),
        sites: sites
            .iter()
            .map(|(x, var)| SiteConfig {
                x: x.clone(),
                variance: *var,
            })
            .collect(),
        c,
        mu_bar: mu_bar.clone(),
    };
    let spec = ProblemSpec {
        sigma: cov,
        mu_bar,
        bounds,
        label: "evidence".into(),
        config: Some(config),
    };
    // feasibility is checked eagerly at both prior locations
    spec.bounds_at_mu_bar()?;
    spec.bounds_at_neg_mu_bar()?;
    let normalized = normalize(spec)?;
    let mu_final = normalized.mu_bar.clone();
    let config = match normalized.config.clone() {
        Some(ModelConfig::Evidence { x0, sites, c, .. }) => Some(ModelConfig::Evidence {
            x0,
            sites,
            c,
            mu_bar: mu_final,
        }),
        other => other,
    };
    Ok(ProblemSpec {
        config,
        ..normalized
    })
}

/// The efficient linear index `w = Σ⁻¹ μ̄` and its norm
/// `‖w‖_Σ = √(μ̄ᵀ Σ⁻¹ μ̄)`.
#[derive(Clone, Debug, Serialize)]
pub struct EfficientIndex {
    pub w: Vec<f64>,
    pub norm: f64,
}

pub fn efficient_index(spec: &ProblemSpec) -> Result<EfficientIndex> {
    let w = spec.sigma().solve(spec.mu_bar());
    let norm_sq = dot(&w, spec.mu_bar());
    let check = spec.sigma().quad_form(&w);
    if (norm_sq - check).abs() > 1e-10 * norm_sq.abs().max(1.0) {
        return Err(Error::NotSpd(format!(
            "inconsistent index norm: wᵀμ̄ = {norm_sq} but wᵀΣw = {check}"
        )));
    }
    if norm_sq <= 0.0 {
        return Err(Error::DegenerateSpec(
            "efficient index has nonpositive norm".into(),
        ));
    }
    Ok(EfficientIndex {
        w,
        norm: norm_sq.sqrt(),
    })
}

/// Identification regime of a (normalized) problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    /// Identification strength dominates data informativeness; the zero
    /// threshold on the efficient index is the unique optimum.
    CaseI,
    /// Data informativeness dominates; optima are pinned down by two
    /// acceptance-probability conditions and are typically randomized.
    CaseII,
}

/// Regime classification with the two quantities whose comparison decides it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `upper / (upper - lower)` at `μ̄`; 1 when the point is identified.
    pub ratio: f64,
    /// `Φ(‖w‖_Σ)`.
    pub phi_norm: f64,
}

impl Regime {
    pub fn is_case_i(&self) -> bool {
        self.tag == RegimeTag::CaseI
    }
}

/// Compare the identification ratio against the data informativeness
/// `Φ(‖w‖_Σ)`. A point-identified contrast (`upper == lower`) has ratio 1 by
/// convention: normalization forces the identified value to be positive, and
/// both criteria then select the zero-threshold index rule.
pub fn classify_regime(spec: &ProblemSpec) -> Result<Regime> {
    let b = spec.bounds_at_mu_bar()?;
    let ratio = if b.width() == 0.0 {
        1.0
    } else {
        b.upper / b.width()
    };
    let idx = efficient_index(spec)?;
    let phi_norm = phi_cdf(idx.norm);
    let tag = if ratio >= phi_norm {
        RegimeTag::CaseI
    } else {
        RegimeTag::CaseII
    };
    Ok(Regime {
        tag,
        ratio,
        phi_norm,
    })
}

/// Serializable description of the built-in models; the JSON schema used by
/// the command-line interface.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelConfig {
    Stoye {
        mu_bar: f64,
        sigma: f64,
        k: f64,
    },
    Evidence {
        x0: Vec<f64>,
        sites: Vec<SiteConfig>,
        c: f64,
        mu_bar: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SiteConfig {
    pub x: Vec<f64>,
    pub variance: f64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ProblemSpec> {
        match self {
            ModelConfig::Stoye { mu_bar, sigma, k } => make_stoye(*mu_bar, *sigma, *k),
            ModelConfig::Evidence {
                x0,
                sites,
                c,
                mu_bar,
            } => {
                let sites: Vec<(Vec<f64>, f64)> =
                    sites.iter().map(|s| (s.x.clone(), s.variance)).collect();
                make_evidence_aggregation(x0, &sites, *c, mu_bar.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stoye_bounds_and_normalization() {
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        let b = spec.bounds_at_mu_bar().unwrap();
        assert_eq!((b.lower, b.upper), (-9.0, 11.0));

        let point = make_stoye(1.0, 1.0, 0.0).unwrap();
        let b = point.bounds_at_mu_bar().unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));

        // negative prior location flips
        let flipped = make_stoye(-1.0, 1.0, 1.0).unwrap();
        assert_eq!(flipped.mu_bar(), &[1.0]);
        match flipped.config() {
            Some(ModelConfig::Stoye { mu_bar, .. }) => assert_eq!(*mu_bar, 1.0),
            other => panic!("unexpected config {other:?}"),
        }

        assert!(matches!(
            make_stoye(0.0, 1.0, 1.0),
            Err(Error::DegenerateSpec(_))
        ));
        assert!(make_stoye(1.0, 0.0, 1.0).is_err());
        assert!(make_stoye(1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn evidence_bounds_match_hand_computation() {
        // x0 = 0, sites at ±0.5 with unit variances, C = 1, μ̄ = (0.3, -0.1):
        // lower = max(0.3-0.5, -0.1-0.5) = -0.2, upper = min(0.3+0.5, -0.1+0.5) = 0.4
        let spec = make_evidence_aggregation(
            &[0.0],
            &[(vec![0.5], 1.0), (vec![-0.5], 1.0)],
            1.0,
            vec![0.3, -0.1],
        )
        .unwrap();
        let b = spec.bounds_at_mu_bar().unwrap();
        assert_abs_diff_eq!(b.lower, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 0.4, epsilon = 1e-15);

        // C = 0 with distinct site means leaves an empty identified set
        let err = make_evidence_aggregation(
            &[0.0],
            &[(vec![0.5], 1.0), (vec![-0.5], 1.0)],
            0.0,
            vec![0.3, -0.1],
        );
        assert!(matches!(err, Err(Error::InfeasibleBounds { .. })));

        // one site, C = 0: point identification at the site mean
        let one = make_evidence_aggregation(&[0.0], &[(vec![0.5], 1.0)], 0.0, vec![0.3]).unwrap();
        let b = one.bounds_at_mu_bar().unwrap();
        assert_eq!((b.lower, b.upper), (0.3, 0.3));
    }

    #[test]
    fn bounds_reflect_exactly() {
        let stoye = make_stoye(1.0, 1.0, 10.0).unwrap();
        let evid = make_evidence_aggregation(
            &[0.0, 0.0],
            &[(vec![0.5, 0.1], 0.8), (vec![-0.4, 0.2], 1.3), (vec![0.0, -0.6], 0.5)],
            0.7,
            vec![0.3, -0.1, 0.2],
        )
        .unwrap();
        let mus: Vec<Vec<f64>> = vec![
            vec![-1.0],
            vec![0.25],
            vec![3.5],
        ];
        for mu in &mus {
            let b = stoye.bounds_at(mu).unwrap();
            let neg: Vec<f64> = mu.iter().map(|v| -v).collect();
            let br = stoye.bounds_at(&neg).unwrap();
            assert_eq!(br.upper, -b.lower);
            assert_eq!(br.lower, -b.upper);
        }
        for mu in [
            vec![0.3, -0.1, 0.2],
            vec![-0.2, 0.05, 0.1],
            vec![0.11, 0.02, -0.03],
        ] {
            let b = evid.bounds_at(&mu).unwrap();
            let neg: Vec<f64> = mu.iter().map(|v| -v).collect();
            let br = evid.bounds_at(&neg).unwrap();
            assert_eq!(br.upper, -b.lower);
            assert_eq!(br.lower, -b.upper);
        }

        // reflected Stoye bounds at -μ̄ from the worked example
        let b = stoye.bounds_at(&[-1.0]).unwrap();
        assert_eq!((b.lower, b.upper), (-11.0, 9.0));
    }

    #[test]
    fn efficient_index_examples() {
        let spec = make_stoye(1.0, 1.0, 0.5).unwrap();
        let idx = efficient_index(&spec).unwrap();
        assert_abs_diff_eq!(idx.w[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.norm, 1.0, epsilon = 1e-14);

        // w = μ̄/σ², ‖w‖ = μ̄/σ
        let spec = make_stoye(2.0, 2.0, 0.5).unwrap();
        let idx = efficient_index(&spec).unwrap();
        assert_abs_diff_eq!(idx.w[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(idx.norm, 1.0, epsilon = 1e-14);

        let spec = ProblemSpec::with_bounds(
            SpdMatrix::identity(2),
            vec![1.0, 0.0],
            "embedded",
            Arc::new(|mu: &[f64]| IdentifiedBounds {
                lower: mu[0] - 10.0,
                upper: mu[0] + 10.0,
            }),
        )
        .unwrap();
        let idx = efficient_index(&spec).unwrap();
        assert_eq!(idx.w, vec![1.0, 0.0]);
        assert_abs_diff_eq!(idx.norm, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn regime_classification() {
        let phi1 = 0.8413447460685429;

        let case_i = classify_regime(&make_stoye(1.0, 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(case_i.tag, RegimeTag::CaseI);
        assert_abs_diff_eq!(case_i.ratio, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(case_i.phi_norm, phi1, epsilon = 1e-12);

        let case_ii = classify_regime(&make_stoye(1.0, 1.0, 10.0).unwrap()).unwrap();
        assert_eq!(case_ii.tag, RegimeTag::CaseII);
        assert_abs_diff_eq!(case_ii.ratio, 0.55, epsilon = 1e-14);

        let point = classify_regime(&make_stoye(1.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(point.tag, RegimeTag::CaseI);
        assert_eq!(point.ratio, 1.0);
    }

    #[test]
    fn regime_is_scale_consistent() {
        for scale in [0.5, 2.0, 7.3] {
            let base = classify_regime(&make_stoye(1.0, 1.0, 2.0).unwrap()).unwrap();
            let scaled = classify_regime(&make_stoye(scale, scale, 2.0 * scale).unwrap()).unwrap();
            assert_abs_diff_eq!(base.phi_norm, scaled.phi_norm, epsilon = 1e-13);
            // k scales along, so the ratio is unchanged too
            assert_abs_diff_eq!(base.ratio, scaled.ratio, epsilon = 1e-13);
        }
    }

    #[test]
    fn knife_edge_is_rejected() {
        // custom bounds with upper + lower = 0 at both ±μ̄
        let err = ProblemSpec::with_bounds(
            SpdMatrix::scalar(1.0).unwrap(),
            vec![1.0],
            "knife",
            Arc::new(|_: &[f64]| IdentifiedBounds {
                lower: -1.0,
                upper: 1.0,
            }),
        );
        assert!(matches!(err, Err(Error::KnifeEdge { .. })));
    }

    #[test]
    fn config_round_trips_through_json() {
        let spec = make_stoye(1.0, 1.0, 10.0).unwrap();
        let json = serde_json::to_string(spec.config().unwrap()).unwrap();
        let back: ModelConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, spec.config().unwrap());
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.mu_bar(), spec.mu_bar());
    }
}
