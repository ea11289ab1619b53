//! The scalar nonlinearity `f` of `F(u) = -u'' + f(u)`.
//!
//! A [`Nonlinearity`] carries `f`, `f'` and `f''` as plain maps together with
//! the open range of `f'`. The range is exact for the built-in families and
//! estimated by sampling (and flagged as uncertified) for custom functions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric family tag. This is also the JSON form of a nonlinearity,
/// e.g. `{"family":"softplus","a":-12.0,"b":3.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    /// `f(u) = c u`.
    Linear { c: f64 },
    /// `f(u) = a u + (b - a) log(1 + e^u)`; `f'` sweeps the open interval between `a` and `b`.
    Softplus { a: f64, b: f64 },
    /// `f(u) = e^u`.
    Exponential,
    /// `f(u) = c u^2`.
    Quadratic { c: f64 },
    /// User-supplied maps; not representable in JSON.
    #[serde(skip)]
    Custom,
}

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
struct CustomMaps {
    f: ScalarMap,
    f1: ScalarMap,
    f2: ScalarMap,
}

/// Range of `f'` as an interval of extended reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeRange {
    pub inf: f64,
    pub sup: f64,
    /// False when the bounds were estimated by sampling.
    pub certified: bool,
}

impl DerivativeRange {
    /// Open-interval membership `inf < x < sup`.
    pub fn contains_interior(&self, x: f64) -> bool {
        self.inf < x && x < self.sup
    }

    pub fn is_degenerate(&self) -> bool {
        self.inf == self.sup
    }
}

/// Sign structure of `f''` known analytically for the built-in families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    StrictlyConvex,
    StrictlyConcave,
    /// `f'' ≡ 0`.
    Flat,
}

impl Curvature {
    /// Sign of `f''`: +1, -1 or 0.
    pub fn sign(self) -> f64 {
        match self {
            Curvature::StrictlyConvex => 1.0,
            Curvature::StrictlyConcave => -1.0,
            Curvature::Flat => 0.0,
        }
    }
}

/// Status of the degenerate-case hypotheses (isolated root of `f''` at 0 and
/// `f'(0) ≠ -j²`) needed when `f''(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `f''(0) ≠ 0`, so the degenerate hypotheses are not needed.
    NotNeeded,
    Holds,
    Fails,
    /// Cannot be decided numerically (custom `f` with `f''(0) = 0`).
    Unknown,
}

/// Result of [`Nonlinearity::classify`].
///
/// For the built-in families every flag is exact. For custom functions the
/// convexity flags come from sampling `f''` and are advisory only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub globally_convex: bool,
    pub globally_concave: bool,
    pub f2_at_zero_nonzero: bool,
    pub theorem_b_degenerate: Hypothesis,
    pub theorem_c_applicable: bool,
    pub certified: bool,
}

/// The nonlinearity `f` with its first two derivatives.
#[derive(Clone)]
pub struct Nonlinearity {
    family: Family,
    custom: Option<CustomMaps>,
    range: DerivativeRange,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("family", &self.family)
            .field("range", &self.range)
            .finish()
    }
}

#[inline]
fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^u)` without overflow.
#[inline]
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {x}"
        )))
    }
}

const CUSTOM_RANGE_PROBE: (f64, f64) = (-20.0, 20.0);
const CUSTOM_RANGE_SAMPLES: usize = 2001;

impl Nonlinearity {
    /// Builds a built-in family. `Family::Custom` is rejected here; use
    /// [`Nonlinearity::custom`].
    pub fn new(family: Family) -> Result<Self> {
        let range = match family {
            Family::Linear { c } => {
                check_finite("c", c)?;
                DerivativeRange {
                    inf: c,
                    sup: c,
                    certified: true,
                }
            }
            Family::Softplus { a, b } => {
                check_finite("a", a)?;
                check_finite("b", b)?;
                if a == b {
                    return Err(Error::InvalidParameter(
                        "softplus requires a != b (a = b makes f'' vanish identically)".into(),
                    ));
                }
                DerivativeRange {
                    inf: a.min(b),
                    sup: a.max(b),
                    certified: true,
                }
            }
            Family::Exponential => DerivativeRange {
                inf: 0.0,
                sup: f64::INFINITY,
                certified: true,
            },
            Family::Quadratic { c } => {
                check_finite("c", c)?;
                if c == 0.0 {
                    DerivativeRange {
                        inf: 0.0,
                        sup: 0.0,
                        certified: true,
                    }
                } else {
                    DerivativeRange {
                        inf: f64::NEG_INFINITY,
                        sup: f64::INFINITY,
                        certified: true,
                    }
                }
            }
            Family::Custom => {
                return Err(Error::InvalidParameter(
                    "custom nonlinearities are built with Nonlinearity::custom".into(),
                ))
            }
        };
        Ok(Self {
            family,
            custom: None,
            range,
        })
    }

    pub fn linear(c: f64) -> Result<Self> {
        Self::new(Family::Linear { c })
    }

    pub fn softplus(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::Softplus { a, b })
    }

    pub fn exponential() -> Self {
        Self::new(Family::Exponential).expect("exponential has no parameters")
    }

    pub fn quadratic(c: f64) -> Result<Self> {
        Self::new(Family::Quadratic { c })
    }

    /// Wraps user-supplied `f`, `f'`, `f''`. No consistency between the three
    /// maps is checked. The range of `f'` is estimated on `[-20, 20]` and
    /// marked uncertified.
    pub fn custom<F, F1, F2>(f: F, f1: F1, f2: F2) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = CUSTOM_RANGE_PROBE;
        let (inf, sup) = probe_points(lo, hi, CUSTOM_RANGE_SAMPLES)
            .map(&f1)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
                (a.min(y), b.max(y))
            });
        Self {
            family: Family::Custom,
            custom: Some(CustomMaps {
                f: Arc::new(f),
                f1: Arc::new(f1),
                f2: Arc::new(f2),
            }),
            range: DerivativeRange {
                inf,
                sup,
                certified: false,
            },
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn derivative_range(&self) -> DerivativeRange {
        self.range
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self.family {
            Family::Linear { c } => c * u,
            Family::Softplus { a, b } => a * u + (b - a) * softplus(u),
            Family::Exponential => u.exp(),
            Family::Quadratic { c } => c * u * u,
            Family::Custom => (self.maps().f)(u),
        }
    }

    #[inline]
    pub fn f1(&self, u: f64) -> f64 {
        match self.family {
            Family::Linear { c } => c,
            Family::Softplus { a, b } => a + (b - a) * logistic(u),
            Family::Exponential => u.exp(),
            Family::Quadratic { c } => 2.0 * c * u,
            Family::Custom => (self.maps().f1)(u),
        }
    }

    #[inline]
    pub fn f2(&self, u: f64) -> f64 {
        match self.family {
            Family::Linear { .. } => 0.0,
            // σ(u)(1 - σ(u)) = σ(u)σ(-u), which avoids cancellation in the tails.
            Family::Softplus { a, b } => (b - a) * logistic(u) * logistic(-u),
            Family::Exponential => u.exp(),
            Family::Quadratic { c } => 2.0 * c,
            Family::Custom => (self.maps().f2)(u),
        }
    }

    fn maps(&self) -> &CustomMaps {
        self.custom
            .as_ref()
            .expect("custom family always carries its maps")
    }

    /// Analytic sign structure of `f''`; `None` for custom functions.
    pub fn curvature(&self) -> Option<Curvature> {
        match self.family {
            Family::Linear { .. } => Some(Curvature::Flat),
            Family::Softplus { a, b } if b > a => Some(Curvature::StrictlyConvex),
            Family::Softplus { .. } => Some(Curvature::StrictlyConcave),
            Family::Exponential => Some(Curvature::StrictlyConvex),
            Family::Quadratic { c } if c > 0.0 => Some(Curvature::StrictlyConvex),
            Family::Quadratic { c } if c < 0.0 => Some(Curvature::StrictlyConcave),
            Family::Quadratic { .. } => Some(Curvature::Flat),
            Family::Custom => None,
        }
    }

    /// Classifies `f` against the convexity hypotheses. The probe interval is
    /// only used for custom functions, where `f''` is sampled at
    /// `probe_count` equispaced points.
    pub fn classify(
        &self,
        probe_interval: (f64, f64),
        probe_count: usize,
    ) -> Result<ConvexityReport> {
        if probe_count < 3 {
            return Err(Error::InvalidParameter(format!(
                "probe_count must be at least 3, got {probe_count}"
            )));
        }
        let (lo, hi) = probe_interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bad probe interval [{lo}, {hi}]"
            )));
        }

        let f2_zero = self.f2(0.0);
        let (convex, concave, certified) = match self.curvature() {
            Some(c) => (
                c == Curvature::StrictlyConvex,
                c == Curvature::StrictlyConcave,
                true,
            ),
            None => {
                let (mut all_pos, mut all_neg) = (true, true);
                for u in probe_points(lo, hi, probe_count) {
                    let s = self.f2(u);
                    all_pos &= s > 0.0;
                    all_neg &= s < 0.0;
                }
                (all_pos, all_neg, false)
            }
        };

        let theorem_b_degenerate = if f2_zero != 0.0 {
            Hypothesis::NotNeeded
        } else {
            let c = self.f1(0.0);
            let jmax = ((c.abs() + 1.0).sqrt()).floor() as u64;
            let hits_eigenvalue = (1..=jmax).any(|j| {
                let e = -((j * j) as f64);
                (c - e).abs() <= 1e-12 * e.abs()
            });
            // (a): the root 0 of f'' must be isolated.
            let isolated = match self.curvature() {
                Some(Curvature::Flat) => Some(false),
                Some(_) => Some(true),
                None => None,
            };
            match (isolated, hits_eigenvalue) {
                (_, true) | (Some(false), _) => Hypothesis::Fails,
                (Some(true), false) => Hypothesis::Holds,
                (None, false) => Hypothesis::Unknown,
            }
        };

        Ok(ConvexityReport {
            globally_convex: convex,
            globally_concave: concave,
            f2_at_zero_nonzero: f2_zero != 0.0,
            theorem_b_degenerate,
            theorem_c_applicable: convex || concave,
            certified,
        })
    }

    /// Sign of `f''` when it is constant (+1 convex, -1 concave), otherwise
    /// a `NotApplicable` error. Custom functions are sampled on `[-20, 20]`.
    pub fn strict_curvature_sign(&self) -> Result<f64> {
        let report = self.classify(CUSTOM_RANGE_PROBE, 401)?;
        if report.globally_convex {
            Ok(1.0)
        } else if report.globally_concave {
            Ok(-1.0)
        } else {
            Err(Error::NotApplicable(format!(
                "{:?} is neither strictly convex nor strictly concave",
                self.family
            )))
        }
    }
}

fn probe_points(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(move |i| {
        if i + 1 == count {
            hi
        } else {
            lo + step * i as f64
        }
    })
}
