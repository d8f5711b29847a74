//! One-dimensional Gaussian beliefs and the truncated-Gaussian moment
//! matching used by the two-team skill updates.
//!
//! Beliefs are stored in moment form (mean, variance). Products and
//! quotients are computed in natural-parameter space (precision and
//! precision-adjusted mean) so the uninformative belief, whose precision is
//! zero, behaves as an identity without any infinities entering the
//! arithmetic.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability below which a conditioning event is treated as impossible.
pub const MIN_EVENT_PROBABILITY: f64 = 1e-300;

/// Intervals narrower than this (in standard deviations) use a local
/// expansion for the conditioned moments.
const NARROW_INTERVAL: f64 = 1e-4;

/// Standard normal density.
pub fn std_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Natural log of the standard normal density.
pub fn std_ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// Standard normal CDF via the complementary error function. Accurate in
/// both tails and exactly symmetric up to the accuracy of `erfc`.
pub fn std_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Rational approximation (relative error ~1e-9) refined by one Halley
/// step against [`std_cdf`].
pub fn std_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement; in the upper tail work with the survival function
    // so the residual keeps its precision.
    let e = if x > 0.0 {
        (1.0 - p) - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    } else {
        std_cdf(x) - p
    };
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Probability mass of a standard normal on `[lo, hi]`, computed on the side
/// of zero where no cancellation occurs.
pub fn std_interval_probability(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        std_cdf(-lo) - std_cdf(-hi)
    } else {
        std_cdf(hi) - std_cdf(lo)
    }
}

/// A one-dimensional Gaussian belief.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    mean: f64,
    variance: f64,
}

impl Gaussian {
    /// The belief carrying no information (zero precision).
    pub const UNINFORMATIVE: Gaussian = Gaussian {
        mean: 0.0,
        variance: f64::INFINITY,
    };

    pub const STANDARD: Gaussian = Gaussian {
        mean: 0.0,
        variance: 1.0,
    };

    /// A proper belief. Rejects non-finite means and non-positive variances.
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid_parameter("mean", format!("must be finite, got {mean}")));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid_parameter(
                "variance",
                format!("must be positive and finite, got {variance}"),
            ));
        }
        Ok(Gaussian { mean, variance })
    }

    /// Builds a belief from natural parameters. Zero precision gives
    /// [`Gaussian::UNINFORMATIVE`]; negative precision gives an improper
    /// belief, which only ever exists transiently inside message passing.
    pub fn from_natural(precision: f64, precision_mean: f64) -> Self {
        if precision == 0.0 {
            Gaussian::UNINFORMATIVE
        } else {
            Gaussian {
                mean: precision_mean / precision,
                variance: 1.0 / precision,
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn precision(&self) -> f64 {
        if self.variance.is_infinite() {
            0.0
        } else {
            1.0 / self.variance
        }
    }

    pub fn precision_mean(&self) -> f64 {
        if self.variance.is_infinite() {
            0.0
        } else {
            self.mean / self.variance
        }
    }

    pub fn is_uninformative(&self) -> bool {
        self.variance.is_infinite()
    }

    pub fn is_proper(&self) -> bool {
        self.mean.is_finite() && self.variance > 0.0 && self.variance.is_finite()
    }

    /// Normalised product of two densities.
    pub fn multiply(&self, other: &Gaussian) -> Gaussian {
        Gaussian::from_natural(
            self.precision() + other.precision(),
            self.precision_mean() + other.precision_mean(),
        )
    }

    /// Normalised quotient of two densities (message exclusion).
    pub fn divide(&self, other: &Gaussian) -> Gaussian {
        Gaussian::from_natural(
            self.precision() - other.precision(),
            self.precision_mean() - other.precision_mean(),
        )
    }

    /// Distribution of the sum of two independent variables.
    pub fn add(&self, other: &Gaussian) -> Gaussian {
        Gaussian {
            mean: self.mean + other.mean,
            variance: self.variance + other.variance,
        }
    }

    /// Distribution of `scale * x + offset`.
    pub fn affine(&self, scale: f64, offset: f64) -> Gaussian {
        Gaussian {
            mean: scale * self.mean + offset,
            variance: scale * scale * self.variance,
        }
    }

    /// Same mean, variance widened by `extra` (dynamics noise).
    pub fn widen(&self, extra: f64) -> Gaussian {
        Gaussian {
            mean: self.mean,
            variance: self.variance + extra,
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        std_cdf((x - self.mean) / self.std_dev())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        std_pdf((x - self.mean) / self.std_dev()) / self.std_dev()
    }
}

/// `Φ((x - mean) / σ)` for a proper belief.
pub fn cdf(x: f64, g: &Gaussian) -> f64 {
    g.cdf(x)
}

/// Which event a belief is conditioned on in [`truncate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationMode {
    /// `x > threshold + margin`
    Greater,
    /// `|x - threshold| <= margin`
    Within,
}

/// Mean-shift and variance-reduction factors of a standardised truncation.
///
/// For a standard normal conditioned on the event, the posterior mean is `v`
/// and the posterior variance is `1 - w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correction {
    pub v: f64,
    pub w: f64,
    /// `1 - w`, computed without cancellation where possible.
    pub variance_scale: f64,
}

/// Correction for `Z > -t + eps` where `Z` is standard normal, i.e. the
/// classic win-case functions with `t` the standardised mean difference.
pub fn correction_greater(t: f64, eps: f64) -> Result<Correction> {
    let x = t - eps;
    let survival = std_cdf(x);
    if !(survival >= MIN_EVENT_PROBABILITY) {
        return Err(Error::ImpossibleObservation(format!(
            "tail probability {survival:e} at t={t}, eps={eps}"
        )));
    }
    let v = (std_ln_pdf(x) - survival.ln()).exp();
    let w = v * (v + x);
    Ok(Correction {
        v,
        w,
        variance_scale: 1.0 - w,
    })
}

/// Correction for `|Z + t| <= eps` where `Z` is standard normal, i.e. the
/// classic draw-case functions.
pub fn correction_within(t: f64, eps: f64) -> Result<Correction> {
    if eps.is_infinite() {
        return Ok(Correction {
            v: 0.0,
            w: 0.0,
            variance_scale: 1.0,
        });
    }
    let lo = -eps - t;
    let hi = eps - t;
    let width = hi - lo;
    if width < NARROW_INTERVAL {
        // Second-order expansion of the tilted uniform on a narrow interval.
        let mid = 0.5 * (lo + hi);
        let h2 = width * width;
        if width <= 0.0 || std_pdf(mid) * width < MIN_EVENT_PROBABILITY {
            return Err(Error::ImpossibleObservation(format!(
                "interval of width {width:e} at t={t}"
            )));
        }
        let mean = mid - mid * h2 / 12.0;
        let variance_scale = h2 / 12.0;
        return Ok(Correction {
            v: mean,
            w: 1.0 - variance_scale,
            variance_scale,
        });
    }
    let z = std_interval_probability(lo, hi);
    if !(z >= MIN_EVENT_PROBABILITY) {
        return Err(Error::ImpossibleObservation(format!(
            "interval probability {z:e} at t={t}, eps={eps}"
        )));
    }
    let (pdf_lo, pdf_hi) = (std_pdf(lo), std_pdf(hi));
    let v = (pdf_lo - pdf_hi) / z;
    let variance_scale = 1.0 + (lo * pdf_lo - hi * pdf_hi) / z - v * v;
    Ok(Correction {
        v,
        w: 1.0 - variance_scale,
        variance_scale,
    })
}

/// Moment-matched Gaussian of `prior` conditioned on `x > threshold + margin`
/// ([`TruncationMode::Greater`]) or `|x - threshold| <= margin`
/// ([`TruncationMode::Within`]).
pub fn truncate(
    prior: &Gaussian,
    threshold: f64,
    margin: f64,
    mode: TruncationMode,
) -> Result<Gaussian> {
    if !prior.is_proper() {
        return Err(Error::invalid_parameter("prior", "must be a proper belief"));
    }
    if !(margin >= 0.0) {
        return Err(Error::invalid_parameter("margin", format!("must be >= 0, got {margin}")));
    }
    let sigma = prior.std_dev();
    let t = (prior.mean - threshold) / sigma;
    let eps = margin / sigma;
    let c = match mode {
        TruncationMode::Greater => correction_greater(t, eps)?,
        TruncationMode::Within => correction_within(t, eps)?,
    };
    let variance = prior.variance * c.variance_scale;
    if !(variance > 0.0) {
        return Err(Error::ImpossibleObservation(format!(
            "posterior variance collapsed at t={t}, eps={eps}"
        )));
    }
    Ok(Gaussian {
        mean: prior.mean + sigma * c.v,
        variance,
    })
}

/// Draw margin for a two-sided comparison between `players` independent
/// performances of noise `beta`, chosen so a draw has probability
/// `draw_probability` when skills are equal.
pub fn draw_margin(draw_probability: f64, beta: f64, players: usize) -> f64 {
    std_ppf(0.5 * (draw_probability + 1.0)) * (players as f64).sqrt() * beta
}
