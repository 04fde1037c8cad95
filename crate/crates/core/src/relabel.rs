//! Observed probabilistic gaps and Bayes-consistent relabelling.
//!
//! With unlabelled points read as negatives, a positive at `x` loses its
//! label with probability `rho(x)`, which shrinks the gap to
//!
//! ```text
//! observed = (1 - rho) * (gap + 1) - 1
//! ```
//!
//! Negatives are untouched, so an unlabelled point with observed gap above
//! zero must be a Bayes positive, and one at or below `l = -rho` (the value a
//! point on the Bayes boundary is pushed to) must be a Bayes negative. Points
//! in between are ambiguous and left out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_label, PgpuError, Result};

/// `P(~Y=+1|x) - P(~Y=-1|x)` for each instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gaps: Vec<f64>,
}

impl GapEstimate {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }
}

pub fn observed_gap(p_pos: &[f64]) -> Result<GapEstimate> {
    let gaps = p_pos
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok(2.0 * p - 1.0)
            } else {
                Err(PgpuError::ProbabilityOutOfRange(p))
            }
        })
        .collect::<Result<_>>()?;
    Ok(GapEstimate { gaps })
}

/// Observed gap produced by flipping positives at rate `rho_plus`.
#[inline]
pub fn forward_gap(true_gap: f64, rho_plus: f64) -> f64 {
    (1.0 - rho_plus) * (true_gap + 1.0) - 1.0
}

const BOUNDARY_MARGIN: f64 = 1e-6;

fn clamp_boundary(l: f64) -> f64 {
    l.clamp(-1.0 + BOUNDARY_MARGIN, -BOUNDARY_MARGIN)
}

/// Mean of the `n_prime` smallest gaps among observed positives, clamped
/// into the open interval `(-1, 0)`.
pub fn estimate_boundary_min(gaps: &GapEstimate, observed: &[i8], n_prime: usize) -> Result<f64> {
    check_lengths(gaps, observed)?;
    if n_prime == 0 {
        return Err(PgpuError::InvalidParameter("n_prime must be positive".into()));
    }
    let mut positive: Vec<f64> = gaps
        .gaps
        .iter()
        .zip(observed)
        .filter(|(_, &s)| s == 1)
        .map(|(&g, _)| g)
        .collect();
    if positive.len() < n_prime {
        return Err(PgpuError::NotEnoughPositives {
            needed: n_prime,
            available: positive.len(),
        });
    }
    positive.sort_by(f64::total_cmp);
    let mean = positive[..n_prime].iter().sum::<f64>() / n_prime as f64;
    Ok(clamp_boundary(mean))
}

fn check_lengths(gaps: &GapEstimate, observed: &[i8]) -> Result<()> {
    if gaps.len() != observed.len() {
        return Err(PgpuError::LengthMismatch {
            what: "observed labels",
            expected: gaps.len(),
            actual: observed.len(),
        });
    }
    observed.iter().try_for_each(|&s| check_label(s))
}

/// Partition of a PU sample into relabelled positives, relabelled negatives
/// and the discarded ambiguous band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelabelResult {
    pub boundary_l: f64,
    pub positive_idx: Vec<usize>,
    pub negative_idx: Vec<usize>,
    pub discarded_idx: Vec<usize>,
}

impl RelabelResult {
    /// Selected indices in ascending order with their new labels.
    pub fn selected(&self) -> (Vec<usize>, Vec<i8>) {
        let mut sel: Vec<(usize, i8)> = self
            .positive_idx
            .iter()
            .map(|&i| (i, 1))
            .chain(self.negative_idx.iter().map(|&i| (i, -1)))
            .collect();
        sel.sort_unstable();
        sel.into_iter().unzip()
    }

    pub fn n_selected(&self) -> usize {
        self.positive_idx.len() + self.negative_idx.len()
    }
}

pub fn relabel(gaps: &GapEstimate, observed: &[i8], boundary_l: f64) -> Result<RelabelResult> {
    check_lengths(gaps, observed)?;
    if !(boundary_l > -1.0 && boundary_l < 0.0) {
        return Err(PgpuError::InvalidParameter(format!(
            "boundary l must lie in (-1, 0), got {boundary_l}"
        )));
    }
    let mut out = RelabelResult {
        boundary_l,
        positive_idx: Vec::new(),
        negative_idx: Vec::new(),
        discarded_idx: Vec::new(),
    };
    for (i, (&g, &s)) in gaps.gaps.iter().zip(observed).enumerate() {
        if s == 1 || g > 0.0 {
            out.positive_idx.push(i);
        } else if g <= boundary_l {
            out.negative_idx.push(i);
        } else {
            out.discarded_idx.push(i);
        }
    }
    Ok(out)
}

/// Instance-dependent mislabel rate of positives as a function of the gap.
///
/// Every family is zero on the negative side (`gap < 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FlipRateSpec {
    /// `alpha / (alpha + gap * (1 + beta))`
    Inverse { alpha: f64, beta: f64 },
    /// `alpha * (1 - gap)`
    Linear { alpha: f64 },
    Constant { alpha: f64 },
}

impl FlipRateSpec {
    pub fn rate(&self, gap: f64) -> f64 {
        if gap < 0.0 {
            return 0.0;
        }
        let rho = match *self {
            FlipRateSpec::Inverse { alpha, beta } => {
                let denom = alpha + gap * (1.0 + beta);
                if denom > 0.0 {
                    alpha / denom
                } else {
                    0.0
                }
            }
            FlipRateSpec::Linear { alpha } => alpha * (1.0 - gap),
            FlipRateSpec::Constant { alpha } => alpha,
        };
        rho.clamp(0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            FlipRateSpec::Inverse { alpha, beta } => alpha > 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite(),
            FlipRateSpec::Linear { alpha } | FlipRateSpec::Constant { alpha } => (0.0..=1.0).contains(&alpha),
        };
        if ok {
            Ok(())
        } else {
            Err(PgpuError::InvalidParameter(format!("invalid flip setting {self}")))
        }
    }

    /// The 17 benchmark settings: 9 inverse, 5 linear, 3 constant.
    pub fn benchmark_settings() -> Vec<FlipRateSpec> {
        let mut out = Vec::with_capacity(17);
        for alpha in [0.1, 0.2, 0.3] {
            for beta in [0.5, 1.0, 1.5] {
                out.push(FlipRateSpec::Inverse { alpha, beta });
            }
        }
        for alpha in [0.2, 0.4, 0.6, 0.8, 1.0] {
            out.push(FlipRateSpec::Linear { alpha });
        }
        for alpha in [0.1, 0.2, 0.3] {
            out.push(FlipRateSpec::Constant { alpha });
        }
        out
    }
}

impl fmt::Display for FlipRateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlipRateSpec::Inverse { alpha, beta } => write!(f, "inverse:{alpha},{beta}"),
            FlipRateSpec::Linear { alpha } => write!(f, "linear:{alpha}"),
            FlipRateSpec::Constant { alpha } => write!(f, "constant:{alpha}"),
        }
    }
}

impl FromStr for FlipRateSpec {
    type Err = PgpuError;

    /// Parses `inverse:a,b`, `linear:a` or `constant:a`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || PgpuError::InvalidParameter(format!("cannot parse flip setting '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match (kind.trim(), nums.as_slice()) {
            ("inverse", [alpha, beta]) => FlipRateSpec::Inverse { alpha: *alpha, beta: *beta },
            ("linear", [alpha]) => FlipRateSpec::Linear { alpha: *alpha },
            ("constant", [alpha]) => FlipRateSpec::Constant { alpha: *alpha },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}
