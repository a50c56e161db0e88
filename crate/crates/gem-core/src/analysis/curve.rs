use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// What an [`ErrorCurve`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    StrongVsReference,
    Coupling,
    OneStepBias,
    OneStepCentered,
}

impl ErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::StrongVsReference => "strong-vs-reference",
            ErrorKind::Coupling => "coupling",
            ErrorKind::OneStepBias => "one-step-bias",
            ErrorKind::OneStepCentered => "one-step-centered",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [Self::StrongVsReference, Self::Coupling, Self::OneStepBias, Self::OneStepCentered]
            .into_iter()
            .find(|k| k.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEntry {
    pub h: f64,
    pub error: f64,
    pub stderr: f64,
    pub n_paths: usize,
}

/// Error estimates against step size. Entries have strictly decreasing `h`,
/// nonnegative errors and at least [`ErrorCurve::MIN_PATHS`] paths each.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    kind: ErrorKind,
    p: f64,
    entries: Vec<CurveEntry>,
}

impl ErrorCurve {
    pub const MIN_PATHS: usize = 32;

    pub fn new(kind: ErrorKind, p: f64, entries: Vec<CurveEntry>) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter { name: "p" });
        }
        for (i, e) in entries.iter().enumerate() {
            let bad = !(e.h > 0.0)
                || !e.h.is_finite()
                || !(e.error >= 0.0)
                || !e.error.is_finite()
                || !(e.stderr >= 0.0)
                || e.n_paths < Self::MIN_PATHS
                || (i > 0 && !(e.h < entries[i - 1].h));
            if bad {
                return Err(Error::DegenerateEntry { index: i });
            }
        }
        Ok(ErrorCurve { kind, p, entries })
    }

    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn entries(&self) -> &[CurveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when each refinement raises the error by at most `k` combined
    /// standard errors.
    pub fn nonincreasing_within(&self, k: f64) -> bool {
        self.entries.windows(2).all(|w| {
            let se = (w[0].stderr * w[0].stderr + w[1].stderr * w[1].stderr).sqrt();
            w[1].error <= w[0].error + k * se
        })
    }
}

/// Least-squares fit of `log error = slope·log h + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_order(curve: &ErrorCurve) -> Result<OrderFit> {
    let entries = curve.entries();
    if entries.len() < 4 {
        return Err(Error::TooFewEntries { needed: 4, got: entries.len() });
    }
    if let Some(index) = entries.iter().position(|e| !(e.error > 0.0)) {
        return Err(Error::DegenerateEntry { index });
    }
    let xs: Vec<f64> = entries.iter().map(|e| e.h.ln()).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.error.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> OrderFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    OrderFit { slope, intercept, r_squared, residuals }
}
