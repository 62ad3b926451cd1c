//! Capacitance coefficients of two spheres.
//!
//! Convention: `C_ij = -∫_{∂D_i} ∂V_j/∂ν dσ` where `V_j` is the harmonic
//! potential equal to 1 on sphere `j` and 0 on the other; an isolated sphere
//! of radius `r` has capacitance `4 π r`.
//!
//! The exact coefficients are the bispherical series
//!
//! ```text
//! C11 =  8πα Σ e^{-(2n+1)ξ1} / (1 - e^{-(2n+1)(ξ1+ξ2)})
//! C22 =  8πα Σ e^{-(2n+1)ξ2} / (1 - e^{-(2n+1)(ξ1+ξ2)})
//! C12 = -8πα Σ 1 / (e^{(2n+1)(ξ1+ξ2)} - 1)
//! ```
//!
//! written in decaying form with `expm1` denominators. Row sums
//! `C_i1 + C_i2` are summed from their own positive series so that the
//! small eigenvalue of the rescaled matrix never goes through a
//! cancellation of two `|log ε|`-sized numbers.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{BisphericalFrame, ResonatorPair};
use crate::specfun::{digamma, digamma_series_tail, EULER_GAMMA};
use crate::summation::CompensatedSum;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 100_000_000;

/// Truncation controls shared by every series in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Absolute tolerance on the certified tail.
    pub tol: f64,
    /// Largest admissible number of terms.
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("tol", self.tol)?;
        if self.max_terms == 0 {
            return Err(Error::InvalidInput("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceMatrix {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
    /// `[C11 + C12, C21 + C22]`, the charge on each sphere when both are
    /// held at unit potential.
    pub row_sums: [f64; 2],
    /// Number of series terms (or image reflections) used.
    pub n_terms: usize,
    /// Absolute truncation-error estimate for each entry.
    pub tail_bound: f64,
}

impl CapacitanceMatrix {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.c11, self.c12], [self.c21, self.c22]]
    }

    /// Entry `C_ij`, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix()[i - 1][j - 1]
    }
}

/// `C_ij / |D_i|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledCapacitance {
    pub ct11: f64,
    pub ct12: f64,
    pub ct21: f64,
    pub ct22: f64,
    /// `[ct11 + ct12, ct21 + ct22]`.
    pub row_sums: [f64; 2],
}

impl RescaledCapacitance {
    /// From the four entries alone; row sums are formed by addition.
    pub fn from_entries(ct11: f64, ct12: f64, ct21: f64, ct22: f64) -> Self {
        Self {
            ct11,
            ct12,
            ct21,
            ct22,
            row_sums: [ct11 + ct12, ct21 + ct22],
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.ct11, self.ct12], [self.ct21, self.ct22]]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix()[i - 1][j - 1]
    }

    pub fn trace(&self) -> f64 {
        self.ct11 + self.ct22
    }

    /// Determinant through the row sums: `ct11 s2 + ct22 s1 - s1 s2`.
    pub fn determinant(&self) -> f64 {
        let [s1, s2] = self.row_sums;
        self.ct11 * s2 + self.ct22 * s1 - s1 * s2
    }
}

/// Close-gap correction terms `σ_i`, with `C̃_i1 + C̃_i2 = σ_i + O(√ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaTerms {
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Tail of `Σ_{n ≥ n0} e^{-(2n+1) decay} / (1 - e^{-(2n+1) s})`.
fn geometric_tail(n0: usize, decay: f64, s: f64) -> f64 {
    let m = (2 * n0 + 1) as f64;
    (-m * decay).exp() / ((-(-m * s).exp_m1()) * (-(-2.0 * decay).exp_m1()))
}

fn estimated_terms(decay: f64, s: f64, scale: f64, tol: f64) -> f64 {
    // crude bound using 1 - e^{-ms} >= 1 - e^{-s}
    let lead = scale / (tol * (-(-s).exp_m1()) * (-(-2.0 * decay).exp_m1()));
    if lead <= 1.0 {
        1.0
    } else {
        (lead.ln() / decay - 1.0) / 2.0 + 1.0
    }
}

/// Exact capacitance matrix from the bispherical series.
///
/// Terms are added until both the current term and the closed-form tail
/// bound fall below `opts.tol` (absolute, on each entry).
pub fn capacitance_exact(
    frame: &BisphericalFrame,
    opts: &SeriesOptions,
) -> Result<CapacitanceMatrix> {
    opts.validate()?;
    let (x1, x2) = (frame.xi1, frame.xi2);
    let s = x1 + x2;
    let scale = 8.0 * PI * frame.alpha;
    let slowest = x1.min(x2);
    let needed = estimated_terms(slowest, s, scale, opts.tol);
    if !needed.is_finite() || needed > opts.max_terms as f64 {
        return Err(Error::TruncationCap {
            needed,
            cap: opts.max_terms,
            tol: opts.tol,
        });
    }

    let (mut c11, mut c22, mut c12) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    let mut n = 0usize;
    let tail = loop {
        let m = (2 * n + 1) as f64;
        let inv_den = 1.0 / (-(-m * s).exp_m1());
        let e1 = (-m * x1).exp();
        let e2 = (-m * x2).exp();
        let t11 = e1 * inv_den;
        let t22 = e2 * inv_den;
        c11.add(t11);
        c22.add(t22);
        c12.add(1.0 / (m * s).exp_m1());
        s1.add(e1 * (-(-m * x2).exp_m1()) * inv_den);
        s2.add(e2 * (-(-m * x1).exp_m1()) * inv_den);
        n += 1;
        let term = scale * t11.max(t22);
        if term < opts.tol {
            let tail = scale * geometric_tail(n, slowest, s);
            if tail < opts.tol {
                break tail;
            }
        }
        if n >= opts.max_terms {
            return Err(Error::TruncationCap {
                needed: n as f64,
                cap: opts.max_terms,
                tol: opts.tol,
            });
        }
    };

    let off = -scale * c12.value();
    Ok(CapacitanceMatrix {
        c11: scale * c11.value(),
        c12: off,
        c21: off,
        c22: scale * c22.value(),
        row_sums: [scale * s1.value(), scale * s2.value()],
        n_terms: n,
        tail_bound: tail,
    })
}

/// Identical spheres of radius `r` at gap `eps`, from the one-parameter
/// series in `ξ0 = asinh(α̃ / r)`, `α̃ = sqrt(ε (r + ε/4))`.
pub fn capacitance_symmetric(r: f64, eps: f64, opts: &SeriesOptions) -> Result<CapacitanceMatrix> {
    ensure_positive("r", r)?;
    ensure_positive("eps", eps)?;
    opts.validate()?;
    let alpha = (eps * (r + 0.25 * eps)).sqrt();
    let xi0 = (alpha / r).asinh();
    let scale = 8.0 * PI * alpha;
    let needed = estimated_terms(xi0, 2.0 * xi0, scale, opts.tol);
    if !needed.is_finite() || needed > opts.max_terms as f64 {
        return Err(Error::TruncationCap {
            needed,
            cap: opts.max_terms,
            tol: opts.tol,
        });
    }

    let (mut diag, mut off, mut row) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let mut n = 0usize;
    let tail = loop {
        let x = (2 * n + 1) as f64 * xi0;
        let t = 0.5 / x.sinh();
        diag.add(t);
        off.add(1.0 / (2.0 * x).exp_m1());
        row.add(1.0 / (x.exp() + 1.0));
        n += 1;
        if scale * t < opts.tol {
            let tail = scale * geometric_tail(n, xi0, 2.0 * xi0);
            if tail < opts.tol {
                break tail;
            }
        }
        if n >= opts.max_terms {
            return Err(Error::TruncationCap {
                needed: n as f64,
                cap: opts.max_terms,
                tol: opts.tol,
            });
        }
    };
    let c11 = scale * diag.value();
    let c12 = -scale * off.value();
    let rs = scale * row.value();
    Ok(CapacitanceMatrix {
        c11,
        c12,
        c21: c12,
        c22: c11,
        row_sums: [rs, rs],
        n_terms: n,
        tail_bound: tail,
    })
}

/// Divide row `i` by the volume of sphere `i`.
pub fn rescale(c: &CapacitanceMatrix, pair: &ResonatorPair) -> RescaledCapacitance {
    let (v1, v2) = (pair.volume(1), pair.volume(2));
    RescaledCapacitance {
        ct11: c.c11 / v1,
        ct12: c.c12 / v1,
        ct21: c.c21 / v2,
        ct22: c.c22 / v2,
        row_sums: [c.row_sums[0] / v1, c.row_sums[1] / v2],
    }
}

fn prefactors(frame: &BisphericalFrame) -> (f64, f64) {
    let s = frame.xi_sum();
    (
        3.0 * frame.alpha / (frame.r1.powi(3) * s),
        3.0 * frame.alpha / (frame.r2.powi(3) * s),
    )
}

/// `σ_i = 3α / (r_i³ (ξ1+ξ2)) Σ_{n≥1} z_i / (n (n - z_i))` with
/// `z_i = 1 - ξ_i / (ξ1+ξ2)`.
pub fn sigma_terms(frame: &BisphericalFrame) -> Result<SigmaTerms> {
    let s = frame.xi_sum();
    let (k1, k2) = prefactors(frame);
    let z1 = frame.xi2 / s;
    let z2 = frame.xi1 / s;
    Ok(SigmaTerms {
        sigma1: k1 * digamma_series_tail(z1)?,
        sigma2: k2 * digamma_series_tail(z2)?,
    })
}

/// Leading-order close-gap values of the rescaled coefficients, in terms of
/// the digamma function. Their error against the exact series is `O(√ε)`.
pub fn capacitance_asymptotic_rescaled(frame: &BisphericalFrame) -> Result<RescaledCapacitance> {
    let s = frame.xi_sum();
    if s >= 2.0 {
        return Err(Error::InvalidInput(format!(
            "close-gap asymptotics need xi1 + xi2 < 2, got {s:.3}"
        )));
    }
    if s > 0.2 {
        warn!("xi1 + xi2 = {s:.3}: gap too wide for the close-gap asymptotics to be meaningful");
    }
    let (k1, k2) = prefactors(frame);
    let log_term = (2.0 / s).ln();
    let sig = sigma_terms(frame)?;
    Ok(RescaledCapacitance {
        ct11: k1 * (log_term - digamma(frame.xi1 / s)?),
        ct12: -k1 * (log_term + EULER_GAMMA),
        ct21: -k2 * (log_term + EULER_GAMMA),
        ct22: k2 * (log_term - digamma(frame.xi2 / s)?),
        row_sums: [sig.sigma1, sig.sigma2],
    })
}
