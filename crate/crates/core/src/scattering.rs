//! Leading-order scattering of a low-frequency plane wave by the pair.
//!
//! The scattered pressure is
//! `u = u_in - u_in(0) (V_1 + V_2) + a u_1 + b u_2`, with modal weights
//!
//! ```text
//! a =  δ v_b² / (|D| (ω² - ω1²)) (I_1 + I_2)
//! b = -δ v_b² / (|D| (ω² - ω2²)) (I_1 - |D_1|/|D_2| I_2)
//! ```
//!
//! where `I_i = ∫_{∂D_i} S_D^{-1}[u_in] ≈ -u_in(0) (C_i1 + C_i2)`. The
//! incident field is frozen at its value at the origin inside the
//! resonators; the next correction is first order in `ω`.

use log::{debug, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::capacitance::{rescale, CapacitanceMatrix};
use crate::error::{ensure_positive, Error, Result};
use crate::fields::PotentialSeries;
use crate::geometry::{CartesianPoint, ResonatorPair};
use crate::spectra::{eigen, resonant_frequencies, Material, ResonantFrequencies, SpectralPair};

/// Default relative pole guard on `|ω² - ω_n²| / ω_n²`.
pub const DEFAULT_POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub omega: f64,
    /// Unit propagation direction.
    pub direction: [f64; 3],
    pub amplitude: Complex64,
    /// `ω / v`.
    pub k: f64,
    /// `ω / v_b`.
    pub k_b: f64,
}

impl IncidentWave {
    pub fn new(
        omega: f64,
        direction: [f64; 3],
        amplitude: Complex64,
        m: &Material,
    ) -> Result<Self> {
        ensure_positive("omega", omega)?;
        let len = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidInput(
                "direction must be a non-zero vector".into(),
            ));
        }
        if (len - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "direction must have unit length, got {len}"
            )));
        }
        Ok(Self {
            omega,
            direction,
            amplitude,
            k: omega / m.v(),
            k_b: omega / m.v_b(),
        })
    }

    /// `amplitude · e^{i k d·x}`.
    pub fn value_at(&self, x: &CartesianPoint) -> Complex64 {
        let phase = self.k
            * (self.direction[0] * x.x1 + self.direction[1] * x.x2 + self.direction[2] * x.x3);
        self.amplitude * Complex64::from_polar(1.0, phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    /// `ω² - ω1²` and `ω² - ω2²`.
    pub denom1: f64,
    pub denom2: f64,
    /// `I_1 - |D_1|/|D_2| I_2`, the factor that vanishes for equal radii.
    pub b_numerator: Complex64,
    pub resonances: ResonantFrequencies,
}

/// Modal weights at the incident frequency. `guard` is relative to `ω_n²`.
pub fn modal_coefficients(
    c: &CapacitanceMatrix,
    pair: &ResonatorPair,
    m: &Material,
    w: &IncidentWave,
    guard: f64,
) -> Result<ModalCoefficients> {
    let sp = eigen(&rescale(c, pair))?;
    let res = resonant_frequencies(&sp, m)?;
    let r_max = pair.r1().max(pair.r2());
    if w.k * r_max > 1.0 {
        warn!(
            "k r = {:.3} is not small; the low-frequency expansion is unreliable",
            w.k * r_max
        );
    }
    let w2 = w.omega * w.omega;
    let denom1 = w2 - res.omega1 * res.omega1;
    let denom2 = w2 - res.omega2 * res.omega2;
    for (denom, resonance) in [(denom1, res.omega1), (denom2, res.omega2)] {
        if denom.abs() < guard * resonance * resonance {
            return Err(Error::PoleProximity {
                omega: w.omega,
                resonance,
            });
        }
    }
    let u0 = w.amplitude;
    let i1 = -u0 * c.row_sums[0];
    let i2 = -u0 * c.row_sums[1];
    let scale = m.delta() * m.v_b().powi(2) / pair.total_volume();
    let b_numerator = i1 - i2 * (pair.volume(1) / pair.volume(2));
    Ok(ModalCoefficients {
        a: (i1 + i2) * (scale / denom1),
        b: -b_numerator * (scale / denom2),
        denom1,
        denom2,
        b_numerator,
        resonances: res,
    })
}

/// Total leading-order pressure at an exterior point.
pub fn eval_scattered(
    mc: &ModalCoefficients,
    ps: &PotentialSeries,
    sp: &SpectralPair,
    w: &IncidentWave,
    x: &CartesianPoint,
) -> Result<Complex64> {
    let p = ps.locate(x)?;
    let [v1, v2] = ps.eval_potentials(&p)?;
    let u1 = sp.d1 * v1 + v2;
    let u2 = sp.d2 * v1 + v2;
    Ok(w.value_at(x) - w.amplitude * (v1 + v2) + mc.a * u1 + mc.b * u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub omega: f64,
    pub abs_a: f64,
    pub abs_b: f64,
}

/// `|a|`, `|b|` over a frequency grid for a unit-amplitude wave. Grid
/// points inside the pole guard band are skipped.
pub fn response_curve(
    c: &CapacitanceMatrix,
    pair: &ResonatorPair,
    m: &Material,
    omega_grid: &[f64],
    direction: [f64; 3],
    guard: f64,
) -> Result<Vec<ResponseRow>> {
    let mut rows = Vec::with_capacity(omega_grid.len());
    for &omega in omega_grid {
        let w = IncidentWave::new(omega, direction, Complex64::new(1.0, 0.0), m)?;
        match modal_coefficients(c, pair, m, &w, guard) {
            Ok(mc) => rows.push(ResponseRow {
                omega,
                abs_a: mc.a.norm(),
                abs_b: mc.b.norm(),
            }),
            Err(Error::PoleProximity { .. }) => {
                debug!("skipping omega = {omega} inside the pole guard")
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}
