//! Eigenvalues of the rescaled capacitance matrix and the leading-order
//! subwavelength resonant frequencies `ω_n = sqrt(δ v_b² λ_n)`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::capacitance::{capacitance_asymptotic_rescaled, sigma_terms, RescaledCapacitance};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::ResonatorPair;
use crate::specfun::EULER_GAMMA;

/// Densities and bulk moduli outside (`rho`, `kappa`) and inside
/// (`rho_b`, `kappa_b`) the resonators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub rho: f64,
    pub rho_b: f64,
    pub kappa: f64,
    pub kappa_b: f64,
}

impl Material {
    pub fn new(rho: f64, rho_b: f64, kappa: f64, kappa_b: f64) -> Result<Self> {
        ensure_positive("rho", rho)?;
        ensure_positive("rho_b", rho_b)?;
        ensure_positive("kappa", kappa)?;
        ensure_positive("kappa_b", kappa_b)?;
        let m = Self {
            rho,
            rho_b,
            kappa,
            kappa_b,
        };
        if m.delta() >= 1.0 {
            warn!("contrast delta = {} is not small", m.delta());
        }
        Ok(m)
    }

    /// Unit exterior density and modulus, `rho_b = kappa_b = delta`, so that
    /// `v = v_b = 1` and only the contrast changes.
    pub fn from_contrast(delta: f64) -> Result<Self> {
        Self::new(1.0, delta, 1.0, delta)
    }

    /// `ρ_b / ρ`.
    pub fn delta(&self) -> f64 {
        self.rho_b / self.rho
    }

    pub fn v(&self) -> f64 {
        (self.kappa / self.rho).sqrt()
    }

    pub fn v_b(&self) -> f64 {
        (self.kappa_b / self.rho_b).sqrt()
    }

    /// `v_b / v`.
    pub fn tau(&self) -> f64 {
        ((self.rho * self.kappa_b) / (self.rho_b * self.kappa)).sqrt()
    }

    /// `δ v_b² = κ_b / ρ`, the factor turning `λ_n` into `ω_n²`.
    fn omega_scale(&self) -> f64 {
        self.kappa_b / self.rho
    }
}

/// Eigenvalues `λ1 < λ2` of `C̃` and eigenvectors `(d_n, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl SpectralPair {
    pub fn lambda(&self, n: usize) -> f64 {
        match n {
            1 => self.lambda1,
            2 => self.lambda2,
            _ => panic!("mode index must be 1 or 2, got {n}"),
        }
    }

    /// Value of mode `n` on sphere 1; it is 1 on sphere 2.
    pub fn d(&self, n: usize) -> f64 {
        match n {
            1 => self.d1,
            2 => self.d2,
            _ => panic!("mode index must be 1 or 2, got {n}"),
        }
    }
}

/// Eigen-decomposition of a rescaled capacitance matrix.
///
/// The large root comes from the quadratic formula and the small one from
/// the determinant, itself formed from the row sums. `d1` is written as
/// `1 + (λ1 - s2) / C̃21` for the same reason.
pub fn eigen(ct: &RescaledCapacitance) -> Result<SpectralPair> {
    let diff = ct.ct11 - ct.ct22;
    let cross = ct.ct12 * ct.ct21;
    let disc = diff * diff + 4.0 * cross;
    if !(disc >= 0.0) || !(cross > 0.0) {
        return Err(Error::Degenerate(format!(
            "rescaled capacitance has discriminant {disc:e} and off-diagonal product {cross:e}"
        )));
    }
    let lambda2 = 0.5 * (ct.trace() + disc.sqrt());
    let det = ct.determinant();
    if !(det > 0.0) || !(lambda2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "non-positive determinant {det:e}"
        )));
    }
    let lambda1 = det / lambda2;
    let d1 = 1.0 + (lambda1 - ct.row_sums[1]) / ct.ct21;
    let d2 = (lambda2 - ct.ct22) / ct.ct21;
    Ok(SpectralPair {
        lambda1,
        lambda2,
        d1,
        d2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantFrequencies {
    pub omega1: f64,
    pub omega2: f64,
}

pub fn resonant_frequencies(sp: &SpectralPair, m: &Material) -> Result<ResonantFrequencies> {
    if !(sp.lambda1 > 0.0 && sp.lambda2 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "eigenvalues must be positive, got {} and {}",
            sp.lambda1, sp.lambda2
        )));
    }
    let s = m.omega_scale();
    Ok(ResonantFrequencies {
        omega1: (s * sp.lambda1).sqrt(),
        omega2: (s * sp.lambda2).sqrt(),
    })
}

/// Close-gap resonances from explicit formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResonances {
    /// From `λ1 = (r1³σ1 + r2³σ2) / (r1³ + r2³)`.
    pub omega1: f64,
    /// Logarithmic closed form for the anti-phase resonance.
    pub omega2: f64,
    /// `λ2 = tr C̃ - λ1` with the digamma-level diagonal entries.
    pub omega2_refined: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl AsymptoticResonances {
    pub fn frequencies(&self) -> ResonantFrequencies {
        ResonantFrequencies {
            omega1: self.omega1,
            omega2: self.omega2,
        }
    }
}

/// Asymptotic resonant frequencies for a close pair. Works with `ln ε`, so
/// gaps that underflow `f64` are fine.
pub fn resonance_asymptotic(pair: &ResonatorPair, m: &Material) -> Result<AsymptoticResonances> {
    let (r1, r2) = (pair.r1(), pair.r2());
    let harmonic = r1 * r2 / (r1 + r2);
    let log_arg = (2.0 * harmonic).ln() - pair.ln_epsilon();
    if log_arg <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "gap too wide for the close-gap formulas (log argument {log_arg:.3})"
        )));
    }
    if log_arg < 3.0 {
        warn!("gap is not small: log(2 r1 r2 / ((r1 + r2) eps)) = {log_arg:.3}");
    }
    let frame = pair.frame();
    let sig = sigma_terms(&frame)?;
    let (v1, v2) = (r1.powi(3), r2.powi(3));
    let lambda1 = (v1 * sig.sigma1 + v2 * sig.sigma2) / (v1 + v2);
    let lambda2 = 1.5 * (1.0 / v1 + 1.0 / v2) * harmonic * log_arg;
    let refined = capacitance_asymptotic_rescaled(&frame)?.trace() - lambda1;
    let s = m.omega_scale();
    Ok(AsymptoticResonances {
        omega1: (s * lambda1).sqrt(),
        omega2: (s * lambda2).sqrt(),
        omega2_refined: (s * refined).sqrt(),
        lambda1,
        lambda2,
    })
}

/// Identical spheres: `(ω1, ω2)` from `3 v_b² log 2 / r²` and
/// `(3 v_b² / (2 r²)) (log(r/ε) + 2γ + 2 log 2)`, each times `δ`.
pub fn resonance_identical_spheres(
    r: f64,
    ln_epsilon: f64,
    m: &Material,
) -> Result<ResonantFrequencies> {
    ensure_positive("r", r)?;
    let s = m.omega_scale();
    let l1 = 3.0 * std::f64::consts::LN_2 / (r * r);
    let l2 =
        1.5 / (r * r) * (r.ln() - ln_epsilon + 2.0 * EULER_GAMMA + 2.0 * std::f64::consts::LN_2);
    if !(l2 > 0.0) {
        return Err(Error::InvalidInput(
            "gap too wide for the identical-sphere formula".into(),
        ));
    }
    Ok(ResonantFrequencies {
        omega1: (s * l1).sqrt(),
        omega2: (s * l2).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacitance::{capacitance_exact, rescale, SeriesOptions};
    use approx::assert_relative_eq;

    fn exact_ct(r1: f64, r2: f64, eps: f64) -> RescaledCapacitance {
        let p = ResonatorPair::new(r1, r2, eps).unwrap();
        rescale(
            &capacitance_exact(&p.frame(), &SeriesOptions::default()).unwrap(),
            &p,
        )
    }

    #[test]
    fn material_derived_quantities() {
        let m = Material::new(2.0, 0.002, 5.0, 0.3).unwrap();
        assert_relative_eq!(m.delta(), 1e-3, max_relative = 1e-15);
        assert_relative_eq!(m.tau(), m.v_b() / m.v(), max_relative = 1e-14);
        assert_relative_eq!(
            m.delta() * m.v_b().powi(2),
            m.omega_scale(),
            max_relative = 1e-14
        );
        assert!(Material::new(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_eigenstructure() {
        let ct = exact_ct(1.0, 1.0, 0.01);
        let sp = eigen(&ct).unwrap();
        assert_relative_eq!(sp.lambda1, ct.ct11 + ct.ct12, max_relative = 1e-12);
        assert_relative_eq!(sp.lambda2, ct.ct11 - ct.ct12, max_relative = 1e-12);
        assert_relative_eq!(sp.d1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(sp.d2, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn trace_and_determinant() {
        for &(r1, r2, eps) in &[(1.0, 2.0, 0.01), (0.5, 1.0, 1e-4), (2.0, 0.7, 0.3)] {
            let ct = exact_ct(r1, r2, eps);
            let sp = eigen(&ct).unwrap();
            assert!(0.0 < sp.lambda1 && sp.lambda1 < sp.lambda2);
            assert_relative_eq!(
                sp.lambda1 + sp.lambda2,
                ct.ct11 + ct.ct22,
                max_relative = 1e-12
            );
            let det = ct.ct11 * ct.ct22 - ct.ct12 * ct.ct21;
            assert_relative_eq!(sp.lambda1 * sp.lambda2, det, max_relative = 1e-9);
            // eigenvector check: second row of C̃ (d, 1) = λ (d, 1)
            for n in 1..=2 {
                let first = ct.ct11 * sp.d(n) + ct.ct12;
                assert_relative_eq!(first, sp.lambda(n) * sp.d(n), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn anti_phase_ratio_tends_to_volume_ratio() {
        let sp = eigen(&exact_ct(1.0, 2.0, 1e-6)).unwrap();
        assert!((sp.d2 + 8.0).abs() < 0.5, "d2 = {}", sp.d2);
        assert!((sp.d1 - 1.0).abs() < 0.2);
    }

    #[test]
    fn frequencies_scale_with_contrast() {
        let sp = eigen(&exact_ct(1.0, 1.0, 1e-4)).unwrap();
        let w1 = resonant_frequencies(&sp, &Material::from_contrast(1e-3).unwrap()).unwrap();
        let w2 = resonant_frequencies(&sp, &Material::new(7.0, 7e-3, 7.0, 7e-3).unwrap()).unwrap();
        assert_relative_eq!(w1.omega1, w2.omega1, max_relative = 1e-14);
        assert!(w1.omega1 < w1.omega2);
        let sym =
            resonance_identical_spheres(1.0, 1e-4f64.ln(), &Material::from_contrast(1e-3).unwrap())
                .unwrap();
        assert!((w1.omega1 / sym.omega1 - 1.0).abs() < 0.01);
        let bad = SpectralPair {
            lambda1: -1.0,
            lambda2: 1.0,
            d1: 1.0,
            d2: -1.0,
        };
        assert!(resonant_frequencies(&bad, &Material::from_contrast(0.1).unwrap()).is_err());
    }

    #[test]
    fn refined_route_reproduces_identical_sphere_formula() {
        let m = Material::from_contrast(1e-3).unwrap();
        let pair = ResonatorPair::new(1.0, 1.0, 1e-9).unwrap();
        let asy = resonance_asymptotic(&pair, &m).unwrap();
        let sym = resonance_identical_spheres(1.0, pair.ln_epsilon(), &m).unwrap();
        assert_relative_eq!(asy.omega2_refined, sym.omega2, max_relative = 1e-4);
        assert_relative_eq!(asy.omega1, sym.omega1, max_relative = 1e-4);
    }

    #[test]
    fn asymptotic_tracks_exact_eigenvalues() {
        let m = Material::from_contrast(1e-4).unwrap();
        for &(r1, r2) in &[(1.0, 2.0), (1.0, 1.0)] {
            let pair = ResonatorPair::new(r1, r2, 1e-8).unwrap();
            let exact = resonant_frequencies(&eigen(&exact_ct(r1, r2, 1e-8)).unwrap(), &m).unwrap();
            let asy = resonance_asymptotic(&pair, &m).unwrap();
            // λ1 carries an O(1/|log ε|) correction for unequal radii
            assert!((asy.omega1 / exact.omega1 - 1.0).abs() < 5e-3);
            assert!((asy.omega2_refined / exact.omega2 - 1.0).abs() < 1e-3);
            assert!((asy.omega2 / exact.omega2 - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn underflowing_gap_is_supported() {
        let pair = ResonatorPair::from_ln_gap(1.0, 2.0, -1000.0).unwrap();
        let asy = resonance_asymptotic(&pair, &Material::from_contrast(1e-6).unwrap()).unwrap();
        assert!(asy.omega1.is_finite() && asy.omega2 > asy.omega1);
    }
}
