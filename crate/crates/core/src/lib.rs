//! Leading-order subwavelength resonances of two close-to-touching spherical
//! high-contrast resonators.
//!
//! The capacitance coefficients of the sphere pair are computed from exact
//! bispherical series, and everything else (resonant frequencies, eigenmodes,
//! gap-gradient blow-up, scattering coefficients) is assembled from them.
//! The [`oracle`] module holds independent brute-force routes (image charges,
//! surface-flux quadrature, finite differences) used to certify the series.

pub mod capacitance;
pub mod error;
pub mod fields;
pub mod fit;
pub mod geometry;
pub mod oracle;
pub mod scattering;
pub mod specfun;
pub mod spectra;
pub mod summation;

pub use capacitance::{
    capacitance_asymptotic_rescaled, capacitance_exact, capacitance_symmetric, rescale,
    sigma_terms, CapacitanceMatrix, RescaledCapacitance, SeriesOptions, SigmaTerms,
};
pub use error::{Error, Result};
pub use fields::{
    blowup_study, gradient_row, h_decomposition, max_boundary_gradient, max_gap_gradient,
    BlowupStudy, GradientMax, GradientStudyRow, LocalEval, Mode, ModeDecomposition,
    PotentialSeries,
};
pub use geometry::{
    epsilon_from_regime, ln_epsilon_from_regime, BisphericalFrame, BisphericalPoint,
    CartesianPoint, Region, ResonatorPair,
};
pub use scattering::{
    eval_scattered, modal_coefficients, response_curve, IncidentWave, ModalCoefficients,
    ResponseRow,
};
pub use spectra::{
    eigen, resonance_asymptotic, resonance_identical_spheres, resonant_frequencies,
    AsymptoticResonances, Material, ResonantFrequencies, SpectralPair,
};
