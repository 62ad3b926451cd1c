//! Bispherical frame of two spheres.
//!
//! The Cartesian origin sits midway between the two limit points
//! `p1 = (0, 0, -alpha)` and `p2 = (0, 0, alpha)`, with the `x3` axis through
//! both centres. In bispherical coordinates `(xi, theta, phi)` the sphere
//! boundaries are the level sets `xi = -xi1` (sphere 1) and `xi = xi2`
//! (sphere 2), and the exterior of both spheres is the strip
//! `-xi1 < xi < xi2`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Threshold on `|xi|` above which coordinates are evaluated in
/// exponentially scaled form (cosh/sinh would overflow near 710).
const LARGE_XI: f64 = 20.0;

/// Relative tolerance for the boundary shell in [`BisphericalFrame::classify`].
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Two spheres of radii `r1`, `r2` separated by a surface-to-surface gap.
///
/// The gap is carried both as `epsilon` and as `ln(epsilon)` so that gaps
/// below the smallest positive `f64` (which occur in the contrast-driven
/// regime `epsilon ~ exp(-1/delta^(1-beta))`) remain usable by the
/// asymptotic routes. For such gaps `epsilon()` reports `0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorPair {
    r1: f64,
    r2: f64,
    epsilon: f64,
    ln_epsilon: f64,
}

impl ResonatorPair {
    pub fn new(r1: f64, r2: f64, epsilon: f64) -> Result<Self> {
        ensure_positive("r1", r1)?;
        ensure_positive("r2", r2)?;
        ensure_positive("epsilon", epsilon)?;
        Ok(Self {
            r1,
            r2,
            epsilon,
            ln_epsilon: epsilon.ln(),
        })
    }

    /// Pair with the gap given through its logarithm.
    pub fn from_ln_gap(r1: f64, r2: f64, ln_epsilon: f64) -> Result<Self> {
        ensure_positive("r1", r1)?;
        ensure_positive("r2", r2)?;
        if !ln_epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ln(epsilon) must be finite, got {ln_epsilon}"
            )));
        }
        Ok(Self {
            r1,
            r2,
            epsilon: ln_epsilon.exp(),
            ln_epsilon,
        })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Gap width; `0.0` if it underflows `f64`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ln_epsilon(&self) -> f64 {
        self.ln_epsilon
    }

    /// Radius of sphere `i` (1 or 2).
    pub fn radius(&self, i: usize) -> f64 {
        match i {
            1 => self.r1,
            2 => self.r2,
            _ => panic!("sphere index must be 1 or 2, got {i}"),
        }
    }

    /// Volume `4 pi r_i^3 / 3` of sphere `i`.
    pub fn volume(&self, i: usize) -> f64 {
        4.0 * std::f64::consts::PI * self.radius(i).powi(3) / 3.0
    }

    pub fn total_volume(&self) -> f64 {
        self.volume(1) + self.volume(2)
    }

    pub fn is_symmetric(&self) -> bool {
        self.r1 == self.r2
    }

    /// Same geometry with the sphere labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
            ..*self
        }
    }

    pub fn frame(&self) -> BisphericalFrame {
        BisphericalFrame::from_pair(self)
    }
}

/// Level sets and centres of the bispherical system for a [`ResonatorPair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisphericalFrame {
    /// Half the distance between the limit points.
    pub alpha: f64,
    /// `asinh(alpha / r1)`; sphere 1 is `xi = -xi1`.
    pub xi1: f64,
    /// `asinh(alpha / r2)`; sphere 2 is `xi = xi2`.
    pub xi2: f64,
    /// Centre of sphere 1 on the `x3` axis (negative).
    pub c1: f64,
    /// Centre of sphere 2 on the `x3` axis (positive).
    pub c2: f64,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisphericalPoint {
    pub xi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl BisphericalPoint {
    pub fn new(xi: f64, theta: f64, phi: f64) -> Self {
        Self { xi, theta, phi }
    }

    /// Point on the symmetry axis between the two spheres.
    pub fn on_gap_axis(xi: f64) -> Self {
        Self {
            xi,
            theta: std::f64::consts::PI,
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl CartesianPoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2).hypot(self.x3)
    }

    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        (self.x1 - other.x1)
            .hypot(self.x2 - other.x2)
            .hypot(self.x3 - other.x3)
    }
}

impl From<[f64; 3]> for CartesianPoint {
    fn from(x: [f64; 3]) -> Self {
        Self {
            x1: x[0],
            x2: x[1],
            x3: x[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    InsideD1,
    InsideD2,
    Exterior,
    Boundary,
}

impl BisphericalFrame {
    pub fn from_pair(pair: &ResonatorPair) -> Self {
        let (r1, r2, eps) = (pair.r1, pair.r2, pair.epsilon);
        // The product has no cancellations; only the sqrt(eps) factor needs
        // care when eps itself underflows.
        let sqrt_eps = if eps > 1e-300 {
            eps.sqrt()
        } else {
            (0.5 * pair.ln_epsilon).exp()
        };
        let rest = ((2.0 * r1 + eps) * (2.0 * r2 + eps) * (2.0 * r1 + 2.0 * r2 + eps)).sqrt();
        let alpha = sqrt_eps * rest / (2.0 * (r1 + r2 + eps));
        Self {
            alpha,
            xi1: (alpha / r1).asinh(),
            xi2: (alpha / r2).asinh(),
            c1: -r1.hypot(alpha),
            c2: r2.hypot(alpha),
            r1,
            r2,
        }
    }

    /// `xi1 + xi2`, the width of the exterior strip.
    pub fn xi_sum(&self) -> f64 {
        self.xi1 + self.xi2
    }

    pub fn center(&self, i: usize) -> CartesianPoint {
        match i {
            1 => CartesianPoint::new(0.0, 0.0, self.c1),
            2 => CartesianPoint::new(0.0, 0.0, self.c2),
            _ => panic!("sphere index must be 1 or 2, got {i}"),
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        match i {
            1 => self.r1,
            2 => self.r2,
            _ => panic!("sphere index must be 1 or 2, got {i}"),
        }
    }

    /// The `xi` value of the boundary of sphere `i`.
    pub fn boundary_xi(&self, i: usize) -> f64 {
        match i {
            1 => -self.xi1,
            2 => self.xi2,
            _ => panic!("sphere index must be 1 or 2, got {i}"),
        }
    }

    pub fn to_cartesian(&self, p: &BisphericalPoint) -> Result<CartesianPoint> {
        let (rho, x3) = self.meridian(p.xi, p.theta)?;
        Ok(CartesianPoint::new(
            rho * p.phi.cos(),
            rho * p.phi.sin(),
            x3,
        ))
    }

    /// `(rho, x3)` of the meridian-plane image of `(xi, theta)`.
    pub(crate) fn meridian(&self, xi: f64, theta: f64) -> Result<(f64, f64)> {
        let a = self.alpha;
        if xi.abs() > LARGE_XI {
            let t = (-xi.abs()).exp();
            let den = 1.0 + t * t - 2.0 * theta.cos() * t;
            let x3 = a * (1.0 - t * t) / den;
            return Ok((2.0 * a * theta.sin() * t / den, x3.copysign(xi)));
        }
        let den = cosh_minus_cos(xi, theta);
        if den <= 0.0 {
            return Err(Error::SingularPoint);
        }
        Ok((a * theta.sin() / den, a * xi.sinh() / den))
    }

    pub fn to_bispherical(&self, p: &CartesianPoint) -> Result<BisphericalPoint> {
        let a = self.alpha;
        let rho2 = p.x1 * p.x1 + p.x2 * p.x2;
        let d1sq = rho2 + (p.x3 + a) * (p.x3 + a);
        let d2sq = rho2 + (p.x3 - a) * (p.x3 - a);
        if d2sq == 0.0 {
            return Err(Error::LimitPoint(a));
        }
        if d1sq == 0.0 {
            return Err(Error::LimitPoint(-a));
        }
        // ln(d1^2 / d2^2) with d1^2 - d2^2 = 4 alpha x3
        let xi = 0.5 * (4.0 * a * p.x3 / d2sq).ln_1p();
        let theta = (2.0 * a * rho2.sqrt()).atan2(rho2 + p.x3 * p.x3 - a * a);
        let mut phi = p.x2.atan2(p.x1);
        if phi < 0.0 {
            phi += 2.0 * std::f64::consts::PI;
        }
        Ok(BisphericalPoint { xi, theta, phi })
    }

    pub fn classify(&self, p: &CartesianPoint) -> Region {
        for (i, region) in [(1, Region::InsideD1), (2, Region::InsideD2)] {
            let r = self.radius(i);
            let gap = p.distance(&self.center(i)) - r;
            if gap.abs() <= BOUNDARY_TOL * r {
                return Region::Boundary;
            }
            if gap < 0.0 {
                return region;
            }
        }
        Region::Exterior
    }

    /// Signed distance to the nearer sphere surface (negative inside).
    pub fn boundary_distance(&self, p: &CartesianPoint) -> f64 {
        let d1 = p.distance(&self.center(1)) - self.r1;
        let d2 = p.distance(&self.center(2)) - self.r2;
        d1.min(d2)
    }

    /// True when `xi` lies in the closed exterior strip `[-xi1, xi2]`, up
    /// to a rounding allowance.
    pub fn in_closed_exterior(&self, xi: f64) -> bool {
        let slack = 1e-12 * self.xi_sum();
        xi >= -self.xi1 - slack && xi <= self.xi2 + slack
    }

    pub(crate) fn check_exterior(&self, xi: f64) -> Result<()> {
        if xi.is_nan() {
            return Err(Error::InvalidInput("xi is NaN".into()));
        }
        if self.in_closed_exterior(xi) {
            Ok(())
        } else {
            let sphere = if xi < 0.0 { 1 } else { 2 };
            Err(Error::InteriorPoint { sphere, xi })
        }
    }
}

/// `cosh(xi) - cos(theta)` without cancellation.
pub(crate) fn cosh_minus_cos(xi: f64, theta: f64) -> f64 {
    let a = (0.5 * xi).sinh();
    let b = (0.5 * theta).sin();
    2.0 * (a * a + b * b)
}

fn check_regime(delta: f64, beta: f64, c0: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    ensure_positive("c0", c0)
}

/// Gap `c0 * exp(-1 / delta^(1 - beta))` tying the separation to the contrast.
pub fn epsilon_from_regime(delta: f64, beta: f64, c0: f64) -> Result<f64> {
    Ok(ln_epsilon_from_regime(delta, beta, c0)?.exp())
}

/// Logarithm of [`epsilon_from_regime`]; stays finite where the gap underflows.
pub fn ln_epsilon_from_regime(delta: f64, beta: f64, c0: f64) -> Result<f64> {
    check_regime(delta, beta, c0)?;
    Ok(c0.ln() - delta.powf(beta - 1.0))
}
