//! Brute-force cross-checks that share no code path with the series:
//! Kelvin image charges for the capacitance, Gauss–Legendre quadrature of
//! surface fluxes, and finite differences for derivatives.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::capacitance::{CapacitanceMatrix, RescaledCapacitance};
use crate::error::{Error, Result};
use crate::fields::PotentialSeries;
use crate::geometry::{cosh_minus_cos, CartesianPoint, ResonatorPair};

pub mod dd {
    //! Double-double arithmetic (about 32 significant digits).

    use std::ops::{Add, Div, Mul, Neg, Sub};

    #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
    pub struct DD {
        pub hi: f64,
        pub lo: f64,
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl DD {
        pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

        pub fn new(x: f64) -> Self {
            DD { hi: x, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }

        pub fn abs(self) -> Self {
            if self.hi < 0.0 {
                -self
            } else {
                self
            }
        }

        pub fn sqrt(self) -> Self {
            if self.hi <= 0.0 {
                return DD::ZERO;
            }
            // one Newton step on the f64 root
            let x = self.hi.sqrt();
            let (p, e) = two_prod(x, x);
            let r = ((self.hi - p - e) + self.lo) / (2.0 * x);
            let (hi, lo) = quick_two_sum(x, r);
            DD { hi, lo }
        }
    }

    impl From<f64> for DD {
        fn from(x: f64) -> Self {
            DD::new(x)
        }
    }

    impl Neg for DD {
        type Output = DD;
        fn neg(self) -> DD {
            DD {
                hi: -self.hi,
                lo: -self.lo,
            }
        }
    }

    impl Add for DD {
        type Output = DD;
        fn add(self, o: DD) -> DD {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let (s, e) = quick_two_sum(s, e + t);
            let (hi, lo) = quick_two_sum(s, e + f);
            DD { hi, lo }
        }
    }

    impl Sub for DD {
        type Output = DD;
        fn sub(self, o: DD) -> DD {
            self + (-o)
        }
    }

    impl Mul for DD {
        type Output = DD;
        fn mul(self, o: DD) -> DD {
            let (p, e) = two_prod(self.hi, o.hi);
            let e = e + (self.hi * o.lo + self.lo * o.hi);
            let (hi, lo) = quick_two_sum(p, e);
            DD { hi, lo }
        }
    }

    impl Div for DD {
        type Output = DD;
        fn div(self, o: DD) -> DD {
            let q1 = self.hi / o.hi;
            let r = self - o * DD::new(q1);
            let q2 = r.hi / o.hi;
            let r = r - o * DD::new(q2);
            let q3 = r.hi / o.hi;
            let (hi, lo) = quick_two_sum(q1, q2);
            DD { hi, lo } + DD::new(q3)
        }
    }

}

use dd::DD;

/// One point charge on the line of centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageCharge {
    /// Position along the axis; centre 1 at 0, centre 2 at `r1 + r2 + ε`.
    pub position: f64,
    pub magnitude: f64,
    /// Sphere (1 or 2) that contains the charge.
    pub sphere: usize,
    pub generation: usize,
}

/// Charges that hold sphere `driven` at potential 1 and the other at 0
/// (potential of a charge `q` at distance `d` taken as `q / d`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageChargeSystem {
    pub driven: usize,
    pub charges: Vec<ImageCharge>,
    /// Total charge per sphere, `[Q_1, Q_2]`.
    pub totals: [f64; 2],
    /// Estimated magnitude of the neglected images, per sphere.
    pub tail: [f64; 2],
    pub converged: bool,
}

/// Kelvin-image iteration, carried in double-double.
///
/// Stops when the newest image is below `1e-14` of the driven sphere's
/// accumulated charge or after `max_reflections` images.
pub fn image_charge_system(
    pair: &ResonatorPair,
    driven: usize,
    max_reflections: usize,
) -> Result<ImageChargeSystem> {
    if !(driven == 1 || driven == 2) {
        return Err(Error::InvalidInput(format!(
            "sphere index must be 1 or 2, got {driven}"
        )));
    }
    if max_reflections == 0 {
        return Err(Error::InvalidInput("need at least one reflection".into()));
    }
    let (r1, r2, eps) = (pair.r1(), pair.r2(), pair.epsilon());
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(
            "image charges need a representable gap".into(),
        ));
    }
    let centre = [DD::ZERO, DD::new(r1) + DD::new(r2) + DD::new(eps)];
    let radius = [DD::new(r1), DD::new(r2)];
    let mut sphere = driven - 1;
    let mut pos = centre[sphere];
    let mut q = radius[sphere];
    let mut totals = [DD::ZERO; 2];
    let mut charges = Vec::new();
    let mut last = [0.0f64; 2];
    let mut prev = [0.0f64; 2];
    let mut converged = false;
    for generation in 0..=max_reflections {
        totals[sphere] = totals[sphere] + q;
        charges.push(ImageCharge {
            position: pos.to_f64(),
            magnitude: q.to_f64(),
            sphere: sphere + 1,
            generation,
        });
        prev[sphere] = last[sphere];
        last[sphere] = q.to_f64().abs();
        if generation > 0 && last[sphere] < 1e-14 * totals[driven - 1].to_f64().abs() {
            converged = true;
            break;
        }
        // reflect into the other sphere
        let other = 1 - sphere;
        let offset = pos - centre[other];
        q = -(q * radius[other]) / offset.abs();
        pos = centre[other] + radius[other] * radius[other] / offset;
        sphere = other;
    }
    if !converged {
        warn!("image charges not converged after {max_reflections} reflections");
    }
    let tail = [0, 1].map(|k| {
        let rho = if prev[k] > 0.0 {
            last[k] / prev[k]
        } else {
            0.0
        };
        if rho < 1.0 {
            last[k] * rho / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    });
    Ok(ImageChargeSystem {
        driven,
        charges,
        totals: totals.map(DD::to_f64),
        tail,
        converged,
    })
}

/// Capacitance matrix `C_ij = 4π Q_i` from the image systems of both
/// spheres. `C12` and `C21` come from different systems.
pub fn image_charge_capacitance(
    pair: &ResonatorPair,
    max_reflections: usize,
) -> Result<CapacitanceMatrix> {
    let s1 = image_charge_system(pair, 1, max_reflections)?;
    let s2 = image_charge_system(pair, 2, max_reflections)?;
    let four_pi = 4.0 * PI;
    let (c11, c21) = (four_pi * s1.totals[0], four_pi * s1.totals[1]);
    let (c12, c22) = (four_pi * s2.totals[0], four_pi * s2.totals[1]);
    let tail = four_pi
        * s1.tail
            .iter()
            .chain(s2.tail.iter())
            .cloned()
            .fold(0.0, f64::max);
    Ok(CapacitanceMatrix {
        c11,
        c12,
        c21,
        c22,
        row_sums: [c11 + c12, c21 + c22],
        n_terms: s1.charges.len().max(s2.charges.len()),
        tail_bound: tail,
    })
}

/// Eigenvalues of `C̃` from the characteristic polynomial in
/// double-double, using only the four entries.
pub fn eigenvalues_extended(ct: &RescaledCapacitance) -> (f64, f64) {
    let (a, b, c, d) = (
        DD::new(ct.ct11),
        DD::new(ct.ct12),
        DD::new(ct.ct21),
        DD::new(ct.ct22),
    );
    let tr = a + d;
    let det = a * d - b * c;
    let disc = ((a - d) * (a - d) + DD::new(4.0) * b * c).sqrt();
    let half = DD::new(0.5);
    let l2 = half * (tr + disc);
    let l1 = det / l2;
    (l1.to_f64(), l2.to_f64())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Integral over `[0, π]` on panels graded geometrically from `θ = 0`
/// (smallest width `w0`), each with the same Gauss order, doubled until two
/// successive estimates agree to `rel_tol` (relative to the integral, or to
/// `1e-3 ∫|f|` when the integral nearly cancels).
fn graded_integral(w0: f64, rel_tol: f64, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut edges = vec![0.0];
    let mut w = w0.clamp(1e-12, 0.5);
    while *edges.last().unwrap() + w < PI {
        let e = *edges.last().unwrap() + w;
        edges.push(e);
        w *= 2.0;
    }
    edges.push(PI);
    let integrate = |order: usize| -> Result<(f64, f64)> {
        let (x, wt) = gauss_legendre(order);
        let (mut sum, mut abs_sum) = (0.0, 0.0);
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (xi, wi) in x.iter().zip(&wt) {
                let v = half * wi * f(mid + half * xi)?;
                sum += v;
                abs_sum += v.abs();
            }
        }
        Ok((sum, abs_sum))
    };
    let mut order = 8;
    let (mut prev, _) = integrate(order)?;
    while order < 1024 {
        order *= 2;
        let (next, abs_next) = integrate(order)?;
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-3 * abs_next) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "no convergence to {rel_tol:e} at order {order}"
    )))
}

/// Outward flux through sphere `i` of a field given by its `ξ`-derivative
/// on `ξ = ξ_i`: `s_i 2πα ∫ ∂_ξ F sin θ / (cosh ξ - cos θ) dθ`.
fn sphere_flux(
    ps: &PotentialSeries,
    i: usize,
    rel_tol: f64,
    d_xi: &dyn Fn(f64, f64) -> Result<f64>,
) -> Result<f64> {
    let f = ps.frame();
    let xi = f.boundary_xi(i);
    let sign = if i == 1 { 1.0 } else { -1.0 };
    let integrand = |t: f64| -> Result<f64> { Ok(d_xi(xi, t)? * t.sin() / cosh_minus_cos(xi, t)) };
    Ok(sign * 2.0 * PI * f.alpha * graded_integral(xi.abs(), rel_tol, &integrand)?)
}

/// `C_ij = -∫_{∂D_i} ∂V_j/∂ν dσ` by quadrature of the series' normal
/// derivative on sphere `i`.
pub fn flux_quadrature(ps: &PotentialSeries, j: usize, i: usize, rel_tol: f64) -> Result<f64> {
    if !(1..=2).contains(&j) || !(1..=2).contains(&i) {
        return Err(Error::InvalidInput(format!(
            "indices must be 1 or 2, got ({i}, {j})"
        )));
    }
    let d_xi = |xi: f64, t: f64| -> Result<f64> { Ok(ps.eval_local(xi, t, true)?.v_xi[j - 1]) };
    Ok(-sphere_flux(ps, i, rel_tol, &d_xi)?)
}

/// Outward flux through sphere `i` of the single separated solution
/// `sqrt(2) sqrt(cosh ξ - cos θ) e^{sign (n + 1/2) ξ} P_n(cos θ)`.
pub fn term_flux(ps: &PotentialSeries, n: usize, sign: f64, i: usize, rel_tol: f64) -> Result<f64> {
    let m = sign * (n as f64 + 0.5);
    let d_xi = |xi: f64, t: f64| -> Result<f64> {
        let d = cosh_minus_cos(xi, t);
        let p = crate::specfun::legendre_p(n, t.cos())?;
        let e = (m * xi).exp();
        Ok(std::f64::consts::SQRT_2 * e * p * (0.5 * xi.sinh() / d.sqrt() + m * d.sqrt()))
    };
    sphere_flux(ps, i, rel_tol, &d_xi)
}

fn check_step(h: f64, clearance: f64) -> Result<()> {
    if !(h > 0.0) || !(clearance > 4.0 * h) {
        return Err(Error::StepGuard { step: h, clearance });
    }
    Ok(())
}

fn shifted(p: &CartesianPoint, axis: usize, by: f64) -> CartesianPoint {
    let mut a = p.to_array();
    a[axis] += by;
    CartesianPoint::from(a)
}

/// Fourth-order central-difference gradient. `clearance` is the distance
/// from `p` to the nearest boundary and must exceed `4h`.
pub fn fd_gradient(
    f: &dyn Fn(&CartesianPoint) -> Result<f64>,
    p: &CartesianPoint,
    h: f64,
    clearance: f64,
) -> Result<[f64; 3]> {
    check_step(h, clearance)?;
    let mut g = [0.0; 3];
    for (axis, gk) in g.iter_mut().enumerate() {
        let fp1 = f(&shifted(p, axis, h))?;
        let fm1 = f(&shifted(p, axis, -h))?;
        let fp2 = f(&shifted(p, axis, 2.0 * h))?;
        let fm2 = f(&shifted(p, axis, -2.0 * h))?;
        *gk = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    }
    Ok(g)
}

/// Seven-point Laplacian; same step guard as [`fd_gradient`].
pub fn fd_laplacian(
    f: &dyn Fn(&CartesianPoint) -> Result<f64>,
    p: &CartesianPoint,
    h: f64,
    clearance: f64,
) -> Result<f64> {
    check_step(h, clearance)?;
    let mut sum = -6.0 * f(p)?;
    for axis in 0..3 {
        sum += f(&shifted(p, axis, h))? + f(&shifted(p, axis, -h))?;
    }
    Ok(sum / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacitance::{capacitance_exact, SeriesOptions};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        let int = |k: i32| {
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(k))
                .sum::<f64>()
        };
        assert_relative_eq!(int(0), 2.0, max_relative = 1e-15);
        assert_relative_eq!(int(10), 2.0 / 11.0, max_relative = 1e-14);
        assert!(int(11).abs() < 1e-15);
    }

    #[test]
    fn isolated_sphere_images() {
        let c = image_charge_capacitance(&ResonatorPair::new(1.0, 1.0, 1e4).unwrap(), 200).unwrap();
        assert_relative_eq!(c.c11, 4.0 * PI, max_relative = 1e-3);
        assert!(c.c21.abs() < 1e-2);
    }

    #[test]
    fn symmetric_images_agree() {
        let c =
            image_charge_capacitance(&ResonatorPair::new(1.0, 1.0, 0.1).unwrap(), 2000).unwrap();
        assert_relative_eq!(c.c11, c.c22, max_relative = 1e-10);
        assert_relative_eq!(c.c12, c.c21, max_relative = 1e-10);
        assert_relative_eq!(c.c11, 19.904_619_646_815_313, max_relative = 1e-12);
    }

    #[test]
    fn image_charges_decay() {
        let sys =
            image_charge_system(&ResonatorPair::new(1.0, 2.0, 0.1).unwrap(), 1, 5000).unwrap();
        assert!(sys.converged);
        let mags: Vec<f64> = sys.charges.iter().map(|c| c.magnitude.abs()).collect();
        assert!(mags.windows(3).all(|w| w[2] < w[0]));
        let capped =
            image_charge_system(&ResonatorPair::new(1.0, 2.0, 1e-4).unwrap(), 1, 3).unwrap();
        assert!(!capped.converged);
    }

    #[test]
    fn flux_matches_series() {
        let pair = ResonatorPair::new(1.0, 2.0, 0.05).unwrap();
        let opts = SeriesOptions::with_tol(1e-13);
        let c = capacitance_exact(&pair.frame(), &opts).unwrap();
        let ps = PotentialSeries::new(&pair.frame(), &opts).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                assert_relative_eq!(
                    flux_quadrature(&ps, j, i, 1e-10).unwrap(),
                    c.entry(i, j),
                    max_relative = 1e-8
                );
            }
        }
    }

    #[test]
    fn separated_solutions_carry_equal_charge() {
        let pair = ResonatorPair::new(1.0, 2.0, 0.2).unwrap();
        let ps = PotentialSeries::new(&pair.frame(), &SeriesOptions::default()).unwrap();
        let alpha = ps.frame().alpha;
        for n in [0, 1, 4] {
            // e^{-(n+1/2)ξ} is singular at the limit point inside sphere 1
            let on1 = term_flux(&ps, n, -1.0, 1, 1e-11).unwrap();
            let on2 = term_flux(&ps, n, -1.0, 2, 1e-11).unwrap();
            assert_relative_eq!(on1, -8.0 * PI * alpha, max_relative = 1e-9);
            assert!(on2.abs() < 1e-9);
            let on2 = term_flux(&ps, n, 1.0, 2, 1e-11).unwrap();
            assert_relative_eq!(on2, -8.0 * PI * alpha, max_relative = 1e-9);
        }
    }

    #[test]
    fn finite_differences_on_known_functions() {
        let x0 = CartesianPoint::new(0.3, -0.2, 0.1);
        let coulomb = |p: &CartesianPoint| Ok(1.0 / p.distance(&x0));
        let p = CartesianPoint::new(1.0, 0.5, -0.4);
        let r = p.distance(&x0);
        let g = fd_gradient(&coulomb, &p, 1e-3, 1.0).unwrap();
        for (k, gk) in g.iter().enumerate() {
            let exact = -(p.to_array()[k] - x0.to_array()[k]) / r.powi(3);
            assert!((gk - exact).abs() < 1e-8, "{gk} vs {exact}");
        }
        assert!(fd_laplacian(&coulomb, &p, 1e-3, 1.0).unwrap().abs() < 1e-4);
        let quad = |p: &CartesianPoint| Ok(p.x1 * p.x1 + p.x2 * p.x2 + p.x3 * p.x3);
        assert_relative_eq!(
            fd_laplacian(&quad, &p, 0.5, 10.0).unwrap(),
            6.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            fd_gradient(&quad, &p, 0.1, 0.3),
            Err(Error::StepGuard { .. })
        ));
    }

    #[test]
    fn extended_eigenvalues() {
        let ct = RescaledCapacitance::from_entries(5.0, -4.0, -0.5, 1.0);
        let (l1, l2) = eigenvalues_extended(&ct);
        assert_relative_eq!(l1 + l2, 6.0, max_relative = 1e-15);
        assert_relative_eq!(l1 * l2, 3.0, max_relative = 1e-15);
    }
}
