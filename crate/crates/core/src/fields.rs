//! Potentials `V_j`, eigenmodes `u_n = d_n V_1 + V_2` and their gradients.
//!
//! `V_j` is harmonic outside both spheres, equals 1 on sphere `j`, 0 on the
//! other, and decays at infinity. In bispherical coordinates
//!
//! ```text
//! V_j = sqrt(2) sqrt(cosh ξ - cos θ) Σ f_n^j(ξ) P_n(cos θ)
//! ```
//!
//! with, for `m = n + 1/2`, `S = ξ1 + ξ2` and `q_n = 1 / (1 - e^{-2mS})`,
//!
//! ```text
//! f_n^1(ξ) = q_n e^{-m(2ξ1 + ξ)} (1 - e^{-2m(ξ2 - ξ)})
//! f_n^2(ξ) = q_n e^{-m(2ξ2 - ξ)} (1 - e^{-2m(ξ1 + ξ)})
//! ```
//!
//! Every factor is bounded on the strip `-ξ1 <= ξ <= ξ2`, so no
//! intermediate overflows however many terms are needed.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacitance::{capacitance_exact, rescale, RescaledCapacitance, SeriesOptions};
use crate::error::{Error, Result};
use crate::fit::{loglog_slope, spread};
use crate::geometry::{
    cosh_minus_cos, BisphericalFrame, BisphericalPoint, CartesianPoint, Region, ResonatorPair,
};
use crate::spectra::{eigen, SpectralPair};
use crate::summation::CompensatedSum;

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Terms between two evaluations of the pointwise tail bound.
const CHECK_EVERY: usize = 16;

/// Which leading-order field to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// `V_1` or `V_2`.
    Potential(usize),
    /// `u_1` (in phase) or `u_2` (anti-phase).
    Eigen(usize),
}

/// Values and bispherical derivatives of `V_1` and `V_2` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEval {
    pub v: [f64; 2],
    pub v_xi: [f64; 2],
    pub v_theta: [f64; 2],
    /// Terms actually summed.
    pub terms: usize,
}

/// Truncated bispherical series for `V_1`, `V_2` on one geometry.
///
/// Evaluation stops pointwise once a certified tail bound is below `tol`
/// (absolute, on values and on Cartesian gradient components). `n_max` and
/// `grad_n_max` are the uniform worst cases over the closed exterior and act
/// as hard caps.
#[derive(Debug, Clone)]
pub struct PotentialSeries {
    frame: BisphericalFrame,
    tol: f64,
    n_max: usize,
    grad_n_max: usize,
    q: Vec<f64>,
}

fn uniform_terms(frame: &BisphericalFrame, tol: f64, with_grad: bool) -> f64 {
    let xi_min = frame.xi1.min(frame.xi2);
    let d_max = frame.xi1.max(frame.xi2).cosh() + 1.0;
    let q0 = 1.0 / (-(-frame.xi_sum()).exp_m1());
    let mut scale = SQRT2 * d_max.sqrt() * q0 / (-(-xi_min).exp_m1());
    if with_grad {
        scale *= 4.0 * d_max / frame.alpha;
    }
    // solve scale * (N + 1)^p e^{-(N + 1/2) xi_min} = tol with a few fixed-point steps
    let mut n = ((scale / tol).ln().max(0.0) / xi_min).max(1.0);
    if with_grad {
        for _ in 0..8 {
            n = ((scale * (n + 1.0).powi(2) / tol).ln().max(0.0) / xi_min).max(1.0);
        }
    }
    n + 8.0
}

impl PotentialSeries {
    pub fn new(frame: &BisphericalFrame, opts: &SeriesOptions) -> Result<Self> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                opts.tol
            )));
        }
        let n_val = uniform_terms(frame, 0.5 * opts.tol, false);
        let n_grad = uniform_terms(frame, 0.5 * opts.tol, true);
        if !n_grad.is_finite() || n_grad > opts.max_terms as f64 {
            return Err(Error::TruncationCap {
                needed: n_grad,
                cap: opts.max_terms,
                tol: opts.tol,
            });
        }
        let (n_max, grad_n_max) = (n_val.ceil() as usize, n_grad.ceil() as usize);
        let s = frame.xi_sum();
        let q = (0..=grad_n_max)
            .map(|n| 1.0 / (-(-((2 * n + 1) as f64) * s).exp_m1()))
            .collect();
        debug!("potential series: {n_max} terms for values, {grad_n_max} for gradients");
        Ok(Self {
            frame: *frame,
            tol: opts.tol,
            n_max,
            grad_n_max,
            q,
        })
    }

    pub fn from_pair(pair: &ResonatorPair, opts: &SeriesOptions) -> Result<Self> {
        Self::new(&pair.frame(), opts)
    }

    pub fn frame(&self) -> &BisphericalFrame {
        &self.frame
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grad_n_max(&self) -> usize {
        self.grad_n_max
    }

    /// Series sums at `(xi, theta)` in the closed exterior strip.
    pub fn eval_local(&self, xi: f64, theta: f64, with_grad: bool) -> Result<LocalEval> {
        self.frame.check_exterior(xi)?;
        let (x1, x2) = (self.frame.xi1, self.frame.xi2);
        let xi = xi.clamp(-x1, x2);
        let d = cosh_minus_cos(xi, theta);
        if !(d > 0.0) {
            return Err(Error::SingularPoint);
        }
        let sqrt_d = d.sqrt();
        let (sin_t, cos_t) = theta.sin_cos();

        // decay rates a_j and gap widths c_j for the two series
        let a = [2.0 * x1 + xi, 2.0 * x2 - xi];
        let c = [x2 - xi, x1 + xi];
        let step = [(-a[0]).exp(), (-a[1]).exp()];
        let mut e = [(-0.5 * a[0]).exp(), (-0.5 * a[1]).exp()];
        let g_step = [(-2.0 * c[0]).exp(), (-2.0 * c[1]).exp()];
        let mut g = [(-c[0]).exp(), (-c[1]).exp()];
        let worst_rate = step[0].max(step[1]);

        // value-tail prefactor and gradient-tail prefactor (Cartesian, absolute)
        let val_pref = SQRT2 * sqrt_d;
        let grad_pref =
            SQRT2 * d / self.frame.alpha * ((1.0 + xi.sinh().abs()) * 0.5 / sqrt_d + sqrt_d);
        let cap = if with_grad {
            self.grad_n_max
        } else {
            self.n_max
        };

        // half of the tolerance is reserved for rounding in the partial sums
        let budget = 0.5 * self.tol;
        let mut s0 = [CompensatedSum::new(), CompensatedSum::new()];
        let mut s1 = [0.0f64; 2];
        let mut s2 = [0.0f64; 2];
        let mut legendre = crate::specfun::LegendreSeq::new(cos_t);
        let mut n = 0usize;
        loop {
            let (p, dp) = legendre.next().unwrap_or((0.0, 0.0));
            let m = n as f64 + 0.5;
            let q = self.q[n];
            for j in 0..2 {
                let one_minus_g = if 2.0 * m * c[j] < 1.0 {
                    -(-2.0 * m * c[j]).exp_m1()
                } else {
                    1.0 - g[j]
                };
                let f = q * e[j] * one_minus_g;
                s0[j].add(f * p);
                if with_grad {
                    let df = m * q * e[j] * (1.0 + g[j]);
                    s1[j] += if j == 0 { -df } else { df } * p;
                    s2[j] += f * dp;
                }
                e[j] *= step[j];
                g[j] *= g_step[j];
            }
            n += 1;
            if n.is_multiple_of(CHECK_EVERY) || n > cap {
                // tail from term n on; q is decreasing and |P_n| <= 1
                let head = self.q[n.min(self.q.len() - 1)] * (e[0] + e[1]);
                let val_tail = val_pref * head / (1.0 - worst_rate);
                let done = if with_grad {
                    let nf = n as f64 + 1.0;
                    let growth = ((nf + 1.0) / nf).powi(2) * worst_rate;
                    let grad_tail = if growth < 1.0 {
                        grad_pref * head * nf * nf / (1.0 - growth)
                    } else {
                        f64::INFINITY
                    };
                    val_tail < budget && grad_tail < budget
                } else {
                    val_tail < budget
                };
                if done {
                    break;
                }
                if n > cap {
                    return Err(Error::TruncationCap {
                        needed: n as f64,
                        cap,
                        tol: self.tol,
                    });
                }
            }
        }

        let mut out = LocalEval {
            v: [0.0; 2],
            v_xi: [0.0; 2],
            v_theta: [0.0; 2],
            terms: n,
        };
        for j in 0..2 {
            let s0 = s0[j].value();
            out.v[j] = SQRT2 * sqrt_d * s0;
            if with_grad {
                out.v_xi[j] = SQRT2 * (0.5 * xi.sinh() / sqrt_d * s0 + sqrt_d * s1[j]);
                out.v_theta[j] = SQRT2 * sin_t * (0.5 / sqrt_d * s0 - sqrt_d * s2[j]);
            }
        }
        Ok(out)
    }

    /// `[V_1, V_2]` at a bispherical point.
    pub fn eval_potentials(&self, p: &BisphericalPoint) -> Result<[f64; 2]> {
        Ok(self.eval_local(p.xi, p.theta, false)?.v)
    }

    pub fn eval_potential(&self, j: usize, p: &BisphericalPoint) -> Result<f64> {
        check_index(j)?;
        Ok(self.eval_potentials(p)?[j - 1])
    }

    /// `u_n = d_n V_1 + V_2`.
    pub fn eval_mode(&self, n: usize, sp: &SpectralPair, p: &BisphericalPoint) -> Result<f64> {
        check_index(n)?;
        let [v1, v2] = self.eval_potentials(p)?;
        Ok(sp.d(n) * v1 + v2)
    }

    /// Cartesian gradients `[∇V_1, ∇V_2]` at a bispherical point.
    pub fn eval_grad_potentials(&self, p: &BisphericalPoint) -> Result<[[f64; 3]; 2]> {
        let loc = self.eval_local(p.xi, p.theta, true)?;
        Ok([0, 1].map(|j| self.to_cartesian_grad(p, loc.v_xi[j], loc.v_theta[j])))
    }

    pub fn eval_grad_potential(&self, j: usize, p: &BisphericalPoint) -> Result<[f64; 3]> {
        check_index(j)?;
        Ok(self.eval_grad_potentials(p)?[j - 1])
    }

    pub fn eval_grad_mode(
        &self,
        n: usize,
        sp: &SpectralPair,
        p: &BisphericalPoint,
    ) -> Result<[f64; 3]> {
        check_index(n)?;
        let [g1, g2] = self.eval_grad_potentials(p)?;
        let d = sp.d(n);
        Ok([0, 1, 2].map(|k| d * g1[k] + g2[k]))
    }

    /// Value of `field` at a bispherical point.
    pub fn eval(&self, field: Mode, sp: &SpectralPair, p: &BisphericalPoint) -> Result<f64> {
        match field {
            Mode::Potential(j) => self.eval_potential(j, p),
            Mode::Eigen(n) => self.eval_mode(n, sp, p),
        }
    }

    pub fn eval_grad(
        &self,
        field: Mode,
        sp: &SpectralPair,
        p: &BisphericalPoint,
    ) -> Result<[f64; 3]> {
        match field {
            Mode::Potential(j) => self.eval_grad_potential(j, p),
            Mode::Eigen(n) => self.eval_grad_mode(n, sp, p),
        }
    }

    /// Bispherical coordinates of an exterior Cartesian point.
    pub fn locate(&self, x: &CartesianPoint) -> Result<BisphericalPoint> {
        let sphere = match self.frame.classify(x) {
            Region::InsideD1 => 1,
            Region::InsideD2 => 2,
            Region::Boundary | Region::Exterior => return self.frame.to_bispherical(x),
        };
        // the limit points lie inside the spheres and have no finite xi
        let xi = self
            .frame
            .to_bispherical(x)
            .map_or(f64::INFINITY.copysign(x.x3), |p| p.xi);
        Err(Error::InteriorPoint { sphere, xi })
    }

    pub fn eval_at(&self, field: Mode, sp: &SpectralPair, x: &CartesianPoint) -> Result<f64> {
        self.eval(field, sp, &self.locate(x)?)
    }

    pub fn eval_grad_at(
        &self,
        field: Mode,
        sp: &SpectralPair,
        x: &CartesianPoint,
    ) -> Result<[f64; 3]> {
        self.eval_grad(field, sp, &self.locate(x)?)
    }

    fn to_cartesian_grad(&self, p: &BisphericalPoint, v_xi: f64, v_theta: f64) -> [f64; 3] {
        let sh = (0.5 * p.xi).sinh();
        let sn = (0.5 * p.theta).sin();
        // 1 - cosh ξ cos θ without cancellation
        let k = 2.0 * sn * sn - 2.0 * sh * sh + 4.0 * sh * sh * sn * sn;
        let (sin_t, _) = p.theta.sin_cos();
        let sinh_x = p.xi.sinh();
        let a = self.frame.alpha;
        let d_rho = (-sin_t * sinh_x * v_xi - k * v_theta) / a;
        let d_z = (k * v_xi - sinh_x * sin_t * v_theta) / a;
        let (s_phi, c_phi) = p.phi.sin_cos();
        [d_rho * c_phi, d_rho * s_phi, d_z]
    }
}

fn check_index(j: usize) -> Result<()> {
    if j == 1 || j == 2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "index must be 1 or 2, got {j}"
        )))
    }
}

fn norm(g: [f64; 3]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
}

/// Location and value of a gradient maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientMax {
    pub value: f64,
    pub location: BisphericalPoint,
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
fn golden_max(
    mut lo: f64,
    mut hi: f64,
    iters: usize,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Sample a 1-D profile at sorted abscissas, then refine around the best
/// sample by golden section; endpoints are kept as candidates.
fn maximise_profile(xs: &[f64], f: impl Fn(f64) -> Result<f64> + Sync) -> Result<(f64, f64)> {
    let vals: Vec<f64> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let (k, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidInput("empty sample set".into()))?;
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(xs.len() - 1)];
    if hi > lo {
        let (x, v) = golden_max(lo, hi, 60, &f)?;
        if v > best {
            return Ok((x, v));
        }
    }
    Ok((xs[k], best))
}

/// Largest `|∇u|` on the gap segment `θ = π`, `-ξ1 <= ξ <= ξ2` (both
/// contact points included).
pub fn max_gap_gradient(
    field: Mode,
    sp: &SpectralPair,
    ps: &PotentialSeries,
    samples: usize,
) -> Result<GradientMax> {
    if samples < 100 {
        return Err(Error::InvalidInput(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    let f = ps.frame();
    let (lo, hi) = (-f.xi1, f.xi2);
    let xs: Vec<f64> = (0..samples)
        .map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64)
        .collect();
    let (xi, value) = maximise_profile(&xs, |xi| {
        Ok(norm(ps.eval_grad(
            field,
            sp,
            &BisphericalPoint::on_gap_axis(xi),
        )?))
    })?;
    Ok(GradientMax {
        value,
        location: BisphericalPoint::on_gap_axis(xi),
    })
}

/// `θ` values on sphere `i` mixing a uniform `θ` grid (dense near the gap)
/// with a uniform grid in the polar angle about the sphere centre (dense on
/// the far side).
fn boundary_thetas(f: &BisphericalFrame, i: usize, samples: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let half = samples / 2;
    let (c, r, a) = (f.center(i).x3, f.radius(i), f.alpha);
    let mut out: Vec<f64> = (0..half)
        .map(|k| pi * k as f64 / (half - 1) as f64)
        .collect();
    for k in 0..half {
        let eta = pi * k as f64 / (half - 1) as f64;
        let (rho, x3) = (r * eta.sin(), c + r * eta.cos());
        out.push((2.0 * a * rho).atan2(rho * rho + x3 * x3 - a * a).abs());
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Largest `|∇u|` over both sphere surfaces. Since `|∇u|²` is
/// subharmonic and `∇u` decays at infinity, this is the maximum over the
/// whole closed exterior.
pub fn max_boundary_gradient(
    field: Mode,
    sp: &SpectralPair,
    ps: &PotentialSeries,
    samples: usize,
) -> Result<GradientMax> {
    if samples < 100 {
        return Err(Error::InvalidInput(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    let f = ps.frame();
    let mut best = GradientMax {
        value: -1.0,
        location: BisphericalPoint::on_gap_axis(0.0),
    };
    for i in 1..=2 {
        let xi = f.boundary_xi(i);
        let thetas = boundary_thetas(f, i, samples);
        let (theta, value) = maximise_profile(&thetas, |t| {
            Ok(norm(ps.eval_grad(
                field,
                sp,
                &BisphericalPoint::new(xi, t, 0.0),
            )?))
        })?;
        if value > best.value {
            best = GradientMax {
                value,
                location: BisphericalPoint::new(xi, theta, 0.0),
            };
        }
    }
    Ok(best)
}

/// Weights of `u_n = A h_1 + B h_2`, where `h_1 = V_1 + V_2` and `h_2` is
/// the combination of `V_1`, `V_2` whose volume-rescaled fluxes
/// `(1/|D_i|) ∫_{∂D_i} ∂h_2/∂ν` are `-1` on sphere 1 and `+1` on sphere 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomposition {
    pub mode: usize,
    pub a_reg: f64,
    pub b_sing: f64,
    /// `h_2 = h2_coeffs[0] V_1 + h2_coeffs[1] V_2`.
    pub h2_coeffs: [f64; 2],
    /// Largest absolute residual of the two flux equations.
    pub residual: f64,
}

/// Solve the rescaled flux balance of mode `n` over both spheres:
///
/// ```text
/// A s1 + B = λ d      (sphere 1)
/// A s2 - B = λ        (sphere 2)
/// ```
///
/// where `s_i` are the row sums of `C̃`.
pub fn h_decomposition(
    ct: &RescaledCapacitance,
    sp: &SpectralPair,
    n: usize,
) -> Result<ModeDecomposition> {
    check_index(n)?;
    let [s1, s2] = ct.row_sums;
    if !(s1 + s2 > 0.0) {
        return Err(Error::Degenerate(format!(
            "row sums {s1}, {s2} give a singular system"
        )));
    }
    let (lambda, d) = (sp.lambda(n), sp.d(n));
    // λ d written through C̃ so that λ (d + 1) is exactly 0 when d = -1
    let lambda_d = (d - 1.0) * ct.ct11 + s1;
    let a = (lambda_d + lambda) / (s1 + s2);
    let b = a * s2 - lambda;
    let residual = (a * s1 + b - lambda * d)
        .abs()
        .max((a * s2 - b - lambda).abs());

    // h_2 = x V_1 + y V_2 with -(x C̃11 + y C̃12) = -1, -(x C̃21 + y C̃22) = 1
    let det = ct.determinant();
    let x = (ct.ct22 + ct.ct12) / det;
    let y = -(ct.ct21 + ct.ct11) / det;
    Ok(ModeDecomposition {
        mode: n,
        a_reg: a,
        b_sing: b,
        h2_coeffs: [x, y],
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientStudyRow {
    pub epsilon: f64,
    /// Maximum of `|∇u_1|` over the closed exterior.
    pub max_grad_u1: f64,
    pub max_grad_u2: f64,
    pub location_u1: BisphericalPoint,
    pub location_u2: BisphericalPoint,
    /// Maxima restricted to the gap segment.
    pub gap_max_u1: f64,
    pub gap_max_u2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupStudy {
    pub r1: f64,
    pub r2: f64,
    pub rows: Vec<GradientStudyRow>,
    /// Slopes of `log max|∇u_n|` against `log ε`.
    pub slope_u1: f64,
    pub slope_u2: f64,
    /// Max/min ratios across the grid of the raw and compensated maxima.
    pub spread_u1: f64,
    pub spread_u1_eps_log: f64,
    pub spread_u2_eps: f64,
}

impl BlowupStudy {
    /// `max|∇u_1| ε |log ε|` per row.
    pub fn u1_eps_log(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.max_grad_u1 * r.epsilon * r.epsilon.ln().abs())
            .collect()
    }

    /// `max|∇u_2| ε` per row.
    pub fn u2_eps(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.max_grad_u2 * r.epsilon)
            .collect()
    }
}

/// Gradient maxima of both eigenmodes along a grid of gaps.
pub fn gradient_row(
    pair: &ResonatorPair,
    opts: &SeriesOptions,
    samples: usize,
) -> Result<GradientStudyRow> {
    let frame = pair.frame();
    let ct = rescale(&capacitance_exact(&frame, opts)?, pair);
    let sp = eigen(&ct)?;
    let ps = PotentialSeries::new(&frame, opts)?;
    let g1 = max_boundary_gradient(Mode::Eigen(1), &sp, &ps, samples)?;
    let g2 = max_boundary_gradient(Mode::Eigen(2), &sp, &ps, samples)?;
    let a1 = max_gap_gradient(Mode::Eigen(1), &sp, &ps, samples)?;
    let a2 = max_gap_gradient(Mode::Eigen(2), &sp, &ps, samples)?;
    Ok(GradientStudyRow {
        epsilon: pair.epsilon(),
        max_grad_u1: g1.value.max(a1.value),
        max_grad_u2: g2.value.max(a2.value),
        location_u1: if g1.value >= a1.value {
            g1.location
        } else {
            a1.location
        },
        location_u2: if g2.value >= a2.value {
            g2.location
        } else {
            a2.location
        },
        gap_max_u1: a1.value,
        gap_max_u2: a2.value,
    })
}

/// Run [`gradient_row`] over `eps_grid` (in parallel) and fit the rates.
pub fn blowup_study(
    r1: f64,
    r2: f64,
    eps_grid: &[f64],
    opts: &SeriesOptions,
    samples: usize,
) -> Result<BlowupStudy> {
    if eps_grid.len() < 2 {
        return Err(Error::InvalidInput("need at least two gaps".into()));
    }
    let rows: Vec<GradientStudyRow> = eps_grid
        .par_iter()
        .map(|&eps| gradient_row(&ResonatorPair::new(r1, r2, eps)?, opts, samples))
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let g1: Vec<f64> = rows.iter().map(|r| r.max_grad_u1).collect();
    let g2: Vec<f64> = rows.iter().map(|r| r.max_grad_u2).collect();
    let mut study = BlowupStudy {
        r1,
        r2,
        slope_u1: loglog_slope(&eps, &g1),
        slope_u2: loglog_slope(&eps, &g2),
        spread_u1: spread(&g1),
        spread_u1_eps_log: 0.0,
        spread_u2_eps: 0.0,
        rows,
    };
    study.spread_u1_eps_log = spread(&study.u1_eps_log());
    study.spread_u2_eps = spread(&study.u2_eps());
    Ok(study)
}
