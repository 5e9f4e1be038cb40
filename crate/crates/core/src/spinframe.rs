//! Rotation of spin covariances into the mean-spin frame and extraction of
//! the normalized minimal and maximal transverse variances.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2x3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub theta: f64,
    pub phi: f64,
    /// Quadrature angle in the transverse plane that minimizes the variance.
    pub alpha0: f64,
    pub ds_x: f64,
    pub ds_y: f64,
    pub ds_xy: Complex64,
    /// Minimal variance normalized to the coherent-spin-state level |⟨S⟩|/2.
    pub ds_min: f64,
    pub ds_max: f64,
    pub mean_spin_norm: f64,
}

impl SqueezingReport {
    /// Normalized variance of another covariance contribution along the same
    /// optimal quadrature (used to split the variance by noise source).
    pub fn project(&self, gspin: &CMatrix) -> f64 {
        let (x, y, xy) = transverse_variances(gspin, self.theta, self.phi);
        quadrature_variance(x, y, xy.re, self.alpha0) / (self.mean_spin_norm / 2.0)
    }

    /// Product ds_min·ds_max, which should not fall below one.
    pub fn uncertainty_product(&self) -> f64 {
        self.ds_min * self.ds_max
    }
}

/// Polar angles of the mean spin. φ is set to 0 when the transverse part vanishes.
pub fn mean_spin_angles(mean: [f64; 3]) -> Result<(f64, f64)> {
    let norm = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroMeanSpin);
    }
    let theta = (mean[2] / norm).clamp(-1.0, 1.0).acos();
    let s_phi = mean[0].hypot(mean[1]);
    let phi = if s_phi <= f64::EPSILON * norm {
        0.0
    } else {
        mean[1].atan2(mean[0])
    };
    Ok((theta, phi))
}

/// Map from (S+, S−, Sz) fluctuations to Cartesian (Sx, Sy, Sz).
pub fn r1_two_level() -> CMatrix {
    let h = 0.5;
    DMatrix::from_row_slice(
        3,
        3,
        &[
            c(h, 0.0),
            c(h, 0.0),
            c(0.0, 0.0),
            c(0.0, -h),
            c(0.0, h),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        ],
    )
}

/// Map from (Pr, Pr†, Sz1, Sz2) fluctuations to the Cartesian components of
/// the ground-state spin, with Scz = Sz2 − Sz1 = (Π2 − Π1)/2.
pub fn r1_three_level() -> CMatrix {
    let h = 0.5;
    let z = c(0.0, 0.0);
    DMatrix::from_row_slice(
        3,
        4,
        &[
            c(h, 0.0),
            c(h, 0.0),
            z,
            z,
            c(0.0, -h),
            c(0.0, h),
            z,
            z,
            z,
            z,
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ],
    )
}

/// R1·Gc·R1† for the 4×4 ground-state block of the three-level covariance.
pub fn to_c_spin(gc: &CMatrix) -> CMatrix {
    let r1 = r1_three_level();
    &r1 * gc * r1.adjoint()
}

/// R1·G·R1† for the 3×3 (S+, S−, Sz) block of the two-level covariance.
pub fn to_c_spin_two_level(g: &CMatrix) -> CMatrix {
    let r1 = r1_two_level();
    &r1 * g * r1.adjoint()
}

fn r2(theta: f64, phi: f64) -> Matrix2x3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix2x3::new(ct * cp, ct * sp, -st, -sp, cp, 0.0)
}

/// Second moments (X, Y, XY) of the two axes orthogonal to the mean spin.
pub fn transverse_variances(gspin: &CMatrix, theta: f64, phi: f64) -> (f64, f64, Complex64) {
    let r = r2(theta, phi);
    let mut t = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (a, row) in t.iter_mut().enumerate() {
        for (b, out) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    acc += r[(a, i)] * gspin[(i, j)] * r[(b, j)];
                }
            }
            *out = acc;
        }
    }
    (t[0][0].re, t[1][1].re, t[0][1])
}

/// Variance of cos α·S_X + sin α·S_Y.
pub fn quadrature_variance(x: f64, y: f64, xy_re: f64, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    x * c * c + y * s * s + 2.0 * xy_re * s * c
}

/// Optimal quadrature angle and the normalized extreme variances.
///
/// Only the real part of the cross moment enters. When the transverse noise
/// is isotropic the angle is reported as 0.
pub fn minimal_variance(x: f64, y: f64, xy: Complex64, mean_norm: f64) -> Result<(f64, f64, f64)> {
    if !(mean_norm.abs() > 0.0) {
        return Err(Error::ZeroMeanSpin);
    }
    let half_diff = 0.5 * (x - y);
    let radius = half_diff.hypot(xy.re);
    let centre = 0.5 * (x + y);
    let norm = mean_norm.abs() / 2.0;
    let alpha0 = if radius <= 1e-15 * centre.abs().max(f64::MIN_POSITIVE) {
        0.0
    } else {
        let psi = (2.0 * xy.re).atan2(x - y);
        if psi > 0.0 {
            0.5 * (psi - PI)
        } else {
            0.5 * (psi + PI)
        }
    };
    Ok((alpha0, (centre - radius) / norm, (centre + radius) / norm))
}

/// Full report for a Cartesian spin covariance and mean spin vector.
pub fn report(gspin: &CMatrix, mean: [f64; 3]) -> Result<SqueezingReport> {
    let (theta, phi) = mean_spin_angles(mean)?;
    let norm = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
    let (x, y, xy) = transverse_variances(gspin, theta, phi);
    let (alpha0, ds_min, ds_max) = minimal_variance(x, y, xy, norm)?;
    Ok(SqueezingReport {
        theta,
        phi,
        alpha0,
        ds_x: x,
        ds_y: y,
        ds_xy: xy,
        ds_min,
        ds_max,
        mean_spin_norm: norm,
    })
}
