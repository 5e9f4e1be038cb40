//! Fluctuation engine: Lyapunov covariances, noise spectra, input-output
//! spectra of the transmitted field and splitting of the noise by source.
//!
//! Conventions: dδξ/dt = −B·δξ + F, ⟨F_μ(t) F_ν^‡(t′)⟩ = D_{μν} δ(t − t′),
//! G_{μν} = ⟨δξ_μ δξ_ν^‡⟩ and δξ(t) = ∫ dω/2π e^{−iωt} δξ(ω).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, fro, hermiticity_defect, submatrix, CMatrix, I};
use crate::spinframe::{self, SqueezingReport};

/// Location of the cavity field inside a fluctuation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPort {
    pub index: usize,
    pub conj_index: usize,
    /// Cavity decay rate in the units of the system.
    pub kappa: f64,
    /// Ratio between the internal field variable and the physical intracavity
    /// amplitude (√τ for a = √τ·A2).
    pub scale: f64,
}

/// How to read the collective spin out of a fluctuation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinMap {
    pub indices: Vec<usize>,
    /// Linear map from the selected variables to (Sx, Sy, Sz).
    pub r1: CMatrix,
    /// Mean collective spin (Sx, Sy, Sz).
    pub mean: [f64; 3],
}

/// Drift and diffusion matrices of a linearized Langevin system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSystem {
    pub labels: Vec<String>,
    /// `pairing[μ]` is the index of ξ_μ^‡.
    pub pairing: Vec<usize>,
    pub drift: CMatrix,
    pub diffusion: CMatrix,
    /// Diffusion rows/columns fed by the incoming field.
    pub field_channels: Vec<usize>,
    pub field: Option<FieldPort>,
    pub spin: Option<SpinMap>,
}

impl FluctuationSystem {
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn with_diffusion(&self, diffusion: CMatrix) -> Self {
        Self {
            diffusion,
            ..self.clone()
        }
    }

    /// Diffusion restricted to the incoming-field channels.
    pub fn field_diffusion(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| {
            if self.field_channels.contains(&i) && self.field_channels.contains(&j) {
                self.diffusion[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Diffusion of all remaining (atomic) channels.
    pub fn atomic_diffusion(&self) -> CMatrix {
        &self.diffusion - self.field_diffusion()
    }

    /// Largest entry of D coupling a field channel to a non-field channel.
    pub fn cross_channel_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if self.field_channels.contains(&i) != self.field_channels.contains(&j) {
                    worst = worst.max(self.diffusion[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn diffusion_hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.diffusion)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        eigenvalues(&self.drift)
    }

    /// Smallest real part among the drift eigenvalues; positive means stable.
    pub fn stability_margin(&self) -> f64 {
        stability_margin(&self.drift)
    }
}

pub fn stability_margin(b: &CMatrix) -> f64 {
    eigenvalues(b).iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

/// Zero-time covariance G(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub labels: Vec<String>,
    pub g: CMatrix,
    /// ‖BG + GB† − D‖/‖D‖.
    pub residual: f64,
}

impl CovarianceMatrix {
    /// ⟨δA δA†⟩ of the physical intracavity field.
    pub fn field_correlation(&self, port: &FieldPort) -> Complex64 {
        self.g[(port.index, port.index)] / (port.scale * port.scale)
    }

    pub fn block(&self, indices: &[usize]) -> CMatrix {
        submatrix(&self.g, indices, indices)
    }
}

const RESIDUAL_TARGET: f64 = 1e-10;
const SINGULAR_RATIO: f64 = 1e-12;

/// Refuse unstable drift matrices and those sitting on a turning point.
pub fn check_stability(b: &CMatrix) -> Result<Vec<Complex64>> {
    let eig = eigenvalues(b);
    let offending: Vec<Complex64> = eig.iter().copied().filter(|z| !(z.re > 0.0)).collect();
    if !offending.is_empty() {
        return Err(Error::Unstable { offending });
    }
    let min_re = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let scale = fro(b).max(f64::MIN_POSITIVE);
    if 2.0 * min_re < SINGULAR_RATIO * scale {
        return Err(Error::Singular { pair_sum: 2.0 * min_re });
    }
    Ok(eig)
}

fn lyapunov_residual(b: &CMatrix, g: &CMatrix, d: &CMatrix) -> f64 {
    let r = b * g + g * b.adjoint() - d;
    let scale = fro(d);
    if scale > 0.0 {
        fro(&r) / scale
    } else {
        fro(&r)
    }
}

fn kronecker_solve(b: &CMatrix, d: &CMatrix) -> Option<CMatrix> {
    let n = b.nrows();
    let bc = b.map(|z| z.conj());
    let mut k = CMatrix::zeros(n * n, n * n);
    // column-major vec: vec(BG) = (I ⊗ B) vec G, vec(G B†) = (conj(B) ⊗ I) vec G
    for col in 0..n {
        for i in 0..n {
            for j in 0..n {
                k[(col * n + i, col * n + j)] += b[(i, j)];
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            let w = bc[(p, q)];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                k[(p * n + i, q * n + i)] += w;
            }
        }
    }
    let rhs = CMatrix::from_iterator(n * n, 1, d.iter().copied());
    let x = k.lu().solve(&rhs)?;
    Some(CMatrix::from_iterator(n, n, x.iter().copied()))
}

/// Bartels–Stewart on the complex Schur form B = Q T Q†.
fn schur_solve(b: &CMatrix, d: &CMatrix) -> Option<CMatrix> {
    let n = b.nrows();
    let (q, t) = b.clone().schur().unpack();
    let cm = q.adjoint() * d * &q;
    let mut x = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        for i in (0..n).rev() {
            let mut acc = cm[(i, j)];
            for k in (i + 1)..n {
                acc -= t[(i, k)] * x[(k, j)];
            }
            for k in (j + 1)..n {
                acc -= x[(i, k)] * t[(j, k)].conj();
            }
            let den = t[(i, i)] + t[(j, j)].conj();
            if den.norm() == 0.0 {
                return None;
            }
            x[(i, j)] = acc / den;
        }
    }
    Some(&q * x * q.adjoint())
}

/// Solve B·G + G·B† = D. Returns G and its relative residual.
pub fn lyapunov(b: &CMatrix, d: &CMatrix) -> Result<(CMatrix, f64)> {
    check_stability(b)?;
    let direct = if b.nrows() <= 12 { kronecker_solve(b, d) } else { None };
    let mut best = match direct {
        Some(g) => {
            let r = lyapunov_residual(b, &g, d);
            (g, r)
        }
        None => (CMatrix::zeros(b.nrows(), b.nrows()), f64::INFINITY),
    };
    if !(best.1 <= RESIDUAL_TARGET) {
        if let Some(g) = schur_solve(b, d) {
            let r = lyapunov_residual(b, &g, d);
            if r < best.1 {
                best = (g, r);
            }
        }
    }
    // one step of iterative refinement if needed
    if best.1 > RESIDUAL_TARGET && best.1.is_finite() {
        let (g, _) = &best;
        let rem = d - (b * g + g * b.adjoint());
        let corr = kronecker_solve(b, &rem).or_else(|| schur_solve(b, &rem));
        if let Some(c) = corr {
            let g2 = g + c;
            let r2 = lyapunov_residual(b, &g2, d);
            if r2 < best.1 {
                best = (g2, r2);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NoConvergence { residual: best.1 });
    }
    // enforce exact hermiticity, which the true solution has
    let g = (&best.0 + best.0.adjoint()) * Complex64::new(0.5, 0.0);
    let r = lyapunov_residual(b, &g, d);
    Ok((g, r))
}

pub fn solve_lyapunov(sys: &FluctuationSystem) -> Result<CovarianceMatrix> {
    let (g, residual) = lyapunov(&sys.drift, &sys.diffusion)?;
    Ok(CovarianceMatrix {
        labels: sys.labels.clone(),
        g,
        residual,
    })
}

/// Squeezing report for the spin described by `sys.spin`.
pub fn squeezing(sys: &FluctuationSystem, cov: &CovarianceMatrix) -> Result<SqueezingReport> {
    let spin = sys
        .spin
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("system carries no spin variables".into()))?;
    let gspin = spin_covariance(spin, &cov.g);
    spinframe::report(&gspin, spin.mean)
}

pub(crate) fn spin_covariance(spin: &SpinMap, g: &CMatrix) -> CMatrix {
    let block = submatrix(g, &spin.indices, &spin.indices);
    &spin.r1 * block * spin.r1.adjoint()
}

/// Spin spectrum along the minimal-variance quadrature of `report`, normalized
/// like `ds_min` so that its integral over dω/2π is the variance contribution.
pub fn minimal_component(sys: &FluctuationSystem, report: &SqueezingReport, spec: &SpectrumMatrix) -> Result<Vec<f64>> {
    let spin = sys.spin.as_ref().ok_or(Error::ZeroMeanSpin)?;
    Ok(spec.values.iter().map(|v| report.project(&spin_covariance(spin, v))).collect())
}

/// How the values of a [`SpectrumMatrix`] are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Internal variables as they are; the field is normalized so that vacuum is 1.
    Raw,
    /// Transmitted field, shot noise = 1.
    ShotNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMatrix {
    pub omega: Vec<f64>,
    pub values: Vec<CMatrix>,
    pub normalization: Normalization,
}

/// V(ω) = (B − iω)⁻¹ D (B† + iω)⁻¹.
pub fn spectral_density(b: &CMatrix, d: &CMatrix, omega: f64) -> CMatrix {
    let m = resolvent(b, omega);
    &m * d * m.adjoint()
}

fn resolvent(b: &CMatrix, omega: f64) -> CMatrix {
    let n = b.nrows();
    let shifted = b - CMatrix::identity(n, n) * (I * omega);
    shifted
        .try_inverse()
        .unwrap_or_else(|| CMatrix::from_element(n, n, Complex64::new(f64::NAN, f64::NAN)))
}

pub fn spectrum(sys: &FluctuationSystem, omega: &[f64]) -> Result<SpectrumMatrix> {
    check_stability(&sys.drift)?;
    let values = omega
        .par_iter()
        .map(|&w| spectral_density(&sys.drift, &sys.diffusion, w))
        .collect();
    Ok(SpectrumMatrix {
        omega: omega.to_vec(),
        values,
        normalization: Normalization::Raw,
    })
}

/// Transmitted-field spectra on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutgoingSpectrum {
    pub omega: Vec<f64>,
    pub s_min: Vec<f64>,
    pub s_max: Vec<f64>,
    /// 2×2 correlation matrix of (a_out, a_out†) per frequency.
    pub v: SpectrumMatrix,
}

fn outgoing_matrix(sys: &FluctuationSystem, port: &FieldPort, d: &CMatrix, omega: f64) -> CMatrix {
    let n = sys.dim();
    let m = resolvent(&sys.drift, omega);
    let s = (2.0 * port.kappa).sqrt();
    let rows = [port.index, port.conj_index];
    let k = CMatrix::from_fn(2, n, |r, col| {
        let mut v = m[(rows[r], col)] * s;
        if col == rows[r] {
            v -= Complex64::new(1.0 / s, 0.0);
        }
        v
    });
    &k * d * k.adjoint()
}

fn quadrature_extremes(v: &CMatrix) -> (f64, f64) {
    let base = v[(0, 0)].re + v[(1, 1)].re;
    let cross = 2.0 * v[(0, 1)].norm();
    (base - cross, base + cross)
}

/// Spectra of the best and worst transmitted-field quadratures with the
/// input-output relation a_out = √(2κ)·a − a_in.
pub fn outgoing_spectrum(sys: &FluctuationSystem, omega: &[f64]) -> Result<OutgoingSpectrum> {
    outgoing_with(sys, &sys.diffusion, omega)
}

fn outgoing_with(sys: &FluctuationSystem, d: &CMatrix, omega: &[f64]) -> Result<OutgoingSpectrum> {
    let port = sys
        .field
        .ok_or_else(|| Error::InvalidParams("system has no cavity field".into()))?;
    check_stability(&sys.drift)?;
    let values: Vec<CMatrix> = omega
        .par_iter()
        .map(|&w| outgoing_matrix(sys, &port, d, w))
        .collect();
    let (s_min, s_max) = values.iter().map(quadrature_extremes).unzip();
    Ok(OutgoingSpectrum {
        omega: omega.to_vec(),
        s_min,
        s_max,
        v: SpectrumMatrix {
            omega: omega.to_vec(),
            values,
            normalization: Normalization::ShotNoise,
        },
    })
}

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> CMatrix>(f: &F, a: f64, b: f64) -> (CMatrix, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = &fc * Complex64::new(WGK[7], 0.0);
    let mut gauss = &fc * Complex64::new(WG[3], 0.0);
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(mid - dx) + f(mid + dx);
        kron += &pair * Complex64::new(WGK[k], 0.0);
        if k % 2 == 1 {
            gauss += &pair * Complex64::new(WG[k / 2], 0.0);
        }
    }
    let kron = kron * Complex64::new(half, 0.0);
    let gauss = gauss * Complex64::new(half, 0.0);
    let err = (&kron - &gauss).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (kron, err)
}

/// Adaptive integral of a matrix-valued function over [a, b].
fn adaptive<F: Fn(f64) -> CMatrix + Sync>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> CMatrix {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// ∫ dω/2π V(ω) over the whole real line.
///
/// The line is mapped onto (−π/2, π/2) through ω = s·tan u, which turns the
/// 1/ω² tails of the spectra into a bounded integrand.
pub fn integrate_spectrum(sys: &FluctuationSystem, tol: f64) -> Result<CMatrix> {
    let eig = check_stability(&sys.drift)?;
    let mags: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    let s = (lo * hi).sqrt();
    let b = &sys.drift;
    let d = &sys.diffusion;
    let f = |u: f64| {
        let (sn, cs) = u.sin_cos();
        let w = s * sn / cs;
        spectral_density(b, d, w) * Complex64::new(s / (cs * cs) / (2.0 * PI), 0.0)
    };
    let scale = fro(d).max(f64::MIN_POSITIVE);
    let edge = 0.5 * PI;
    // split at the resonance scales so that narrow features are bracketed
    let mut cuts = vec![-edge, edge];
    for m in &mags {
        let u = (m / s).atan();
        cuts.push(u);
        cuts.push(-u);
    }
    cuts.push(0.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let pieces: Vec<CMatrix> = cuts
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| adaptive(&f, w[0], w[1], tol * scale * 1e-2, 40))
        .collect();
    let n = sys.dim();
    Ok(pieces.into_iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p))
}

/// Spectra and zero-time variances split into input-field and atomic sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub field: SpectrumMatrix,
    pub atomic: SpectrumMatrix,
    pub total: SpectrumMatrix,
    pub report: SqueezingReport,
    pub ds_min: f64,
    /// Part of ds_min driven by the incoming field noise.
    pub ds_field: f64,
    /// ds_min − ds_field.
    pub ds_atomic: f64,
    pub field_fraction: f64,
    /// Largest entrywise mismatch between field + atomic and total spectra.
    pub sum_defect: f64,
}

pub fn decompose(sys: &FluctuationSystem, omega: &[f64]) -> Result<Decomposition> {
    let total = spectrum(sys, omega)?;
    let field_sys = sys.with_diffusion(sys.field_diffusion());
    let atomic_sys = sys.with_diffusion(sys.atomic_diffusion());
    let field = spectrum(&field_sys, omega)?;
    let atomic = spectrum(&atomic_sys, omega)?;
    let sum_defect = total
        .values
        .iter()
        .zip(field.values.iter().zip(atomic.values.iter()))
        .map(|(t, (f, a))| {
            let scale = fro(t).max(f64::MIN_POSITIVE);
            fro(&(f + a - t)) / scale
        })
        .fold(0.0, f64::max);

    let cov = solve_lyapunov(sys)?;
    let report = squeezing(sys, &cov)?;
    let spin = sys.spin.as_ref().expect("checked by squeezing");
    let g_field = solve_lyapunov(&field_sys)?.g;
    let ds_field = report.project(&spin_covariance(spin, &g_field));
    let ds_min = report.ds_min;
    Ok(Decomposition {
        field,
        atomic,
        total,
        report,
        ds_min,
        ds_field,
        ds_atomic: ds_min - ds_field,
        field_fraction: ds_field / ds_min,
        sum_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use approx::assert_abs_diff_eq;

    fn scalar_system(rate: f64, v: f64) -> FluctuationSystem {
        FluctuationSystem {
            labels: vec!["x".into()],
            pairing: vec![0],
            drift: CMatrix::from_element(1, 1, c(rate, 0.0)),
            diffusion: CMatrix::from_element(1, 1, c(2.0 * rate * v, 0.0)),
            field_channels: vec![],
            field: None,
            spin: None,
        }
    }

    #[test]
    fn identity_drift_halves_the_diffusion() {
        let b = CMatrix::identity(2, 2);
        let d = CMatrix::identity(2, 2) * c(2.0, 0.0);
        let (g, r) = lyapunov(&b, &d).unwrap();
        assert_abs_diff_eq!(fro(&(g - CMatrix::identity(2, 2))), 0.0, epsilon = 1e-14);
        assert!(r < 1e-14);
    }

    #[test]
    fn unstable_drift_is_refused() {
        let mut b = CMatrix::identity(2, 2);
        b[(1, 1)] = c(-0.5, 3.0);
        match lyapunov(&b, &CMatrix::identity(2, 2)) {
            Err(Error::Unstable { offending }) => assert_eq!(offending.len(), 1),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn marginal_drift_is_singular() {
        let mut b = CMatrix::identity(2, 2);
        b[(1, 1)] = c(1e-16, 1.0);
        assert!(matches!(lyapunov(&b, &CMatrix::identity(2, 2)), Err(Error::Singular { .. })));
    }

    #[test]
    fn schur_and_kronecker_agree() {
        let b = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(1.0 + i as f64, 0.3 * i as f64)
            } else {
                c(0.1 * (i as f64 - j as f64), 0.05 * (i + j) as f64)
            }
        });
        let a = CMatrix::from_fn(4, 4, |i, j| c((i * j) as f64 * 0.1 + 1.0, i as f64 - j as f64));
        let d = &a * a.adjoint();
        let g1 = kronecker_solve(&b, &d).unwrap();
        let g2 = schur_solve(&b, &d).unwrap();
        assert!(fro(&(g1 - g2)) < 1e-12 * fro(&d));
    }

    #[test]
    fn lorentzian_spectrum_integrates_to_variance() {
        let sys = scalar_system(3.0, 0.7);
        let w = 1.3;
        let v = spectral_density(&sys.drift, &sys.diffusion, w)[(0, 0)].re;
        assert_abs_diff_eq!(v, 2.0 * 3.0 * 0.7 / (9.0 + w * w), epsilon = 1e-14);
        let integral = integrate_spectrum(&sys, 1e-10).unwrap();
        assert_abs_diff_eq!(integral[(0, 0)].re, 0.7, epsilon = 1e-9);
    }
}
