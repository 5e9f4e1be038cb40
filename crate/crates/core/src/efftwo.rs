//! Effective two-level Raman model.
//!
//! Steady states are given per atom (`s_plus = ⟨S+⟩/N`, `s_z = ⟨Sz⟩/N`),
//! the drive through the real dimensionless amplitude β2 = G·⟨a⟩ with
//! I2 = β2². Time is measured in units of γ0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, re, reorder, CMatrix, I};
use crate::noise::{FieldPort, SpinMap};
use crate::params::EffectiveParams;
use crate::spinframe::r1_two_level;

pub use crate::noise::FluctuationSystem;

/// Position of an operating point on the bistability curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// The input-output curve is single valued here.
    Unique,
    Lower,
    /// Negative slope, unstable.
    Middle,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState2L {
    pub s_plus: Complex64,
    pub s_minus: Complex64,
    pub s_z: f64,
    pub beta2: f64,
    pub i2: f64,
    /// Ω2/Ω1 at this point; zero outside the corrected model.
    pub omega_ratio: f64,
    pub branch: Branch,
}

impl SteadyState2L {
    /// Mean collective spin (Sx, Sy, Sz) for `n` atoms.
    pub fn mean_spin(&self, n: f64) -> [f64; 3] {
        [n * self.s_plus.re, n * self.s_plus.im, n * self.s_z]
    }
}

/// Closed-form steady state of the uncorrected model.
///
/// With optical pumping (`gamma_p_ratio > 0`) this is the substituted model
/// γ0 → γ0 + Γp, Λ2 → Λ2 + NΓp, i.e. the corrected model at Ω2/Ω1 = 0.
pub fn steady_state(p: &EffectiveParams, i2: f64) -> Result<SteadyState2L> {
    p.validate()?;
    if !(i2 >= 0.0) {
        return Err(Error::InvalidParams(format!("I2 must be non-negative, got {i2}")));
    }
    if p.gamma_p_ratio > 0.0 {
        return corrected_steady_state(p, i2, 0.0);
    }
    let beta = i2.sqrt();
    let db = p.delta_bar;
    let x = 1.0 + db * db + 4.0 * i2;
    let spin = p.lambda2 - p.lambda1;
    let s_plus = c(-db, 1.0) * (spin * beta / x);
    Ok(SteadyState2L {
        s_plus,
        s_minus: s_plus.conj(),
        s_z: spin * (1.0 + db * db) / (2.0 * x),
        beta2: beta,
        i2,
        omega_ratio: 0.0,
        branch: classify(p, i2),
    })
}

/// Steady state of the model with optical pumping Γp and the −Γp·Ω2/Ω1 drive
/// on S+. `omega_ratio` is Ω2/Ω1 at the operating point.
pub fn corrected_steady_state(p: &EffectiveParams, i2: f64, omega_ratio: f64) -> Result<SteadyState2L> {
    p.validate()?;
    if !(i2 >= 0.0) {
        return Err(Error::InvalidParams(format!("I2 must be non-negative, got {i2}")));
    }
    let beta = i2.sqrt();
    let gb = p.gamma_p_ratio;
    let g1 = p.total_decay();
    let db = p.delta_bar;
    let drive = re(gb * omega_ratio);
    // unknowns (s+, s−, s_z)
    let m = nalgebra::Matrix3::new(
        -c(g1, -db),
        c(0.0, 0.0),
        I * (2.0 * beta),
        c(0.0, 0.0),
        -c(g1, db),
        -I * (2.0 * beta),
        I * beta,
        -I * beta,
        re(-g1),
    );
    let rhs = nalgebra::Vector3::new(drive, drive, re(-(gb + p.lambda2 - p.lambda1) / 2.0));
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Unphysical("singular steady-state equations".into()))?;
    Ok(SteadyState2L {
        s_plus: sol[0],
        s_minus: sol[1],
        s_z: sol[2].re,
        beta2: beta,
        i2,
        omega_ratio,
        branch: classify(p, i2),
    })
}

/// Normalized input intensity I2_in = |β2(1 + iδc) − i(2C̃/(λ2 − λ1))·s+|².
pub fn input_intensity(p: &EffectiveParams, i2: f64) -> Result<f64> {
    let ss = steady_state(p, i2)?;
    Ok(input_intensity_at(p, &ss))
}

pub fn input_intensity_at(p: &EffectiveParams, ss: &SteadyState2L) -> f64 {
    let k = 2.0 * p.ctilde / (p.lambda2 - p.lambda1);
    (c(ss.beta2, ss.beta2 * p.delta_c) - I * k * ss.s_plus).norm_sqr()
}

/// Parameters (C′, δ̄′, g1) of the equivalent pumping-free curve
/// I_in = g1²·I′·|1 + iδc + 2C′(1 + iδ̄′)/X′|² with I = g1²·I′.
fn reduced_curve(p: &EffectiveParams) -> (f64, f64, f64) {
    let g1 = p.total_decay();
    let (l1, l2) = p.effective_pumping();
    let cp = p.ctilde * (l2 - l1) / ((p.lambda2 - p.lambda1) * g1);
    (cp, p.delta_bar / g1, g1)
}

/// Intracavity intensities I2 at which dI2_in/dI2 = 0, ascending. Either
/// empty or two values.
pub fn turning_points(p: &EffectiveParams) -> Vec<f64> {
    let (cp, db, g1) = reduced_curve(p);
    let a0 = 1.0 + db * db;
    let k = 2.0 * cp * db;
    let q2 = 1.0 + p.delta_c * p.delta_c;
    let q1 = 4.0 * cp + 2.0 * p.delta_c * k;
    let q0 = 4.0 * cp * cp + k * k;
    // q2 u³ + (a0 q1 − q0) u + 2 a0 q0 = 0 in u = X′
    let mut roots: Vec<f64> = depressed_cubic_roots(q2, a0 * q1 - q0, 2.0 * a0 * q0)
        .into_iter()
        .filter(|&u| u > a0 * (1.0 + 1e-12))
        .map(|u| g1 * g1 * (u - a0) / 4.0)
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if roots.len() == 2 {
        roots
    } else {
        Vec::new()
    }
}

/// Real roots of a·u³ + b·u + c = 0.
fn depressed_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let (p, q) = (b / a, c / a);
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    if disc > 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let t = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| m * (t - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    }
}

fn classify(p: &EffectiveParams, i2: f64) -> Branch {
    match turning_points(p).as_slice() {
        [lo, hi] if i2 < *lo => Branch::Lower,
        [_, hi] if i2 > *hi => Branch::Upper,
        [_, _] => Branch::Middle,
        _ => Branch::Unique,
    }
}

/// 5×5 drift in the basis (a, a†, S+, S−, Sz).
///
/// For a steady state with Ω2/Ω1 ≠ 0 the field–Sz coupling from the
/// population-dependent cavity shift and the S+–field coupling from the
/// Ω2-dependent pumping term are included.
pub fn drift_matrix_5(p: &EffectiveParams, ss: &SteadyState2L) -> CMatrix {
    let u = p.unit_map();
    let (kappa, dc, g) = (u.kappa, u.cavity_detuning, u.coupling);
    let n = p.n;
    let beta = ss.beta2;
    let g1 = p.total_decay();
    let db = p.delta_bar;
    let mu = if beta > 0.0 { ss.omega_ratio / beta } else { 0.0 };
    let sz = n * ss.s_z;
    let (sp, sm) = (ss.s_plus * n, ss.s_minus * n);
    let shift = I * (mu * g * beta);
    let pump = re(p.gamma_p_ratio * mu * n * g);
    let z = c(0.0, 0.0);
    CMatrix::from_row_slice(
        5,
        5,
        &[
            c(kappa, dc), z, -I * g, z, -shift,
            z, c(kappa, -dc), z, I * g, shift,
            -I * (2.0 * g * sz) + pump, z, c(g1, -db), z, -I * (2.0 * beta),
            z, I * (2.0 * g * sz) + pump, z, c(g1, db), I * (2.0 * beta),
            I * g * sm, -I * g * sp, -I * beta, I * beta, re(g1),
        ],
    )
}

/// Field diffusion block in the (a, a†) basis: 2κ·[[cosh²r, sinh r cosh r·e^{iθ}], [c.c., sinh²r]].
pub fn diffusion_field(p: &EffectiveParams) -> CMatrix {
    let kappa = p.unit_map().kappa;
    let corr = p.drive.noise().correlations();
    CMatrix::from_fn(2, 2, |i, j| corr[i][j] * (2.0 * kappa))
}

/// Atomic diffusion block over (S+, S−, Sz) in the ⟨F_μ^‡ F_ν⟩ ordering,
/// scaled by N (γ0 = 1). Optical pumping enters through the substituted rates.
pub fn diffusion_atomic(p: &EffectiveParams, ss: &SteadyState2L) -> CMatrix {
    let g1 = p.total_decay();
    let (l1, l2) = p.effective_pumping();
    dat(p.n * g1, l1, l2, ss.s_plus, ss.s_minus, ss.s_z)
}

fn dat(scale: f64, l1: f64, l2: f64, sp: Complex64, sm: Complex64, sz: f64) -> CMatrix {
    let l = l1 - l2;
    let z = c(0.0, 0.0);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            re(1.0 + l / 2.0 - sz),
            z,
            sm * ((1.0 + l) / 2.0),
            z,
            re(1.0 - l / 2.0 + sz),
            sp * ((l - 1.0) / 2.0),
            sp * ((1.0 + l) / 2.0),
            sm * ((l - 1.0) / 2.0),
            re(0.5 + l * sz),
        ],
    ) * re(scale)
}

const PAIRING_5: [usize; 5] = [1, 0, 3, 2, 4];
const PAIRING_3: [usize; 3] = [1, 0, 2];

/// Drift, diffusion and read-out maps of the 5×5 linearized model.
pub fn fluctuation_system(p: &EffectiveParams, ss: &SteadyState2L) -> FluctuationSystem {
    let mut d = CMatrix::zeros(5, 5);
    d.view_mut((0, 0), (2, 2)).copy_from(&diffusion_field(p));
    let at = reorder(&diffusion_atomic(p, ss), &PAIRING_3);
    d.view_mut((2, 2), (3, 3)).copy_from(&at);
    FluctuationSystem {
        labels: ["a", "a†", "S+", "S-", "Sz"].map(String::from).to_vec(),
        pairing: PAIRING_5.to_vec(),
        drift: drift_matrix_5(p, ss),
        diffusion: d,
        field_channels: vec![0, 1],
        field: Some(FieldPort {
            index: 0,
            conj_index: 1,
            kappa: p.unit_map().kappa,
            scale: 1.0,
        }),
        spin: Some(SpinMap {
            indices: vec![2, 3, 4],
            r1: r1_two_level(),
            mean: ss.mean_spin(p.n),
        }),
    }
}

/// Drift of the bad-cavity model with the field eliminated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticDrift {
    /// 3×3 drift over (S+, S−, Sz).
    pub b: CMatrix,
    /// Power-broadened decay γ′ = 1 + 4C̃·s_z/(1 + δc²).
    pub gamma_prime: f64,
    /// False outside 1 ≪ C̃ ≪ 1/ρ, where the elimination is not justified.
    pub in_regime: bool,
}

pub fn adiabatic_drift(p: &EffectiveParams, ss: &SteadyState2L) -> AdiabaticDrift {
    let ct = p.ctilde;
    let spin = p.lambda2 - p.lambda1;
    let (db, dc, b) = (p.delta_bar, p.delta_c, ss.beta2);
    let plus = c(1.0, dc);
    let minus = c(1.0, -dc);
    let k = 4.0 * ct * ss.s_z / spin;
    let z = c(0.0, 0.0);
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0, -db) + k / plus,
            z,
            -I * (2.0 * b),
            z,
            c(1.0, db) + k / minus,
            I * (2.0 * b),
            -I * b - ss.s_minus * (2.0 * ct) / plus,
            I * b - ss.s_plus * (2.0 * ct) / minus,
            re(1.0),
        ],
    );
    let kappa = 1.0 / p.rho;
    AdiabaticDrift {
        b: m,
        gamma_prime: 1.0 + 4.0 * ct * ss.s_z / (1.0 + dc * dc),
        in_regime: ct > 1.0 && 10.0 * ct < kappa,
    }
}

/// Diffusion of the bad-cavity model in the system ordering:
/// N·(Dat + 4C̃/(1 + δc²)·M) with M carrying the field noise.
pub fn adiabatic_diffusion(p: &EffectiveParams, ss: &SteadyState2L) -> CMatrix {
    let (sp, sm, sz) = (ss.s_plus, ss.s_minus, ss.s_z);
    let at = reorder(&dat(1.0, p.lambda1, p.lambda2, sp, sm, sz), &PAIRING_3);
    let z = c(0.0, 0.0);
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[re(4.0 * sz * sz), z, sp * (-2.0 * sz), z, z, z, sm * (-2.0 * sz), z, sp * sm],
    );
    (at + m * re(4.0 * p.ctilde / (1.0 + p.delta_c * p.delta_c))) * re(p.n)
}

pub fn adiabatic_system(p: &EffectiveParams, ss: &SteadyState2L) -> FluctuationSystem {
    FluctuationSystem {
        labels: ["S+", "S-", "Sz"].map(String::from).to_vec(),
        pairing: PAIRING_3.to_vec(),
        drift: adiabatic_drift(p, ss).b,
        diffusion: adiabatic_diffusion(p, ss),
        field_channels: vec![],
        field: None,
        spin: Some(SpinMap {
            indices: vec![0, 1, 2],
            r1: r1_two_level(),
            mean: ss.mean_spin(p.n),
        }),
    }
}

/// Minimal variance of the bad-cavity model at δ̄ = δc = 0, 4I2 = 1.
/// Tends to 1/√2 for large C̃; exactly 1 at C̃ = 0, where there is no drive.
pub fn analytic_min_variance(ctilde: f64) -> Result<f64> {
    let i2 = if ctilde == 0.0 { 0.0 } else { 0.25 };
    let p = EffectiveParams::new(ctilde, 0.0, 0.0, i2);
    let ss = steady_state(&p, i2)?;
    let sys = adiabatic_system(&p, &ss);
    let cov = crate::noise::solve_lyapunov(&sys)?;
    Ok(crate::noise::squeezing(&sys, &cov)?.ds_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro;
    use crate::noise::{solve_lyapunov, squeezing};
    use approx::assert_abs_diff_eq;

    #[test]
    fn optimal_drive_maximizes_the_coherence() {
        let p = EffectiveParams::new(100.0, 0.0, 0.0, 0.25);
        let ss = steady_state(&p, 0.25).unwrap();
        assert_abs_diff_eq!(ss.s_z, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ss.s_plus.norm(), 0.25, epsilon = 1e-15);
        let far = steady_state(&EffectiveParams::new(100.0, 10.0, 0.0, 25.2), 25.2).unwrap();
        assert_abs_diff_eq!(far.s_plus.norm(), 0.249_999_88, epsilon = 1e-8);
    }

    #[test]
    fn no_field_leaves_the_atoms_pumped() {
        let ss = steady_state(&EffectiveParams::new(5.0, 3.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(ss.s_z, 0.5);
        assert_eq!(ss.s_plus.norm(), 0.0);
    }

    #[test]
    fn closed_form_solves_the_mean_equations() {
        let p = EffectiveParams::new(50.0, 4.0, 0.3, 3.0);
        let ss = steady_state(&p, 3.0).unwrap();
        let b = ss.beta2;
        let r1 = -c(1.0, -p.delta_bar) * ss.s_plus + I * (2.0 * b * ss.s_z);
        let r3 = -ss.s_z + 0.5 + (I * b * (ss.s_plus - ss.s_minus)).re;
        assert!(r1.norm() < 1e-15 && r3.abs() < 1e-15);
    }

    #[test]
    fn corrected_model_reduces_to_the_substituted_one() {
        let p = EffectiveParams::new(100.0, 3.0, 0.0, 0.0);
        let a = steady_state(&p, 2.0).unwrap();
        let b = corrected_steady_state(&p, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!((a.s_plus - b.s_plus).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.s_z, b.s_z, epsilon = 1e-15);

        let q = p.with_gamma_p_ratio(1.0);
        let i2 = (4.0 + 9.0) / 4.0;
        let ss = steady_state(&q, i2).unwrap();
        assert_abs_diff_eq!(ss.s_plus.norm(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn empty_cavity_input_intensity() {
        let p = EffectiveParams::new(0.0, 2.0, 0.0, 0.0);
        assert_abs_diff_eq!(input_intensity(&p, 3.0).unwrap(), 3.0, epsilon = 1e-14);
        let p = EffectiveParams::new(0.0, 2.0, 1.0, 0.0);
        assert_abs_diff_eq!(input_intensity(&p, 3.0).unwrap(), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn turning_points_bracket_the_negative_slope() {
        let p = EffectiveParams::new(100.0, 0.0, 0.0, 0.0);
        let tp = turning_points(&p);
        assert_eq!(tp.len(), 2);
        assert_abs_diff_eq!(tp[0], 0.255, epsilon = 1e-3);
        assert_abs_diff_eq!(tp[1], 49.2, epsilon = 0.05);
        for &t in &tp {
            let h = 1e-6 * t;
            let slope = (input_intensity(&p, t + h).unwrap() - input_intensity(&p, t - h).unwrap()) / (2.0 * h);
            assert!(slope.abs() < 1e-4 * input_intensity(&p, t).unwrap() / t);
        }
        assert!(turning_points(&EffectiveParams::new(0.0, 0.0, 0.0, 0.0)).is_empty());
        assert_eq!(steady_state(&p, 1.0).unwrap().branch, Branch::Middle);
        assert_eq!(steady_state(&p, 0.1).unwrap().branch, Branch::Lower);
    }

    #[test]
    fn drift_row_entries() {
        let p = EffectiveParams::new(100.0, 10.0, 0.0, 25.2);
        let ss = steady_state(&p, 25.2).unwrap();
        let b = drift_matrix_5(&p, &ss);
        let g = p.unit_map().coupling;
        assert_eq!(b[(0, 2)], -I * g);
        assert_eq!(b[(0, 0)], c(2000.0, 0.0));
        let zero = steady_state(&EffectiveParams::new(100.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        let b0 = drift_matrix_5(&p, &zero);
        assert_eq!(b0[(4, 0)].norm() + b0[(4, 1)].norm(), 0.0);
    }

    #[test]
    fn atomic_diffusion_examples() {
        let p = EffectiveParams::new(1.0, 0.0, 0.0, 0.0);
        let ss = steady_state(&p, 0.0).unwrap();
        let d = diffusion_atomic(&p, &ss);
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(0.0), re(2.0), re(0.0)]));
        assert!(fro(&(d - want)) < 1e-15);

        let d = dat(1.0, 0.5, 0.5, c(0.0, 0.0), c(0.0, 0.0), 0.0);
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![re(1.0), re(1.0), re(0.5)]));
        assert!(fro(&(d - want)) < 1e-15);
    }

    #[test]
    fn squeezed_input_cross_term() {
        let p = EffectiveParams::new(1.0, 0.0, 0.0, 0.0).with_drive(crate::params::Drive::Squeezed { r: 0.5, theta: 0.0 });
        let d = diffusion_field(&p);
        assert_abs_diff_eq!(d[(0, 1)].re / (2.0 * 2000.0), 0.5 * 1f64.sinh(), epsilon = 1e-12);
    }

    #[test]
    fn power_broadened_width() {
        let p = EffectiveParams::new(100.0, 0.0, 0.0, 0.25);
        let ss = steady_state(&p, 0.25).unwrap();
        let ad = adiabatic_drift(&p, &ss);
        assert_abs_diff_eq!(ad.gamma_prime, 101.0, epsilon = 1e-12);
        assert!(ad.in_regime);
    }

    #[test]
    fn adiabatic_limit_approaches_one_over_root_two() {
        assert_eq!(analytic_min_variance(0.0).unwrap(), 1.0);
        let v = analytic_min_variance(1e5).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-4);
    }

    #[test]
    fn adiabatic_and_full_models_agree_in_the_bad_cavity_limit() {
        let p = EffectiveParams::new(100.0, 0.0, 0.0, 0.25);
        let ss = steady_state(&p, 0.25).unwrap();
        let full = fluctuation_system(&p, &ss);
        let adi = adiabatic_system(&p, &ss);
        let a = squeezing(&full, &solve_lyapunov(&full).unwrap()).unwrap().ds_min;
        let b = squeezing(&adi, &solve_lyapunov(&adi).unwrap()).unwrap().ds_min;
        assert!((a - b).abs() / a < 0.01);
    }
}
