//! Parameter sets for the three-level and effective two-level models, and
//! the Raman reduction connecting them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Statistics of the incoming cavity field fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNoise {
    /// Squeezing parameter; 0 for vacuum.
    pub r: f64,
    /// Squeezing phase.
    pub theta: f64,
}

impl InputNoise {
    pub const VACUUM: InputNoise = InputNoise { r: 0.0, theta: 0.0 };

    /// Normally ordered input correlations in the (a, a†) basis:
    /// `[[⟨a a†⟩, ⟨a a⟩], [⟨a† a†⟩, ⟨a† a⟩]]`.
    pub fn correlations(&self) -> [[Complex64; 2]; 2] {
        let (s, ch) = (self.r.sinh(), self.r.cosh());
        let cross = s * ch;
        let e = Complex64::from_polar(1.0, self.theta);
        [
            [Complex64::new(ch * ch, 0.0), e * cross],
            [e.conj() * cross, Complex64::new(s * s, 0.0)],
        ]
    }
}

impl Default for InputNoise {
    fn default() -> Self {
        Self::VACUUM
    }
}

/// Drive of the effective model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Drive {
    /// Coherent probe specified through its intracavity intensity I2 = β2².
    Coherent { i2: f64 },
    /// Squeezed vacuum input, no mean field.
    Squeezed { r: f64, theta: f64 },
}

impl Drive {
    pub fn i2(&self) -> f64 {
        match *self {
            Drive::Coherent { i2 } => i2,
            Drive::Squeezed { .. } => 0.0,
        }
    }

    pub fn noise(&self) -> InputNoise {
        match *self {
            Drive::Coherent { .. } => InputNoise::VACUUM,
            Drive::Squeezed { r, theta } => InputNoise { r, theta },
        }
    }
}

/// Drive of the three-level model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive3 {
    /// Mean incoming amplitude ⟨A2_in⟩.
    pub amplitude: Complex64,
    pub noise: InputNoise,
}

/// Physical parameters of the Λ system in a cavity. Any consistent frequency
/// unit may be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    pub gamma: f64,
    pub gamma0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n: f64,
    pub g: f64,
    pub omega1: Complex64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub tau: f64,
    pub drive: Drive3,
}

impl ThreeLevelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("gamma0", self.gamma0),
            ("kappa", self.kappa),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.n >= 1.0) {
            return Err(Error::InvalidParams(format!("N must be at least 1, got {}", self.n)));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidParams("pumping rates must be non-negative".into()));
        }
        let total = self.n * self.gamma0;
        if ((self.lambda1 + self.lambda2) - total).abs() > 1e-9 * total {
            return Err(Error::InvalidParams(format!(
                "Λ1 + Λ2 = {} must equal N·γ0 = {total}",
                self.lambda1 + self.lambda2
            )));
        }
        Ok(())
    }

    /// Scaled coupling g/√τ acting on the scaled field a = √τ·A2.
    pub fn scaled_coupling(&self) -> f64 {
        self.g / self.tau.sqrt()
    }

    /// Mean one-photon detuning (Δ1 + Δ2)/2.
    pub fn mean_detuning(&self) -> f64 {
        0.5 * (self.delta1 + self.delta2)
    }

    /// Bare cooperativity C = g²N/(2κτγ).
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g * self.n / (2.0 * self.kappa * self.tau * self.gamma)
    }
}

/// Dimensionless parameters of the effective two-level model.
///
/// All rates are in units of the three-level ground-state decay γ0. When
/// `gamma_p_ratio > 0` the optical pumping rate Γp = `gamma_p_ratio`·γ0 is
/// folded into the two-level decay and pumping rates on use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub ctilde: f64,
    pub delta_bar: f64,
    pub delta_c: f64,
    pub rho: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n: f64,
    pub gamma_p_ratio: f64,
    pub drive: Drive,
}

impl EffectiveParams {
    /// Open-system defaults: λ1 = 0, λ2 = 1, N = 1, ρ = 1/2000, no optical pumping.
    pub fn new(ctilde: f64, delta_bar: f64, delta_c: f64, i2: f64) -> Self {
        Self {
            ctilde,
            delta_bar,
            delta_c,
            rho: 1.0 / 2000.0,
            lambda1: 0.0,
            lambda2: 1.0,
            n: 1.0,
            gamma_p_ratio: 0.0,
            drive: Drive::Coherent { i2 },
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_n(mut self, n: f64) -> Self {
        self.n = n;
        self
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_pumping(mut self, lambda1: f64) -> Self {
        self.lambda1 = lambda1;
        self.lambda2 = 1.0 - lambda1;
        self
    }

    pub fn with_gamma_p_ratio(mut self, ratio: f64) -> Self {
        self.gamma_p_ratio = ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParams(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.ctilde >= 0.0) {
            return Err(Error::InvalidParams(format!("Ctilde must be non-negative, got {}", self.ctilde)));
        }
        if !(self.gamma_p_ratio >= 0.0) {
            return Err(Error::InvalidParams("Gamma_p_ratio must be non-negative".into()));
        }
        if !(self.n >= 1.0) {
            return Err(Error::InvalidParams(format!("N must be at least 1, got {}", self.n)));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || (self.lambda1 + self.lambda2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "pumping fractions must be non-negative and sum to 1, got ({}, {})",
                self.lambda1, self.lambda2
            )));
        }
        if self.lambda1 == self.lambda2 {
            return Err(Error::DegenerateSpin);
        }
        if self.lambda1 > self.lambda2 {
            return Err(Error::InvalidParams("inverted mean spin (λ1 > λ2) is not supported".into()));
        }
        if let Drive::Coherent { i2 } = self.drive {
            if !(i2 >= 0.0) {
                return Err(Error::InvalidParams(format!("I2 must be non-negative, got {i2}")));
            }
        }
        Ok(())
    }

    pub fn unit_map(&self) -> UnitMap {
        dimensionless_scheme(self)
    }

    /// Effective two-level decay rate in units of γ0: 1 + Γp/γ0.
    pub fn total_decay(&self) -> f64 {
        1.0 + self.gamma_p_ratio
    }

    /// Pumping fractions after folding in optical pumping.
    pub fn effective_pumping(&self) -> (f64, f64) {
        let g1 = self.total_decay();
        (self.lambda1 / g1, (self.lambda2 + self.gamma_p_ratio) / g1)
    }
}

/// Internal numbers derived from [`EffectiveParams`] with γ0 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitMap {
    /// Cavity decay κ/γ0 = 1/ρ.
    pub kappa: f64,
    /// Cavity detuning Δc/γ0 = δc/ρ.
    pub cavity_detuning: f64,
    /// Scaled collective coupling G = g̃/(√τ·γ0) with G² = 2κC̃/(N(λ2 − λ1)).
    pub coupling: f64,
}

/// Fix γ0 = 1 and express the cavity quantities of `p` in that unit.
pub fn dimensionless_scheme(p: &EffectiveParams) -> UnitMap {
    let kappa = 1.0 / p.rho;
    let spin = p.lambda2 - p.lambda1;
    let coupling = if p.ctilde == 0.0 {
        0.0
    } else {
        (2.0 * kappa * p.ctilde / (p.n * spin)).sqrt()
    };
    UnitMap {
        kappa,
        cavity_detuning: p.delta_c * kappa,
        coupling,
    }
}

/// Result of the three-to-two-level reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub params: EffectiveParams,
    /// Raman coupling g̃ = gΩ1/Δ.
    pub g_tilde: Complex64,
    /// Light-shift corrected two-photon detuning δ̃ (frequency units).
    pub delta_tilde: f64,
    /// Optical pumping rate Γp = γ|Ω1/Δ|².
    pub gamma_p: f64,
    pub gamma_over_delta: f64,
    pub omega1_over_delta: f64,
}

/// Default validity threshold for |Δ|/max(γ, |Ω1|).
pub const DEFAULT_REDUCTION_THRESHOLD: f64 = 10.0;

/// Reduce the three-level parameters to the effective Raman model.
///
/// `mean_intensity` is the intracavity photon-number scale ⟨A2†A2⟩ entering
/// the probe light shift.
pub fn reduce(p: &ThreeLevelParams, mean_intensity: f64) -> Result<Reduction> {
    reduce_with_threshold(p, mean_intensity, DEFAULT_REDUCTION_THRESHOLD)
}

pub fn reduce_with_threshold(p: &ThreeLevelParams, mean_intensity: f64, threshold: f64) -> Result<Reduction> {
    p.validate()?;
    let delta = p.mean_detuning();
    let om = p.omega1.norm();
    let ratio = delta.abs() / p.gamma.max(om);
    if !(ratio >= threshold) {
        return Err(Error::ReductionInvalid { ratio, threshold });
    }
    let g_tilde = p.g * p.omega1 / delta;
    let delta_tilde = (p.delta1 - p.delta2) + om * om / delta - p.g * p.g * mean_intensity / delta;
    let gamma_p = p.gamma * (om / delta).powi(2);
    let g0 = p.gamma0;
    let ctilde = g_tilde.norm_sqr() / (2.0 * p.kappa * p.tau * g0) * (p.lambda2 - p.lambda1) / g0;
    let i2 = g_tilde.norm_sqr() * mean_intensity / (g0 * g0);
    let params = EffectiveParams {
        ctilde,
        delta_bar: delta_tilde / g0,
        delta_c: p.delta_c / p.kappa,
        rho: g0 / p.kappa,
        lambda1: p.lambda1 / (p.n * g0),
        lambda2: p.lambda2 / (p.n * g0),
        n: p.n,
        gamma_p_ratio: gamma_p / g0,
        drive: if p.drive.noise.r > 0.0 {
            Drive::Squeezed {
                r: p.drive.noise.r,
                theta: p.drive.noise.theta,
            }
        } else {
            Drive::Coherent { i2 }
        },
    };
    Ok(Reduction {
        params,
        g_tilde,
        delta_tilde,
        gamma_p,
        gamma_over_delta: p.gamma / delta.abs(),
        omega1_over_delta: om / delta.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn open_regime() -> ThreeLevelParams {
        let gamma0 = 1e-3;
        ThreeLevelParams {
            gamma: 1.0,
            gamma0,
            lambda1: 0.0,
            lambda2: gamma0,
            n: 1.0,
            g: 20.0,
            omega1: Complex64::new(10f64.sqrt(), 0.0),
            delta1: 100.0,
            delta2: 100.0,
            delta_c: 0.0,
            kappa: 2.0,
            tau: 1.0,
            drive: Drive3 {
                amplitude: Complex64::new(0.0, 0.0),
                noise: InputNoise::VACUUM,
            },
        }
    }

    #[test]
    fn reduction_of_the_open_regime() {
        let p = open_regime();
        let red = reduce(&p, 0.0).unwrap();
        assert_relative_eq!(red.gamma_p, 1e-3, max_relative = 1e-12);
        assert_relative_eq!(red.params.ctilde, p.cooperativity(), max_relative = 1e-12);
        assert_relative_eq!(red.params.ctilde, 100.0, max_relative = 1e-12);
        assert_relative_eq!(red.params.gamma_p_ratio, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn no_pump_means_no_raman_coupling() {
        let mut p = open_regime();
        p.omega1 = Complex64::new(0.0, 0.0);
        let red = reduce(&p, 3.0).unwrap();
        assert_eq!(red.g_tilde.norm(), 0.0);
        assert_eq!(red.params.ctilde, 0.0);
        assert_eq!(red.gamma_p, 0.0);
    }

    #[test]
    fn light_shifts_add_to_the_two_photon_detuning() {
        let mut p = open_regime();
        // |Ω1|²/Δ = 10 γ0 with γ0 = 1e-3
        p.omega1 = Complex64::new((10.0 * p.gamma0 * 100.0f64).sqrt(), 0.0);
        let red = reduce(&p, 0.0).unwrap();
        assert_relative_eq!(red.delta_tilde, 10.0 * p.gamma0, max_relative = 1e-12);
    }

    #[test]
    fn reduction_is_homogeneous_in_pump_and_detuning() {
        let p = open_regime();
        let mut q = p;
        q.omega1 *= 3.0;
        q.delta1 *= 3.0;
        q.delta2 *= 3.0;
        let (a, b) = (reduce(&p, 0.0).unwrap(), reduce(&q, 0.0).unwrap());
        assert_relative_eq!(a.g_tilde.re, b.g_tilde.re, max_relative = 1e-12);
        assert_relative_eq!(a.gamma_p, b.gamma_p, max_relative = 1e-12);
        assert_relative_eq!(a.params.ctilde, b.params.ctilde, max_relative = 1e-12);
    }

    #[test]
    fn reduction_refuses_small_detuning() {
        let mut p = open_regime();
        p.delta1 = 5.0;
        p.delta2 = 5.0;
        assert!(matches!(reduce(&p, 0.0), Err(Error::ReductionInvalid { .. })));
    }

    #[test]
    fn rho_sets_the_cavity_decay() {
        let p = EffectiveParams::new(100.0, 0.0, 0.0, 0.25);
        assert_relative_eq!(p.unit_map().kappa, 2000.0);
    }

    #[test]
    fn pumping_fractions_must_sum_to_one() {
        let mut p = EffectiveParams::new(1.0, 0.0, 0.0, 0.0);
        p.lambda1 = 0.3;
        assert!(p.validate().is_err());
        assert_eq!(
            EffectiveParams::new(1.0, 0.0, 0.0, 0.0).with_pumping(0.5).validate(),
            Err(Error::DegenerateSpin)
        );
    }
}
