//! Parameter studies built on the models: bistability, optimization of the
//! self-squeezing operating point, squeezing transfer and the comparison of
//! the effective and three-level models.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::efftwo::{self, SteadyState2L};
use crate::error::{Error, Result};
use crate::lambda3;
use crate::noise::{self, outgoing_spectrum, solve_lyapunov, squeezing, FluctuationSystem};
use crate::params::{Drive, Drive3, EffectiveParams, InputNoise, ThreeLevelParams};
use crate::spinframe::SqueezingReport;

/// Fully resolved operating point of the effective model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub params: EffectiveParams,
    pub i2: f64,
    pub steady: SteadyState2L,
    /// Smallest real part of the drift eigenvalues.
    pub stability_margin: f64,
    pub report: SqueezingReport,
}

impl OperatingPoint {
    pub fn ds_min(&self) -> f64 {
        self.report.ds_min
    }
}

/// Solve the full 5×5 model at `p` with intracavity intensity `i2`.
pub fn operating_point(p: &EffectiveParams, i2: f64) -> Result<OperatingPoint> {
    let mut params = *p;
    if let Drive::Coherent { .. } = params.drive {
        params.drive = Drive::Coherent { i2 };
    }
    let steady = efftwo::steady_state(&params, i2)?;
    let sys = efftwo::fluctuation_system(&params, &steady);
    let cov = solve_lyapunov(&sys)?;
    let report = squeezing(&sys, &cov)?;
    Ok(OperatingPoint {
        params,
        i2,
        steady,
        stability_margin: sys.stability_margin(),
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistabilityCurve {
    /// (I2, I2_in) pairs.
    pub samples: Vec<(f64, f64)>,
    /// (I2, I2_in) at the turning points; empty or two entries.
    pub turning_points: Vec<(f64, f64)>,
}

pub fn bistability_curve(p: &EffectiveParams, i2_values: &[f64]) -> Result<BistabilityCurve> {
    let samples = i2_values
        .iter()
        .map(|&i| efftwo::input_intensity(p, i).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    let turning_points = efftwo::turning_points(p)
        .into_iter()
        .map(|i| efftwo::input_intensity(p, i).map(|v| (i, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BistabilityCurve {
        samples,
        turning_points,
    })
}

/// Smallest C̃ at which the input-output curve develops turning points for
/// the detunings of `p`, or `None` if it stays monotone up to C̃ = 1e8.
pub fn bistability_threshold(p: &EffectiveParams) -> Option<f64> {
    let bistable = |c: f64| {
        let mut q = *p;
        q.ctilde = c;
        !efftwo::turning_points(&q).is_empty()
    };
    let mut hi = 1.0;
    while !bistable(hi) {
        hi *= 2.0;
        if hi > 1e8 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bistable(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Search settings of [`optimize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub delta_c_min: f64,
    pub delta_c_max: f64,
    pub delta_c_step: f64,
    /// Points of the logarithmic I2 grid spanning e^{±span} around (g1² + δ̄²)/4.
    pub i2_points: usize,
    pub i2_log_span: f64,
    /// Points rejected unless every drift eigenvalue has real part above this.
    pub min_margin: f64,
    pub refine: bool,
    pub max_iters: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            delta_c_min: -1.0,
            delta_c_max: 1.0,
            delta_c_step: 0.05,
            i2_points: 81,
            i2_log_span: 2.0,
            min_margin: 1e-3,
            refine: true,
            max_iters: 400,
        }
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub delta_c: f64,
    pub i2: f64,
    /// `None` when the point is unstable or too close to a turning point.
    pub ds_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub point: OperatingPoint,
    pub evaluations: Vec<Evaluation>,
}

fn evaluate(base: &EffectiveParams, dc: f64, i2: f64, min_margin: f64) -> Option<f64> {
    let mut p = *base;
    p.delta_c = dc;
    let ss = efftwo::steady_state(&p, i2).ok()?;
    let sys = efftwo::fluctuation_system(&p, &ss);
    if !(sys.stability_margin() > min_margin) {
        return None;
    }
    let cov = solve_lyapunov(&sys).ok()?;
    let v = squeezing(&sys, &cov).ok()?.ds_min;
    (v > 0.0 && v.is_finite()).then_some(v)
}

fn i2_grid(p: &EffectiveParams, opts: &OptimizerOptions) -> Vec<f64> {
    let g1 = p.total_decay();
    let centre = (g1 * g1 + p.delta_bar * p.delta_bar) / 4.0;
    let n = opts.i2_points.max(2);
    let mut grid: Vec<f64> = (0..n)
        .map(|k| {
            let t = -opts.i2_log_span + 2.0 * opts.i2_log_span * k as f64 / (n - 1) as f64;
            centre * t.exp()
        })
        .collect();
    if let [lo, hi] = efftwo::turning_points(p).as_slice() {
        for k in 1..=8 {
            let eps = 10f64.powi(-k);
            grid.push(lo * (1.0 - eps));
            grid.push(hi * (1.0 + eps));
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

struct Landscape<'a> {
    base: &'a EffectiveParams,
    opts: &'a OptimizerOptions,
    log: RefCell<Vec<Evaluation>>,
}

const INFEASIBLE: f64 = 10.0;

impl CostFunction for Landscape<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (dc, i2) = (x[0], x[1].exp());
        if dc < self.opts.delta_c_min || dc > self.opts.delta_c_max {
            return Ok(INFEASIBLE);
        }
        let v = evaluate(self.base, dc, i2, self.opts.min_margin);
        self.log.borrow_mut().push(Evaluation { delta_c: dc, i2, ds_min: v });
        Ok(v.unwrap_or(INFEASIBLE))
    }
}

/// Best self-squeezing operating point for C̃ and δ̄ with default search settings.
pub fn optimize_squeezing(ctilde: f64, delta_bar: f64) -> Result<Optimum> {
    optimize_with(&EffectiveParams::new(ctilde, delta_bar, 0.0, 0.0), &OptimizerOptions::default())
}

/// Minimize ΔS_min over (δc, I2) for the remaining parameters of `base`:
/// a coarse grid in δc and log I2, then Nelder–Mead from the best grid point.
pub fn optimize_with(base: &EffectiveParams, opts: &OptimizerOptions) -> Result<Optimum> {
    base.validate()?;
    if base.ctilde == 0.0 {
        let point = operating_point(base, 0.0)?;
        return Ok(Optimum {
            point,
            evaluations: Vec::new(),
        });
    }
    let steps = ((opts.delta_c_max - opts.delta_c_min) / opts.delta_c_step).round() as usize;
    let dcs: Vec<f64> = (0..=steps).map(|k| opts.delta_c_min + k as f64 * opts.delta_c_step).collect();
    let evaluations: Vec<Evaluation> = dcs
        .par_iter()
        .flat_map_iter(|&dc| {
            let mut p = *base;
            p.delta_c = dc;
            i2_grid(&p, opts).into_iter().map(move |i2| Evaluation {
                delta_c: dc,
                i2,
                ds_min: evaluate(base, dc, i2, opts.min_margin),
            })
        })
        .collect();

    let mut best: Option<Evaluation> = None;
    for e in &evaluations {
        if let Some(v) = e.ds_min {
            if best.and_then(|b| b.ds_min).map_or(true, |bv| v < bv) {
                best = Some(*e);
            }
        }
    }
    let mut best = best.ok_or(Error::NoStablePoint)?;
    let mut evaluations = evaluations;

    if opts.refine {
        let land = Landscape {
            base,
            opts,
            log: RefCell::new(Vec::new()),
        };
        let x0 = vec![best.delta_c, best.i2.ln()];
        let simplex = vec![
            x0.clone(),
            vec![x0[0] + 0.5 * opts.delta_c_step, x0[1]],
            vec![x0[0], x0[1] + 0.05],
        ];
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        let res = Executor::new(land, solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run()
            .map_err(|_| Error::NoConvergence { residual: f64::NAN })?;
        let state = res.state();
        if let Some(x) = state.best_param.as_ref() {
            let (dc, i2) = (x[0], x[1].exp());
            if let Some(v) = evaluate(base, dc, i2, opts.min_margin) {
                if v < best.ds_min.unwrap_or(f64::INFINITY) {
                    best = Evaluation {
                        delta_c: dc,
                        i2,
                        ds_min: Some(v),
                    };
                }
            }
        }
        evaluations.extend(res.problem.problem.map(|l| l.log.into_inner()).unwrap_or_default());
    }

    let mut p = *base;
    p.delta_c = best.delta_c;
    let point = operating_point(&p, best.i2)?;
    Ok(Optimum { point, evaluations })
}

/// Which description of the atom–field dynamics to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// The 5×5 model with the cavity field.
    Full,
    /// The 3×3 model with the field adiabatically eliminated.
    Adiabatic,
}

/// ΔS_min at a fixed operating point for each C̃. C̃ = 0 means no coupling
/// and therefore no Raman drive, which is the coherent spin state.
pub fn squeezing_vs_cooperativity(
    delta_bar: f64,
    delta_c: f64,
    i2: f64,
    ctildes: &[f64],
    model: Model,
) -> Result<Vec<(f64, f64)>> {
    ctildes
        .par_iter()
        .map(|&c| {
            let i = if c == 0.0 { 0.0 } else { i2 };
            let p = EffectiveParams::new(c, delta_bar, delta_c, i);
            let ss = efftwo::steady_state(&p, i)?;
            let sys = match model {
                Model::Full => efftwo::fluctuation_system(&p, &ss),
                Model::Adiabatic => efftwo::adiabatic_system(&p, &ss),
            };
            let cov = solve_lyapunov(&sys)?;
            Ok((c, squeezing(&sys, &cov)?.ds_min))
        })
        .collect()
}

/// Fraction of the input squeezing mapped onto the spin,
/// η = 2C̃/((1 + ρ)(1 + 2C̃)). Infinite C̃ gives 1/(1 + ρ).
pub fn transfer_efficiency(ctilde: f64, rho: f64) -> f64 {
    if ctilde.is_infinite() {
        1.0 / (1.0 + rho)
    } else {
        2.0 * ctilde / ((1.0 + rho) * (1.0 + 2.0 * ctilde))
    }
}

/// Closed-form ΔS_min = 1 − η(1 − e^{−2r}) at the transfer point.
pub fn transfer_variance(ctilde: f64, rho: f64, r: f64) -> f64 {
    1.0 - transfer_efficiency(ctilde, rho) * (1.0 - (-2.0 * r).exp())
}

/// ΔS_min from the full 5×5 model fed with squeezed vacuum at δ̄ = δc = 0.
pub fn transfer_variance_lyapunov(ctilde: f64, rho: f64, r: f64, theta: f64) -> Result<f64> {
    let p = EffectiveParams::new(ctilde, 0.0, 0.0, 0.0)
        .with_rho(rho)
        .with_drive(Drive::Squeezed { r, theta });
    let ss = efftwo::steady_state(&p, 0.0)?;
    let sys = efftwo::fluctuation_system(&p, &ss);
    let cov = solve_lyapunov(&sys)?;
    Ok(squeezing(&sys, &cov)?.ds_min)
}

/// Depth and width of the squeezing dip of the transmitted field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingBand {
    pub omega_at_min: f64,
    pub s_min: f64,
    /// Frequency above the dip where S_out_min recovers half of 1 − s_min.
    pub half_width: Option<f64>,
    /// Frequency above the dip where S_out_min reaches shot noise, if it does
    /// inside the scanned range.
    pub shot_noise_crossing: Option<f64>,
}

pub fn squeezing_band(sys: &FluctuationSystem, omega_max: f64, points: usize) -> Result<SqueezingBand> {
    let grid: Vec<f64> = (0..points).map(|k| omega_max * k as f64 / (points - 1) as f64).collect();
    let out = outgoing_spectrum(sys, &grid)?;
    let (k0, s_min) = out
        .s_min
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let crossing = |level: f64| {
        (k0 + 1..points).find(|&k| out.s_min[k] >= level).map(|k| {
            let (w0, w1) = (grid[k - 1], grid[k]);
            let (v0, v1) = (out.s_min[k - 1], out.s_min[k]);
            w0 + (level - v0) * (w1 - w0) / (v1 - v0)
        })
    };
    Ok(SqueezingBand {
        omega_at_min: grid[k0],
        s_min,
        half_width: crossing(0.5 * (1.0 + s_min)),
        shot_noise_crossing: crossing(1.0),
    })
}

/// Physical setup shared by the three-level and effective descriptions in
/// the model comparison. Frequencies in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSetup {
    pub gamma: f64,
    pub omega1: f64,
    /// Mean one-photon detuning Δ.
    pub delta: f64,
    pub kappa: f64,
    pub g: f64,
    pub n: f64,
    /// Γp/γ0.
    pub gamma_p_ratio: f64,
    /// Include the Ω2/Ω1 terms in the effective model.
    pub corrected: bool,
    /// Net cavity detuning in units of κ.
    pub delta_c: f64,
}

impl ValidationSetup {
    /// Γp = γ0 = γ/1000, Δ = 100γ, Ω1 = √10γ, C = C̃ = 100.
    pub fn open() -> Self {
        Self {
            gamma: 1.0,
            omega1: 10f64.sqrt(),
            delta: 100.0,
            kappa: 2.0,
            g: 20.0,
            n: 1.0,
            gamma_p_ratio: 1.0,
            corrected: false,
            delta_c: 0.0,
        }
    }

    /// Same optics with γ0 lowered to Γp/`gamma_p_ratio` and the Ω2/Ω1 terms on.
    pub fn closed(gamma_p_ratio: f64) -> Self {
        Self {
            gamma_p_ratio,
            corrected: true,
            ..Self::open()
        }
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma * (self.omega1 / self.delta).powi(2)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma_p() / self.gamma_p_ratio
    }

    /// Raman coupling G = gΩ1/Δ acting on a = √τ·A2 (τ = 1).
    pub fn raman_coupling(&self) -> f64 {
        self.g * self.omega1 / self.delta
    }

    /// I2 on the line 4I2 = (1 + Γp/γ0)² + δ̃², δ̃ in units of γ0.
    pub fn optimal_i2(&self, delta_tilde: f64) -> f64 {
        ((1.0 + self.gamma_p_ratio).powi(2) + delta_tilde * delta_tilde) / 4.0
    }

    pub fn effective(&self, delta_tilde: f64, i2: f64) -> EffectiveParams {
        let c = self.g * self.g * self.n / (2.0 * self.kappa * self.gamma);
        EffectiveParams {
            ctilde: c * self.gamma_p() / self.gamma0(),
            delta_bar: delta_tilde,
            delta_c: self.delta_c,
            rho: self.gamma0() / self.kappa,
            lambda1: 0.0,
            lambda2: 1.0,
            n: self.n,
            gamma_p_ratio: self.gamma_p_ratio,
            drive: Drive::Coherent { i2 },
        }
    }

    /// Bare two-photon detuning δ = Δ1 − Δ2 whose light-shifted value is δ̃
    /// for the intracavity field `a`.
    fn bare_detuning(&self, delta_tilde: f64, a: f64) -> f64 {
        let (om2, ga2, d, g) = (self.omega1.powi(2), (self.g * a).powi(2), self.delta, self.gamma);
        let target = delta_tilde * self.gamma0();
        let f = |x: f64| {
            let (d1, d2) = (d + x / 2.0, d - x / 2.0);
            x + om2 * d2 / (d2 * d2 + g * g) - ga2 * d1 / (d1 * d1 + g * g) - target
        };
        let (mut lo, mut hi) = (-d, d);
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Three-level parameters reproducing δ̃ and I2 of the effective model,
    /// with the bare cavity detuning compensating the dispersive atomic shift.
    pub fn three_level(&self, delta_tilde: f64, i2: f64) -> Result<(ThreeLevelParams, lambda3::SteadyState3L)> {
        let g0 = self.gamma0();
        let a = i2.sqrt() * g0 / self.raman_coupling();
        let d = self.bare_detuning(delta_tilde, a);
        let (d1, d2) = (self.delta + d / 2.0, self.delta - d / 2.0);
        let mut p = ThreeLevelParams {
            gamma: self.gamma,
            gamma0: g0,
            lambda1: 0.0,
            lambda2: self.n * g0,
            n: self.n,
            g: self.g,
            omega1: Complex64::new(self.omega1, 0.0),
            delta1: d1,
            delta2: d2,
            delta_c: self.delta_c * self.kappa,
            kappa: self.kappa,
            tau: 1.0,
            drive: Drive3 {
                amplitude: Complex64::new(0.0, 0.0),
                noise: InputNoise::VACUUM,
            },
        };
        let shift = |ss: &lambda3::SteadyState3L| {
            self.g * self.g * (ss.pi2 - ss.pi3) * d2 / (d2 * d2 + self.gamma * self.gamma)
        };
        let mut ss = lambda3::steady_state_3l_at_field(&p, Complex64::new(a, 0.0))?;
        for _ in 0..4 {
            p.delta_c = self.delta_c * self.kappa + shift(&ss);
            ss = lambda3::steady_state_3l_at_field(&p, Complex64::new(a, 0.0))?;
        }
        Ok((p, ss))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub delta_tilde: f64,
    pub i2: f64,
    pub two_level: f64,
    pub three_level: f64,
    /// Ω2/Ω1 at the operating point.
    pub omega_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCurve {
    pub setup: ValidationSetup,
    pub points: Vec<ValidationPoint>,
    pub max_discrepancy: f64,
    pub min_two_level: f64,
    pub min_three_level: f64,
}

fn two_level_point(setup: &ValidationSetup, delta_tilde: f64, i2: f64, omega_ratio: f64) -> Result<f64> {
    let p = setup.effective(delta_tilde, i2);
    let ss = if setup.corrected {
        efftwo::corrected_steady_state(&p, i2, omega_ratio)?
    } else {
        efftwo::steady_state(&p, i2)?
    };
    let sys = efftwo::fluctuation_system(&p, &ss);
    Ok(squeezing(&sys, &solve_lyapunov(&sys)?)?.ds_min)
}

fn three_level_point(setup: &ValidationSetup, delta_tilde: f64, i2: f64) -> Result<f64> {
    let (p, ss) = setup.three_level(delta_tilde, i2)?;
    let sys = lambda3::fluctuation_system_3l(&p, &ss);
    Ok(squeezing(&sys, &solve_lyapunov(&sys)?)?.ds_min)
}

/// ΔS_min of both models along 4I2 = (1 + Γp/γ0)² + δ̃², δ̃ in units of γ0.
pub fn validate_models(setup: &ValidationSetup, delta_tildes: &[f64]) -> Result<ValidationCurve> {
    let points = delta_tildes
        .par_iter()
        .map(|&dt| {
            let i2 = setup.optimal_i2(dt);
            let omega_ratio = i2.sqrt() * setup.delta * setup.gamma0() / setup.omega1.powi(2);
            Ok(ValidationPoint {
                delta_tilde: dt,
                i2,
                two_level: two_level_point(setup, dt, i2, omega_ratio)?,
                three_level: three_level_point(setup, dt, i2)?,
                omega_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = points
        .iter()
        .map(|p| (p.two_level - p.three_level).abs())
        .fold(0.0, f64::max);
    let min_two_level = points.iter().map(|p| p.two_level).fold(f64::INFINITY, f64::min);
    let min_three_level = points.iter().map(|p| p.three_level).fold(f64::INFINITY, f64::min);
    Ok(ValidationCurve {
        setup: *setup,
        points,
        max_discrepancy,
        min_two_level,
        min_three_level,
    })
}

/// Field and atomic contributions to ΔS_min at an operating point.
pub fn noise_contributions(p: &EffectiveParams, i2: f64) -> Result<noise::Decomposition> {
    let ss = efftwo::steady_state(p, i2)?;
    let sys = efftwo::fluctuation_system(p, &ss);
    noise::decompose(&sys, &[0.0])
}
