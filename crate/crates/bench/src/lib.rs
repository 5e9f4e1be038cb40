//! Fixed operating points shared by the benchmarks and their smoke tests.

use spinsq::efftwo;
use spinsq::studies::ValidationSetup;
use spinsq::{EffectiveParams, FluctuationSystem, Result};

/// C̃ = 100, δ̄ = 10, δc = 0, I2 = 25.2: five fluctuation operators.
pub fn effective_point() -> EffectiveParams {
    EffectiveParams::new(100.0, 10.0, 0.0, 25.2)
}

pub fn effective_system() -> Result<FluctuationSystem> {
    let p = effective_point();
    let ss = efftwo::steady_state(&p, p.drive.i2())?;
    Ok(efftwo::fluctuation_system(&p, &ss))
}

/// The open three-level system at δ̃ = 5 with the intensity of the
/// two-level optimum: ten fluctuation operators.
pub fn three_level_system() -> Result<FluctuationSystem> {
    let (p, ss) = ValidationSetup::open().three_level(5.0, 6.5)?;
    Ok(spinsq::lambda3::fluctuation_system_3l(&p, &ss))
}

/// Angular frequencies 0..omega_max in `points` even steps.
pub fn omega_grid(omega_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| omega_max * k as f64 / (points - 1) as f64).collect()
}
