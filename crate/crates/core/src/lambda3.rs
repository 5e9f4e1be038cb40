//! Full three-level Λ model in a cavity.
//!
//! Fluctuation basis: (a, a†, P1, P1†, P2, P2†, Pr, Pr†, Sz1, Sz2) with
//! P1 = |1⟩⟨3|, P2 = |2⟩⟨3|, Pr = |2⟩⟨1| summed over atoms,
//! Sz1 = (Π1 − Π3)/2, Sz2 = (Π2 − Π3)/2 and a = √τ·A2.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::efftwo::Branch;
use crate::error::{Error, Result};
use crate::linalg::{c, re, CMatrix, I};
use crate::noise::{check_stability, FieldPort, FluctuationSystem, SpinMap};
use crate::params::ThreeLevelParams;
use crate::spinframe::r1_three_level;

pub const DIM: usize = 10;

/// Labels and adjoint pairing of the ten fluctuation variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicBasis3 {
    pub labels: Vec<String>,
    pub pairing: Vec<usize>,
}

impl AtomicBasis3 {
    pub fn standard() -> Self {
        Self {
            labels: ["A2", "A2†", "P1", "P1†", "P2", "P2†", "Pr", "Pr†", "Sz1", "Sz2"]
                .map(String::from)
                .to_vec(),
            pairing: vec![1, 0, 3, 2, 5, 4, 7, 6, 8, 9],
        }
    }

    pub fn is_involution(&self) -> bool {
        self.pairing
            .iter()
            .enumerate()
            .all(|(i, &j)| j < self.pairing.len() && self.pairing[j] == i)
    }
}

impl Default for AtomicBasis3 {
    fn default() -> Self {
        Self::standard()
    }
}

/// Single-atom transition operator |i⟩⟨j| with levels numbered 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorWord {
    pub i: u8,
    pub j: u8,
}

impl OperatorWord {
    pub fn new(i: u8, j: u8) -> Self {
        assert!((1..=3).contains(&i) && (1..=3).contains(&j), "levels are 1, 2, 3");
        Self { i, j }
    }

    /// |i⟩⟨j|·|k⟩⟨l| = δ_jk |i⟩⟨l|.
    pub fn mul(self, rhs: OperatorWord) -> Option<OperatorWord> {
        (self.j == rhs.i).then_some(OperatorWord { i: self.i, j: rhs.j })
    }

    pub fn adjoint(self) -> OperatorWord {
        OperatorWord { i: self.j, j: self.i }
    }

    pub fn to_matrix(self) -> Matrix3<Complex64> {
        let mut m = Matrix3::zeros();
        m[(self.i as usize - 1, self.j as usize - 1)] = re(1.0);
        m
    }
}

fn word(i: u8, j: u8) -> Matrix3<Complex64> {
    OperatorWord::new(i, j).to_matrix()
}

/// Order of the noise operators in a diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    /// ⟨F_μ F_ν^‡⟩, the convention of the fluctuation systems.
    AdjointRight,
    /// ⟨F_μ^‡ F_ν⟩, the order in which the two-level atomic matrix is tabulated.
    AdjointLeft,
}

/// Diffusion coefficients from the generalized Einstein relations for
/// single-atom operators `ops`, a per-atom density matrix `rho` and the
/// Heisenberg-picture dissipator `l`, scaled by `n` atoms.
pub fn einstein_diffusion<F>(
    ops: &[Matrix3<Complex64>],
    rho: &Matrix3<Complex64>,
    l: F,
    n: f64,
    ordering: Ordering,
) -> CMatrix
where
    F: Fn(&Matrix3<Complex64>) -> Matrix3<Complex64>,
{
    let ex = |x: Matrix3<Complex64>| (rho * x).trace();
    let k = ops.len();
    CMatrix::from_fn(k, k, |mu, nu| {
        let (a, b) = match ordering {
            Ordering::AdjointRight => (ops[mu], ops[nu].adjoint()),
            Ordering::AdjointLeft => (ops[mu].adjoint(), ops[nu]),
        };
        let v = ex(l(&(a * b)) - l(&a) * b - a * l(&b));
        v * n
    })
}

/// Heisenberg-picture dissipator: decay of level 3 into 1 and 2 at γ each,
/// and relaxation of every level into the ground sublevels at γ0 with
/// fractions (l1, l2).
pub fn dissipator(gamma: f64, gamma0: f64, l1: f64, l2: f64) -> impl Fn(&Matrix3<Complex64>) -> Matrix3<Complex64> {
    move |x| {
        let p3 = word(3, 3);
        let feed = (x[(0, 0)] + x[(1, 1)]) * gamma;
        -(p3 * x + x * p3) * re(gamma) + p3 * feed - x * re(gamma0)
            + Matrix3::identity() * ((x[(0, 0)] * l1 + x[(1, 1)] * l2) * gamma0)
    }
}

/// Single-atom operators of the eight atomic fluctuation variables.
pub fn atomic_operators() -> [Matrix3<Complex64>; 8] {
    let half = re(0.5);
    [
        word(1, 3),
        word(3, 1),
        word(2, 3),
        word(3, 2),
        word(2, 1),
        word(1, 2),
        (word(1, 1) - word(3, 3)) * half,
        (word(2, 2) - word(3, 3)) * half,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState3L {
    /// ⟨A2⟩.
    pub a2: Complex64,
    /// ⟨a⟩ = √τ·⟨A2⟩.
    pub field: Complex64,
    pub p1: Complex64,
    pub p2: Complex64,
    pub pr: Complex64,
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub branch: Branch,
    /// Largest component of the scaled mean-equation residual.
    pub residual: f64,
}

impl SteadyState3L {
    pub fn sz1(&self) -> f64 {
        0.5 * (self.pi1 - self.pi3)
    }

    pub fn sz2(&self) -> f64 {
        0.5 * (self.pi2 - self.pi3)
    }

    /// Mean variables in basis order.
    pub fn vector(&self) -> [Complex64; DIM] {
        [
            self.field,
            self.field.conj(),
            self.p1,
            self.p1.conj(),
            self.p2,
            self.p2.conj(),
            self.pr,
            self.pr.conj(),
            re(self.sz1()),
            re(self.sz2()),
        ]
    }

    /// Ground-state spin (Re Pr, Im Pr, (Π2 − Π1)/2).
    pub fn mean_spin(&self) -> [f64; 3] {
        [self.pr.re, self.pr.im, 0.5 * (self.pi2 - self.pi1)]
    }

    /// Per-atom density matrix with ρ_ji = ⟨|i⟩⟨j|⟩/N.
    pub fn density_matrix(&self, n: f64) -> Matrix3<Complex64> {
        let mut r = Matrix3::zeros();
        r[(2, 0)] = self.p1 / n;
        r[(0, 2)] = self.p1.conj() / n;
        r[(2, 1)] = self.p2 / n;
        r[(1, 2)] = self.p2.conj() / n;
        r[(0, 1)] = self.pr / n;
        r[(1, 0)] = self.pr.conj() / n;
        r[(0, 0)] = re(self.pi1 / n);
        r[(1, 1)] = re(self.pi2 / n);
        r[(2, 2)] = re(self.pi3 / n);
        r
    }
}

fn fractions(p: &ThreeLevelParams) -> (f64, f64) {
    let total = p.n * p.gamma0;
    (p.lambda1 / total, p.lambda2 / total)
}

/// Deterministic right-hand side dξ/dt for the mean values, without input drive.
pub fn rhs(p: &ThreeLevelParams, xi: &[Complex64; DIM]) -> [Complex64; DIM] {
    let [a, ac, p1, p1c, p2, p2c, pr, prc, s1, s2] = *xi;
    let n = p.n;
    let (gam, g0) = (p.gamma, p.gamma0);
    let (l1, l2) = fractions(p);
    let om = p.omega1;
    let omc = om.conj();
    let g3 = p.scaled_coupling();
    let (ga, gac) = (a * g3, ac * g3);
    let d = p.delta1 - p.delta2;
    let (d1, d2) = (p.delta1, p.delta2);
    let pi1 = (n + s1 * 4.0 - s2 * 2.0) / 3.0;
    let pi2 = (n - s1 * 2.0 + s2 * 4.0) / 3.0;
    let pi3 = (n - s1 * 2.0 - s2 * 2.0) / 3.0;
    let c1 = I * omc * p1 - I * om * p1c;
    let c2 = I * gac * p2 - I * ga * p2c;
    let dpi1 = c1 + pi3 * gam - pi1 * g0 + l1 * n * g0;
    let dpi2 = c2 + pi3 * gam - pi2 * g0 + l2 * n * g0;
    let dpi3 = -c1 - c2 - pi3 * (2.0 * gam + g0);
    [
        -c(p.kappa, p.delta_c) * a + I * g3 * p2,
        -c(p.kappa, -p.delta_c) * ac - I * g3 * p2c,
        -c(gam, d1) * p1 + I * om * (pi1 - pi3) + I * ga * prc,
        -c(gam, -d1) * p1c - I * omc * (pi1 - pi3) - I * gac * pr,
        -c(gam, d2) * p2 + I * ga * (pi2 - pi3) + I * om * pr,
        -c(gam, -d2) * p2c - I * gac * (pi2 - pi3) - I * omc * prc,
        -c(g0, -d) * pr + I * omc * p2 - I * ga * p1c,
        -c(g0, d) * prc - I * om * p2c + I * gac * p1,
        (dpi1 - dpi3) * 0.5,
        (dpi2 - dpi3) * 0.5,
    ]
}

/// Analytic Jacobian J = ∂(rhs)/∂ξ; the drift is B = −J.
pub fn jacobian(p: &ThreeLevelParams, xi: &[Complex64; DIM]) -> SMatrix<Complex64, DIM, DIM> {
    let [a, ac, p1, p1c, p2, p2c, pr, prc, _, s2] = *xi;
    let (gam, g0) = (p.gamma, p.gamma0);
    let om = p.omega1;
    let omc = om.conj();
    let g = p.scaled_coupling();
    let d = p.delta1 - p.delta2;
    let (d1, d2) = (p.delta1, p.delta2);
    // Π_i − Π3 as functions of (Sz1, Sz2): Π1 − Π3 = 2Sz1, Π2 − Π3 = 2Sz2
    let mut j = SMatrix::<Complex64, DIM, DIM>::zeros();
    j[(0, 0)] = -c(p.kappa, p.delta_c);
    j[(0, 4)] = I * g;
    j[(1, 1)] = -c(p.kappa, -p.delta_c);
    j[(1, 5)] = -I * g;

    j[(2, 2)] = -c(gam, d1);
    j[(2, 0)] = I * g * prc;
    j[(2, 7)] = I * g * a;
    j[(2, 8)] = I * om * 2.0;
    j[(3, 3)] = -c(gam, -d1);
    j[(3, 1)] = -I * g * pr;
    j[(3, 6)] = -I * g * ac;
    j[(3, 8)] = -I * omc * 2.0;

    j[(4, 4)] = -c(gam, d2);
    j[(4, 0)] = I * g * (2.0 * s2);
    j[(4, 9)] = I * g * a * 2.0;
    j[(4, 6)] = I * om;
    j[(5, 5)] = -c(gam, -d2);
    j[(5, 1)] = -I * g * (2.0 * s2);
    j[(5, 9)] = -I * g * ac * 2.0;
    j[(5, 7)] = -I * omc;

    j[(6, 6)] = -c(g0, -d);
    j[(6, 4)] = I * omc;
    j[(6, 0)] = -I * g * p1c;
    j[(6, 3)] = -I * g * a;
    j[(7, 7)] = -c(g0, d);
    j[(7, 5)] = -I * om;
    j[(7, 1)] = I * g * p1;
    j[(7, 2)] = I * g * ac;

    // Sz1 = (Π1 − Π3)/2 and Sz2 = (Π2 − Π3)/2 built from c1, c2 and the decays
    j[(8, 2)] = I * omc;
    j[(8, 3)] = -I * om;
    j[(8, 0)] = -I * g * p2c * 0.5;
    j[(8, 1)] = I * g * p2 * 0.5;
    j[(8, 4)] = I * g * ac * 0.5;
    j[(8, 5)] = -I * g * a * 0.5;
    j[(8, 8)] = re(-gam - g0);
    j[(8, 9)] = re(-gam);

    j[(9, 2)] = I * omc * 0.5;
    j[(9, 3)] = -I * om * 0.5;
    j[(9, 0)] = -I * g * p2c;
    j[(9, 1)] = I * g * p2;
    j[(9, 4)] = I * g * ac;
    j[(9, 5)] = -I * g * a;
    j[(9, 8)] = re(-gam);
    j[(9, 9)] = re(-gam - g0);
    j
}

/// Atomic means for a prescribed intracavity field `a` (scaled).
///
/// For fixed field the atomic equations are affine, so the solution is a
/// single linear solve.
fn atoms_at_field(p: &ThreeLevelParams, a: Complex64) -> Option<[Complex64; DIM]> {
    let mut xi = [c(0.0, 0.0); DIM];
    xi[0] = a;
    xi[1] = a.conj();
    let f0 = rhs(p, &xi);
    let jac = jacobian(p, &xi);
    let jaa = jac.fixed_view::<8, 8>(2, 2).into_owned();
    let b = SVector::<Complex64, 8>::from_fn(|i, _| -f0[i + 2]);
    let x = jaa.lu().solve(&b)?;
    for k in 0..8 {
        xi[k + 2] = x[k];
    }
    Some(xi)
}

fn build_state(p: &ThreeLevelParams, xi: [Complex64; DIM], branch: Branch) -> SteadyState3L {
    let n = p.n;
    let (s1, s2) = (xi[8].re, xi[9].re);
    let f = rhs(p, &xi);
    let scale = n.max(xi[0].norm());
    let atoms = f[2..].iter().map(|z| z.norm()).fold(0.0, f64::max) / (scale * p.gamma.max(p.kappa));
    SteadyState3L {
        a2: xi[0] / p.tau.sqrt(),
        field: xi[0],
        p1: xi[2],
        p2: xi[4],
        pr: xi[6],
        pi1: (n + 4.0 * s1 - 2.0 * s2) / 3.0,
        pi2: (n - 2.0 * s1 + 4.0 * s2) / 3.0,
        pi3: (n - 2.0 * s1 - 2.0 * s2) / 3.0,
        branch,
        residual: atoms,
    }
}

fn check_physical(p: &ThreeLevelParams, ss: &SteadyState3L) -> Result<()> {
    let tol = 1e-9 * p.n;
    for (name, v) in [("Π1", ss.pi1), ("Π2", ss.pi2), ("Π3", ss.pi3)] {
        if v < -tol {
            return Err(Error::Unphysical(format!("{name} = {v:.3e} is negative")));
        }
    }
    Ok(())
}

/// Steady state with the intracavity field prescribed instead of the input drive.
pub fn steady_state_3l_at_field(p: &ThreeLevelParams, a2: Complex64) -> Result<SteadyState3L> {
    p.validate()?;
    let a = a2 * p.tau.sqrt();
    let xi = atoms_at_field(p, a).ok_or_else(|| Error::Unphysical("singular atomic equations".into()))?;
    let ss = build_state(p, xi, Branch::Unique);
    check_physical(p, &ss)?;
    Ok(ss)
}

/// All physical steady states for the input drive ⟨A2_in⟩, ordered by
/// intracavity intensity.
///
/// The atomic response commutes with a global phase of the field, so the
/// field equation reduces to |a|²·|h(|a|²)|² = 2κ|A2_in|², which is scanned on
/// a logarithmic grid and refined by bisection.
pub fn steady_state_3l(p: &ThreeLevelParams) -> Result<Vec<SteadyState3L>> {
    p.validate()?;
    let drive = p.drive.amplitude * (2.0 * p.kappa).sqrt();
    let target = drive.norm_sqr();
    let h = |x: f64| -> Option<Complex64> {
        let a = re(x.sqrt());
        let xi = atoms_at_field(p, a)?;
        Some(c(p.kappa, p.delta_c) - I * p.scaled_coupling() * xi[4] / a)
    };
    let y = |x: f64| h(x).map(|v| x * v.norm_sqr());

    let mut xs = Vec::new();
    if target == 0.0 {
        xs.push(0.0);
    } else {
        // atoms only absorb and shift the probe, so |h| ≳ κ bounds the intensity
        let empty = target / (p.kappa * p.kappa);
        let (x_min, x_max) = (empty * 1e-12, empty * 1e3);
        let steps = 4000;
        let ratio = (x_max / x_min).ln() / steps as f64;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=steps {
            let x = x_min * (ratio * k as f64).exp();
            let Some(v) = y(x) else { continue };
            let v = v - target;
            if let Some((x0, v0)) = prev {
                if v0 == 0.0 {
                    xs.push(x0);
                } else if v0.signum() != v.signum() {
                    xs.push(bisect(|x| y(x).map(|v| v - target).unwrap_or(f64::NAN), x0, x));
                }
            }
            prev = Some((x, v));
        }
    }
    if xs.is_empty() {
        return Err(Error::NoConvergence { residual: f64::INFINITY });
    }

    let multi = xs.len() > 1;
    let mut out = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        let a = if x == 0.0 {
            re(0.0)
        } else {
            let hv = h(x).ok_or_else(|| Error::Unphysical("singular atomic equations".into()))?;
            Complex64::from_polar(x.sqrt(), drive.arg() - hv.arg())
        };
        let xi = atoms_at_field(p, a).ok_or_else(|| Error::Unphysical("singular atomic equations".into()))?;
        let mut ss = build_state(p, xi, Branch::Unique);
        let field_res = (rhs(p, &xi)[0] + drive).norm() / (drive.norm() + p.kappa * a.norm()).max(f64::MIN_POSITIVE);
        ss.residual = ss.residual.max(field_res);
        if ss.residual > 1e-9 {
            return Err(Error::NoConvergence { residual: ss.residual });
        }
        if check_physical(p, &ss).is_err() {
            continue;
        }
        if multi {
            let stable = check_stability(&drift_matrix_10(p, &ss)).is_ok();
            ss.branch = if !stable {
                Branch::Middle
            } else if k == 0 {
                Branch::Lower
            } else {
                Branch::Upper
            };
        }
        out.push(ss);
    }
    if out.is_empty() {
        return Err(Error::Unphysical("every branch has negative populations".into()));
    }
    Ok(out)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// 10×10 drift B = −∂(rhs)/∂ξ at the steady state.
pub fn drift_matrix_10(p: &ThreeLevelParams, ss: &SteadyState3L) -> CMatrix {
    let j = jacobian(p, &ss.vector());
    CMatrix::from_fn(DIM, DIM, |r, col| -j[(r, col)])
}

/// 10×10 diffusion: 2κ·(input correlations) on the field block, Einstein
/// relations on the atomic block, no field–atom cross terms.
pub fn diffusion_3l(p: &ThreeLevelParams, ss: &SteadyState3L) -> CMatrix {
    let mut d = CMatrix::zeros(DIM, DIM);
    let corr = p.drive.noise.correlations();
    for i in 0..2 {
        for k in 0..2 {
            d[(i, k)] = corr[i][k] * (2.0 * p.kappa);
        }
    }
    let (l1, l2) = fractions(p);
    let at = einstein_diffusion(
        &atomic_operators(),
        &ss.density_matrix(p.n),
        dissipator(p.gamma, p.gamma0, l1, l2),
        p.n,
        Ordering::AdjointRight,
    );
    d.view_mut((2, 2), (8, 8)).copy_from(&at);
    d
}

pub fn fluctuation_system_3l(p: &ThreeLevelParams, ss: &SteadyState3L) -> FluctuationSystem {
    let basis = AtomicBasis3::standard();
    FluctuationSystem {
        labels: basis.labels,
        pairing: basis.pairing,
        drift: drift_matrix_10(p, ss),
        diffusion: diffusion_3l(p, ss),
        field_channels: vec![0, 1],
        field: Some(FieldPort {
            index: 0,
            conj_index: 1,
            kappa: p.kappa,
            scale: p.tau.sqrt(),
        }),
        spin: Some(SpinMap {
            indices: vec![6, 7, 8, 9],
            r1: r1_three_level(),
            mean: ss.mean_spin(),
        }),
    }
}
