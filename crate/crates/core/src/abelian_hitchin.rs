//! Level-k theta functions on an elliptic curve and the heat equation that
//! plays the role of the Hitchin connection for linear complex structures on
//! a torus.
//!
//! `theta_j(z, tau) = sum_n exp(pi i k a^2 tau + 2 pi i k a z)`, `a = n + j/k`,
//! solves `d/dtau theta = (1 / (4 pi i k)) d^2/dz^2 theta`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{c, I};
use crate::{Error, Result};

pub const MIN_IM_TAU: f64 = 0.1;
pub const MIN_TRUNCATION: usize = 10;
const TAIL_TOL: f64 = 1e-15;
/// Largest `|Im z|` for which the truncation guarantee is checked.
pub const Z_RANGE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    pub k: u32,
    pub tau: Complex64,
    pub n: usize,
}

impl ThetaParams {
    pub fn new(k: u32, tau: Complex64, n: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("level must be >= 1".into()));
        }
        if !(tau.im >= MIN_IM_TAU) {
            return Err(Error::Domain(format!("Im tau = {} is below {MIN_IM_TAU}", tau.im)));
        }
        if n < MIN_TRUNCATION {
            return Err(Error::Invalid(format!("truncation {n} is below {MIN_TRUNCATION}")));
        }
        let tail = (-PI * k as f64 * tau.im * (n * n) as f64).exp();
        if tail >= TAIL_TOL {
            return Err(Error::Invalid(format!("truncation {n} leaves a tail of {tail:e}")));
        }
        Ok(ThetaParams { k, tau, n })
    }

    /// Smallest admissible truncation whose neglected terms are below `1e-16`
    /// relative to the leading one for all `|Im z| <= 1`.
    pub fn auto(k: u32, tau: Complex64) -> Result<Self> {
        let mut n = MIN_TRUNCATION;
        while n < 100_000 {
            if let Ok(p) = Self::new(k, tau, n) {
                if p.z_tail(Z_RANGE) < 1e-16 {
                    return Ok(p);
                }
            }
            n += 1;
        }
        Err(Error::Domain(format!("no truncation found for k = {k}, tau = {tau}")))
    }

    /// Bound on the first omitted term for `|Im z| <= y`.
    fn z_tail(&self, y: f64) -> f64 {
        let k = self.k as f64;
        let a = self.n as f64;
        (-PI * k * self.tau.im * a * a + 2.0 * PI * k * (a + 1.0) * y).exp()
    }

    fn check(&self, j: u32, z: Complex64) -> Result<()> {
        if j >= self.k {
            return Err(Error::OutOfRange(format!("residue {j} is not in 0..{}", self.k)));
        }
        if self.z_tail(z.im.abs()) >= 1e-14 {
            return Err(Error::Domain(format!("truncation {} is insufficient at Im z = {}", self.n, z.im)));
        }
        Ok(())
    }

    fn shifts(&self, j: u32) -> impl Iterator<Item = f64> + '_ {
        let n = self.n as i64;
        let jk = j as f64 / self.k as f64;
        (-n..=n).map(move |m| m as f64 + jk)
    }
}

fn term(k: f64, a: f64, tau: Complex64, z: Complex64) -> Complex64 {
    (I * PI * k * a * a * tau + I * 2.0 * PI * k * a * z).exp()
}

pub fn theta_value(j: u32, params: &ThetaParams, z: Complex64) -> Result<Complex64> {
    params.check(j, z)?;
    let k = params.k as f64;
    Ok(params.shifts(j).map(|a| term(k, a, params.tau, z)).sum())
}

/// `(theta, d theta/d tau, d^2 theta/dz^2)` by termwise differentiation.
pub fn theta_derivatives(j: u32, params: &ThetaParams, z: Complex64) -> Result<[Complex64; 3]> {
    params.check(j, z)?;
    let k = params.k as f64;
    let mut out = [c(0.0, 0.0); 3];
    for a in params.shifts(j) {
        let t = term(k, a, params.tau, z);
        out[0] += t;
        out[1] += I * PI * k * a * a * t;
        let dz = I * 2.0 * PI * k * a;
        out[2] += dz * dz * t;
    }
    Ok(out)
}

/// `|d/dtau theta_j - (1/(4 pi i k)) d^2/dz^2 theta_j|`.
pub fn heat_residual(j: u32, params: &ThetaParams, z: Complex64) -> Result<f64> {
    let [_, dtau, dzz] = theta_derivatives(j, params, z)?;
    let heat = dzz / (I * 4.0 * PI * params.k as f64);
    Ok((dtau - heat).norm())
}

/// Evolves `theta_j(., tau0)` to `tau1` by the exact heat multipliers and
/// returns the largest deviation from `theta_j(., tau1)` over the grid.
pub fn heat_evolve_check(j: u32, k: u32, tau0: Complex64, tau1: Complex64, grid: &[Complex64]) -> Result<f64> {
    for (name, t) in [("tau0", tau0), ("tau1", tau1)] {
        if !(t.im >= MIN_IM_TAU) {
            return Err(Error::Domain(format!("{name} = {t} is not in the upper half plane above {MIN_IM_TAU}")));
        }
    }
    let p0 = ThetaParams::auto(k, tau0)?;
    let p1 = ThetaParams::auto(k, tau1)?;
    let p = if p0.n >= p1.n { p0 } else { ThetaParams { tau: tau0, ..p1 } };
    let target = ThetaParams { tau: tau1, ..p };
    let kf = k as f64;
    let mut worst: f64 = 0.0;
    for &z in grid {
        p.check(j, z)?;
        let evolved: Complex64 = p
            .shifts(j)
            .map(|a| {
                let coeff = (I * PI * kf * a * a * tau0).exp();
                let multiplier = (I * PI * kf * a * a * (tau1 - tau0)).exp();
                coeff * multiplier * (I * 2.0 * PI * kf * a * z).exp()
            })
            .sum();
        worst = worst.max((evolved - theta_value(j, &target, z)?).norm());
    }
    Ok(worst)
}

/// `n` points `x + i y` on a line segment, as used for residual tables.
pub fn z_grid(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let s = i as f64 / n as f64;
            c(s - 0.5, 0.4 * (2.0 * PI * s).sin())
        })
        .collect()
}
