//! Berezin-Toeplitz operators on the projective line at level `k`.
//!
//! Sections of `O(k)` are polynomials of degree `<= k` in the affine
//! coordinate, with `<f, g> = int f ḡ dmu_k`, `dmu_k = ((k+1)/pi) (1+|z|²)^-(k+2) dA`.
//! Then `||z^a||² = 1/binom(k,a)` and `e_a = sqrt(binom(k,a)) z^a` is orthonormal.
//!
//! Functions on the sphere are written in the ambient coordinates
//! `x1 + i x2 = 2z/(1+|z|²)`, `h = (1-|z|²)/(1+|z|²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, CMat};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    pub k: u32,
}

fn ln_binom(n: u32, r: u32) -> f64 {
    ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

impl FockBasis {
    pub fn new(k: u32) -> Self {
        FockBasis { k }
    }

    pub fn dim(&self) -> usize {
        self.k as usize + 1
    }

    /// `||z^a||² = 1 / binom(k, a)`.
    pub fn monomial_norm_sq(&self, a: u32) -> Result<f64> {
        if a > self.k {
            return Err(Error::OutOfRange(format!("degree {a} exceeds level {}", self.k)));
        }
        Ok((-ln_binom(self.k, a)).exp())
    }
}

/// Coefficients of `(x1 ± i x2)^|m| sum_j c_j h^j`, the sign being that of `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionTerm {
    pub m: i64,
    pub coeffs: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expansion {
    pub terms: Vec<ExpansionTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SphereFunction {
    Constant(Complex64),
    /// `h`.
    Height,
    X1,
    X2,
    /// `x1 + i x2`.
    Z,
    /// `x1 - i x2`.
    Zbar,
    /// `rho^|m| e^{i m theta}` with `rho = sqrt(x1² + x2²)`.
    Mode(i64),
    Expansion(Expansion),
    Product(Vec<SphereFunction>),
    Conjugate(Box<SphereFunction>),
}

pub const REGISTRY: &[&str] = &["one", "zero", "height", "x1", "x2", "z", "zbar", "mode:<m>"];

impl SphereFunction {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "one" => SphereFunction::Constant(c(1.0, 0.0)),
            "zero" => SphereFunction::Constant(c(0.0, 0.0)),
            "height" => SphereFunction::Height,
            "x1" => SphereFunction::X1,
            "x2" => SphereFunction::X2,
            "z" => SphereFunction::Z,
            "zbar" => SphereFunction::Zbar,
            other => match other.strip_prefix("mode:").map(str::parse::<i64>) {
                Some(Ok(m)) => SphereFunction::Mode(m),
                _ => return Err(Error::Invalid(format!("unknown function {other:?}; known: {}", REGISTRY.join(", ")))),
            },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Expansion = serde_json::from_str(text)?;
        if e.terms.iter().any(|t| t.coeffs.is_empty()) {
            return Err(Error::Invalid("expansion term without coefficients".into()));
        }
        Ok(SphereFunction::Expansion(e))
    }

    pub fn product(&self, other: &SphereFunction) -> SphereFunction {
        SphereFunction::Product(vec![self.clone(), other.clone()])
    }

    pub fn conj(&self) -> SphereFunction {
        SphereFunction::Conjugate(Box::new(self.clone()))
    }

    /// Polynomial degree in `(x1, x2, h)`.
    pub fn degree(&self) -> usize {
        match self {
            SphereFunction::Constant(_) => 0,
            SphereFunction::Height | SphereFunction::X1 | SphereFunction::X2 | SphereFunction::Z | SphereFunction::Zbar => 1,
            SphereFunction::Mode(m) => m.unsigned_abs() as usize,
            SphereFunction::Expansion(e) => {
                e.terms.iter().map(|t| t.m.unsigned_abs() as usize + t.coeffs.len() - 1).max().unwrap_or(0)
            }
            SphereFunction::Product(fs) => fs.iter().map(|f| f.degree()).sum(),
            SphereFunction::Conjugate(f) => f.degree(),
        }
    }

    /// Value at `s = |z|²/(1+|z|²)` and angle `theta = arg z`.
    pub fn eval(&self, s: f64, theta: f64) -> Complex64 {
        let h = 1.0 - 2.0 * s;
        let rho = 2.0 * (s * (1.0 - s)).max(0.0).sqrt();
        let mode = |m: i64| Complex64::from_polar(rho.powi(m.unsigned_abs() as i32), m as f64 * theta);
        match self {
            SphereFunction::Constant(v) => *v,
            SphereFunction::Height => c(h, 0.0),
            SphereFunction::X1 => c(rho * theta.cos(), 0.0),
            SphereFunction::X2 => c(rho * theta.sin(), 0.0),
            SphereFunction::Z => mode(1),
            SphereFunction::Zbar => mode(-1),
            SphereFunction::Mode(m) => mode(*m),
            SphereFunction::Expansion(e) => e
                .terms
                .iter()
                .map(|t| {
                    let poly = t.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &[re, im]| acc * h + c(re, im));
                    mode(t.m) * poly
                })
                .sum(),
            SphereFunction::Product(fs) => fs.iter().map(|f| f.eval(s, theta)).product(),
            SphereFunction::Conjugate(f) => f.eval(s, theta).conj(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub radial: usize,
    pub angular: usize,
    /// Entry tolerance for the node-doubling check; `None` skips it.
    pub check_tol: Option<f64>,
}

impl Quadrature {
    /// Exact for polynomial functions of the given degree.
    pub fn for_degree(k: u32, degree: usize) -> Self {
        let k = k as usize;
        Quadrature { radial: (k + degree) / 2 + 4, angular: k + degree + 2, check_tol: Some(1e-10) }
    }
}

fn raw_matrix(f: &SphereFunction, k: u32, radial: usize, angular: usize) -> CMat {
    let d = k as usize + 1;
    let (s_nodes, s_weights) = linalg::gauss_legendre_on(radial, 0.0, 1.0);
    let thetas: Vec<f64> = (0..angular).map(|q| 2.0 * PI * q as f64 / angular as f64).collect();
    let kk = k as i64;
    // fourier[r][m + k] = F_m(s_r)
    let fourier: Vec<Vec<Complex64>> = s_nodes
        .iter()
        .map(|&s| {
            let vals: Vec<Complex64> = thetas.iter().map(|&t| f.eval(s, t)).collect();
            (-kk..=kk)
                .map(|m| {
                    vals.iter()
                        .zip(&thetas)
                        .map(|(v, &t)| v * Complex64::from_polar(1.0, -(m as f64) * t))
                        .sum::<Complex64>()
                        / angular as f64
                })
                .collect()
        })
        .collect();
    let ln_norm: Vec<f64> = (0..=k).map(|a| ln_binom(k, a)).collect();
    let kf = k as f64;
    CMat::from_fn(d, d, |a, b| {
        let p = 0.5 * (a + b) as f64;
        let m = a as i64 - b as i64;
        let prefactor = (0.5 * (ln_norm[a] + ln_norm[b])).exp() * (kf + 1.0);
        let integral: Complex64 = s_nodes
            .iter()
            .enumerate()
            .map(|(r, &s)| fourier[r][(m + kk) as usize] * (s_weights[r] * (p * s.ln() + (kf - p) * (1.0 - s).ln()).exp()))
            .sum();
        integral * prefactor
    })
}

/// `(T_f)_{ab} = <f e_b, e_a>`.
pub fn toeplitz_matrix(f: &SphereFunction, basis: &FockBasis, quad: &Quadrature) -> Result<CMat> {
    if quad.radial == 0 || quad.angular == 0 {
        return Err(Error::Invalid("quadrature needs at least one node in each direction".into()));
    }
    let t = raw_matrix(f, basis.k, quad.radial, quad.angular);
    if let Some(tol) = quad.check_tol {
        let fine = raw_matrix(f, basis.k, 2 * quad.radial, 2 * quad.angular);
        let change = linalg::max_abs_diff(&t, &fine);
        if change > tol {
            return Err(Error::Convergence(format!("node doubling changes T_f by {change:e} > {tol:e}")));
        }
    }
    Ok(t)
}

pub fn toeplitz(f: &SphereFunction, k: u32) -> Result<CMat> {
    toeplitz_matrix(f, &FockBasis::new(k), &Quadrature::for_degree(k, f.degree()))
}

/// `||T_f T_g - T_{fg}||` (spectral norm) per level.
pub fn multiplicativity_decay(f: &SphereFunction, g: &SphereFunction, levels: &[u32]) -> Result<Vec<f64>> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("levels must be strictly increasing".into()));
    }
    if let Some(&k) = levels.iter().find(|&&k| k < 2) {
        return Err(Error::OutOfRange(format!("level {k} is below 2")));
    }
    let fg = f.product(g);
    levels
        .iter()
        .map(|&k| {
            let tf = toeplitz(f, k)?;
            let tg = toeplitz(g, k)?;
            let tfg = toeplitz(&fg, k)?;
            Ok(linalg::spectral_norm(&(tf * tg - tfg)))
        })
        .collect()
}

/// Least-squares slope of `log defect` against `log k`.
pub fn decay_slope(levels: &[u32], defects: &[f64]) -> f64 {
    let xs: Vec<f64> = levels.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    linalg::least_squares_slope(&xs, &ys)
}

/// Whether `||T_f|| < tol`.
pub fn kernel_check(f: &SphereFunction, basis: &FockBasis, tol: f64) -> Result<bool> {
    let t = toeplitz_matrix(f, basis, &Quadrature::for_degree(basis.k, f.degree()))?;
    Ok(linalg::spectral_norm(&t) < tol)
}
