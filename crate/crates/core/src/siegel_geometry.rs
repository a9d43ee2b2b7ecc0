//! Compatible complex structures parametrised by the Siegel upper half space.
//!
//! A point `Z = X + iY` (with `X`, `Y` real symmetric and `Y > 0`) spans the
//! holomorphic tangent space by `w_i = p_i + sum_j Z_ij q_j`. Matrices acting
//! on the symplectic space are written in the ordered `(p, q)` basis, with the
//! rows of a presentation giving the images of the basis vectors, so that
//! `I(w) = i w` reads `F I = diag(i, -i) F` for the frame `F = [[Id, Z], [Id, Z̄]]`.

use nalgebra::DMatrix;

use crate::linalg::{self, c, CMat, RMat};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const DET_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    x: RMat,
    y: RMat,
}

fn check_square_symmetric(name: &str, m: &RMat, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::Invalid(format!("{name} must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    if linalg::symmetry_residual(m) > SYMMETRY_TOL * scale {
        return Err(Error::Invalid(format!("{name} is not symmetric")));
    }
    Ok(())
}

impl SiegelPoint {
    pub fn new(x: RMat, y: RMat) -> Result<Self> {
        let n = y.nrows();
        if n == 0 {
            return Err(Error::Invalid("empty Siegel point".into()));
        }
        check_square_symmetric("Y", &y, n)?;
        check_square_symmetric("X", &x, n)?;
        let min_eig = linalg::symmetric_eigenvalues(&y)[0];
        if min_eig <= 0.0 || y.clone().cholesky().is_none() {
            return Err(Error::Domain(format!("Y is not positive definite (smallest eigenvalue {min_eig:e})")));
        }
        Ok(SiegelPoint { x, y })
    }

    pub fn from_z(z: &CMat) -> Result<Self> {
        Self::new(z.map(|w| w.re), z.map(|w| w.im))
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn x(&self) -> &RMat {
        &self.x
    }

    pub fn y(&self) -> &RMat {
        &self.y
    }

    pub fn z(&self) -> CMat {
        linalg::complex_from_parts(&self.x, &self.y)
    }

    fn y_inv(&self) -> RMat {
        self.y.clone().cholesky().expect("Y positive definite").inverse()
    }
}

fn blocks(a: &RMat, b: &RMat, cc: &RMat, d: &RMat) -> RMat {
    let n = a.nrows();
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(cc);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

fn cblocks(a: &CMat, b: &CMat, cc: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(cc);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// `[[0, Id], [-Id, 0]]`.
pub fn standard_symplectic(n: usize) -> RMat {
    let id = RMat::identity(n, n);
    blocks(&RMat::zeros(n, n), &id, &(-&id), &RMat::zeros(n, n))
}

/// `[[-X Y^-1, -(Y + X Y^-1 X)], [Y^-1, Y^-1 X]]`.
pub fn complex_structure(z: &SiegelPoint) -> RMat {
    let yi = z.y_inv();
    let x = &z.x;
    blocks(&(-(x * &yi)), &(-(&z.y + x * &yi * x)), &yi, &(&yi * x))
}

/// The metric `g = Omega I` associated with the complex structure.
pub fn compatible_metric(z: &SiegelPoint) -> RMat {
    standard_symplectic(z.n()) * complex_structure(z)
}

/// Derivative of [`complex_structure`] along the tangent vector `(Xdot, Ydot)`.
pub fn complex_structure_derivative(z: &SiegelPoint, xdot: &RMat, ydot: &RMat) -> Result<RMat> {
    let n = z.n();
    check_square_symmetric("Xdot", xdot, n)?;
    check_square_symmetric("Ydot", ydot, n)?;
    let yi = z.y_inv();
    let yi_dot = -(&yi * ydot * &yi);
    let x = &z.x;
    let a = -(xdot * &yi) - x * &yi_dot;
    let b = -(ydot + xdot * &yi * x + x * &yi_dot * x + x * &yi * xdot);
    let d = &yi_dot * x + &yi * xdot;
    Ok(blocks(&a, &b, &yi_dot, &d))
}

/// Rows `w_1..w_n, w̄_1..w̄_n` in the `(p, q)` basis.
pub fn frame(z: &SiegelPoint) -> CMat {
    let n = z.n();
    let id = CMat::identity(n, n);
    let zz = z.z();
    cblocks(&id, &zz, &id, &zz.map(|w| w.conj()))
}

/// A real presentation conjugated into the `(w, w̄)` frame, `F M F^-1`.
pub fn to_w_frame(z: &SiegelPoint, m: &RMat) -> CMat {
    let f = frame(z);
    let f_inv = f.clone().try_inverse().expect("frame is invertible when Y > 0");
    &f * linalg::to_complex(m) * f_inv
}

#[derive(Clone, Debug)]
pub struct FrameProjections {
    /// `omega(w_i, w̄_j)`.
    pub omega_w: CMat,
    /// Projection of covectors onto the span of the `w*` along the `w̄*`,
    /// in `(p*, q*)` coordinates.
    pub pi_t: CMat,
    /// Projection onto the span of the `p*` along the `w̄*`.
    pub pi_prime: CMat,
    /// Rows give `w*` and `w̄*` as combinations of `p*` and `q*`.
    pub cobasis_map: CMat,
}

fn projection_onto(keep: &CMat, along: &CMat) -> Result<CMat> {
    let n = keep.ncols();
    let mut basis = CMat::zeros(keep.nrows(), 2 * n);
    basis.view_mut((0, 0), (keep.nrows(), n)).copy_from(keep);
    basis.view_mut((0, n), (keep.nrows(), n)).copy_from(along);
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("subspaces are not complementary".into()))?;
    let mut select = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        select[(i, i)] = c(1.0, 0.0);
    }
    Ok(basis * select * inv)
}

pub fn frame_and_projections(z: &SiegelPoint) -> Result<FrameProjections> {
    let n = z.n();
    let f = frame(z);
    let omega = linalg::to_complex(&standard_symplectic(n));
    let omega_full = &f * &omega * f.transpose();
    let omega_w = omega_full.view((0, n), (n, n)).into_owned();

    let yi = linalg::to_complex(&z.y_inv());
    let zz = z.z();
    let id = CMat::identity(n, n);
    let half_i = c(0.0, 0.5);
    let top = (&yi * cblocks_row(&zz.map(|w| w.conj()), &(-&id))).map(|w| w * half_i);
    let bottom = (&yi * cblocks_row(&(-&zz), &id)).map(|w| w * half_i);
    let mut cobasis_map = CMat::zeros(2 * n, 2 * n);
    cobasis_map.view_mut((0, 0), (n, 2 * n)).copy_from(&top);
    cobasis_map.view_mut((n, 0), (n, 2 * n)).copy_from(&bottom);

    // Covectors are columns of coefficients on (p*, q*).
    let w_star = top.transpose();
    let wbar_star = bottom.transpose();
    let mut p_star = CMat::zeros(2 * n, n);
    p_star.view_mut((0, 0), (n, n)).copy_from(&id);
    let pi_t = projection_onto(&w_star, &wbar_star)?;
    let pi_prime = projection_onto(&p_star, &wbar_star)?;
    Ok(FrameProjections { omega_w, pi_t, pi_prime, cobasis_map })
}

fn cblocks_row(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(n, a.ncols() + b.ncols());
    m.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    m.view_mut((0, a.ncols()), (n, b.ncols())).copy_from(b);
    m
}

/// Coefficients `G_ij` of `-(i/2) Y^-1 Zdot Y^-1`.
pub fn g_coefficients(z: &SiegelPoint, zdot: &CMat) -> CMat {
    let yi = linalg::to_complex(&z.y_inv());
    (&yi * zdot * &yi).map(|w| w * c(0.0, -0.5))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseDecomposition {
    pub v: RMat,
    pub w: RMat,
}

/// `Z^-1 = V + iW` with `W = -(X Y^-1 X + Y)^-1` and `V = Y^-1 X (X Y^-1 X + Y)^-1`.
pub fn inverse_decomposition(z: &SiegelPoint) -> Result<InverseDecomposition> {
    let yi = z.y_inv();
    let s = &z.x * &yi * &z.x + &z.y;
    let s_inv = s
        .cholesky()
        .ok_or_else(|| Error::Domain("X Y^-1 X + Y is not positive definite".into()))?
        .inverse();
    let v = &yi * &z.x * &s_inv;
    Ok(InverseDecomposition { v, w: -s_inv })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transversality {
    pub graph_transverse: bool,
    pub totally_complex: bool,
}

fn normalized(x: &RMat, y: &RMat) -> (RMat, RMat) {
    let radius = linalg::spectral_norm(&linalg::complex_from_parts(x, y));
    let s = if radius > 10.0 { 10.0 / radius } else { 1.0 };
    (x * s, y * s)
}

/// Determinant criteria for `P ∩ P_t = 0` and `P_t ∩ P̄_t = 0`.
pub fn transversality(z: &SiegelPoint) -> Transversality {
    transversality_relaxed(&z.x, &z.y).expect("Siegel point is already validated")
}

/// As [`transversality`] but only requires `X` and `Y` real symmetric.
pub fn transversality_relaxed(x: &RMat, y: &RMat) -> Result<Transversality> {
    let n = x.nrows();
    check_square_symmetric("X", x, n)?;
    check_square_symmetric("Y", y, n)?;
    let (x, y) = normalized(x, y);
    let zz = linalg::complex_from_parts(&x, &y);
    Ok(Transversality {
        graph_transverse: zz.determinant().norm() > DET_TOL,
        totally_complex: y.determinant().abs() > DET_TOL,
    })
}

/// Span-intersection check: columns of `[P | P_t]` and `[P_t | P̄_t]` have full
/// rank exactly when the corresponding intersections vanish.
pub fn transversality_rank_oracle(x: &RMat, y: &RMat) -> Transversality {
    let n = x.nrows();
    let (x, y) = normalized(x, y);
    let zz = linalg::complex_from_parts(&x, &y);
    let id = CMat::identity(n, n);
    let zero = CMat::zeros(n, n);
    let p_and_w = cblocks(&id, &id, &zero, &zz);
    let w_and_wbar = cblocks(&id, &id, &zz, &zz.map(|w| w.conj()));
    let tol = 1e-10;
    Transversality {
        graph_transverse: linalg::rank(&p_and_w, tol) == 2 * n,
        totally_complex: linalg::rank(&w_and_wbar, tol) == 2 * n,
    }
}

/// `Z(t) = Z_inf / t + R(t)` for `t >= t_min`.
pub struct SiegelPath {
    z_inf: CMat,
    remainder: Box<dyn Fn(f64) -> (CMat, CMat) + Send + Sync>,
    t_min: f64,
}

impl std::fmt::Debug for SiegelPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SiegelPath").field("z_inf", &self.z_inf).field("t_min", &self.t_min).finish()
    }
}

impl SiegelPath {
    /// `remainder(t)` must return `(R(t), R'(t))`.
    pub fn new(
        z_inf: CMat,
        remainder: impl Fn(f64) -> (CMat, CMat) + Send + Sync + 'static,
        t_min: f64,
    ) -> Result<Self> {
        let n = z_inf.nrows();
        if z_inf.shape() != (n, n) || n == 0 {
            return Err(Error::Invalid("Z_inf must be a nonempty square matrix".into()));
        }
        if linalg::max_abs_diff(&z_inf, &z_inf.transpose()) > SYMMETRY_TOL * z_inf.camax().max(1.0) {
            return Err(Error::Invalid("Z_inf is not symmetric".into()));
        }
        if z_inf.determinant().norm() <= DET_TOL {
            return Err(Error::Domain("Z_inf is singular".into()));
        }
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(Error::Invalid(format!("t_min = {t_min} must be positive")));
        }
        Ok(SiegelPath { z_inf, remainder: Box::new(remainder), t_min })
    }

    pub fn exact(z_inf: CMat, t_min: f64) -> Result<Self> {
        let n = z_inf.nrows();
        Self::new(z_inf, move |_| (CMat::zeros(n, n), CMat::zeros(n, n)), t_min)
    }

    /// `R(t) = C t^-power`.
    pub fn power_remainder(z_inf: CMat, coeff: CMat, power: f64, t_min: f64) -> Result<Self> {
        if coeff.shape() != z_inf.shape() {
            return Err(Error::Invalid("remainder coefficient has the wrong shape".into()));
        }
        Self::new(
            z_inf,
            move |t| (coeff.map(|w| w * t.powf(-power)), coeff.map(|w| w * (-power * t.powf(-power - 1.0)))),
            t_min,
        )
    }

    pub fn z_inf(&self) -> &CMat {
        &self.z_inf
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn z(&self, t: f64) -> (CMat, CMat) {
        let (r, dr) = (self.remainder)(t);
        let z = self.z_inf.map(|w| w / t) + r;
        let dz = self.z_inf.map(|w| -w / (t * t)) + dr;
        (z, dz)
    }
}

/// `|| Z̄^-1 dZ̄/dt Z̄^-1 + Z̄_inf^-1 ||` (spectral norm) on each grid point.
pub fn degeneration_limit(path: &SiegelPath, t_grid: &[f64]) -> Result<Vec<f64>> {
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= path.t_min) || !t.is_finite()) {
        return Err(Error::Domain(format!("grid point {t} lies outside [{}, inf)", path.t_min)));
    }
    let zinf_bar_inv = path
        .z_inf
        .map(|w| w.conj())
        .try_inverse()
        .ok_or_else(|| Error::Domain("Z_inf is singular".into()))?;
    t_grid
        .iter()
        .map(|&t| {
            let (z, dz) = path.z(t);
            let zb_inv = z
                .map(|w| w.conj())
                .try_inverse()
                .ok_or_else(|| Error::Domain(format!("Z({t}) is singular")))?;
            let term = &zb_inv * dz.map(|w| w.conj()) * &zb_inv + &zinf_bar_inv;
            Ok(linalg::spectral_norm(&term))
        })
        .collect()
}

/// Real symmetric `n x n` matrix from the upper triangle of `entries`.
pub fn symmetric_from(n: usize, f: impl Fn(usize, usize) -> f64) -> RMat {
    DMatrix::from_fn(n, n, |i, j| if i <= j { f(i, j) } else { f(j, i) })
}

pub fn zdot(xdot: &RMat, ydot: &RMat) -> CMat {
    linalg::complex_from_parts(xdot, ydot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn diag(v: &[f64]) -> RMat {
        RMat::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    fn sample(n: usize) -> SiegelPoint {
        let x = symmetric_from(n, |i, j| 0.3 * (i as f64 + 1.0) - 0.2 * j as f64);
        let a = RMat::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.2 - 0.3);
        let y = &a * a.transpose() + RMat::identity(n, n);
        SiegelPoint::new(x, y).unwrap()
    }

    #[test]
    fn standard_point() {
        let p = SiegelPoint::new(RMat::zeros(2, 2), RMat::identity(2, 2)).unwrap();
        let i = complex_structure(&p);
        let expected = blocks(&RMat::zeros(2, 2), &(-RMat::identity(2, 2)), &RMat::identity(2, 2), &RMat::zeros(2, 2));
        assert_eq!(i, expected);
        assert!(linalg::max_abs_diff_real(&compatible_metric(&p), &RMat::identity(4, 4)) < 1e-15);
        let fp = frame_and_projections(&p).unwrap();
        let expected = CMat::identity(2, 2).map(|w| w * c(0.0, -2.0));
        assert!(linalg::max_abs_diff(&fp.omega_w, &expected) < 1e-15);
    }

    #[test]
    fn diagonal_metric() {
        let p = SiegelPoint::new(RMat::zeros(2, 2), diag(&[2.0, 0.5])).unwrap();
        let g = compatible_metric(&p);
        assert!(linalg::max_abs_diff_real(&g, &diag(&[0.5, 2.0, 2.0, 0.5])) < 1e-15);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(matches!(SiegelPoint::new(RMat::zeros(1, 1), diag(&[-1.0])), Err(Error::Domain(_))));
        let asym = RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(SiegelPoint::new(RMat::zeros(2, 2), asym).is_err());
        let p = sample(2);
        assert!(complex_structure_derivative(&p, &RMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]), &RMat::zeros(2, 2)).is_err());
    }

    #[test]
    fn squares_to_minus_identity() {
        for n in 1..=5 {
            let i = complex_structure(&sample(n));
            assert!(linalg::max_abs_diff_real(&(&i * &i), &(-RMat::identity(2 * n, 2 * n))) < 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_path_is_zero() {
        let d = complex_structure_derivative(&sample(3), &RMat::zeros(3, 3), &RMat::zeros(3, 3)).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn derivative_in_w_frame() {
        let p = sample(3);
        let xd = symmetric_from(3, |i, j| 0.1 * (i + 2 * j) as f64 - 0.2);
        let yd = symmetric_from(3, |i, j| 0.05 * (i * j) as f64 + 0.1);
        let d = complex_structure_derivative(&p, &xd, &yd).unwrap();
        let dw = to_w_frame(&p, &d);
        let yi = linalg::to_complex(&p.y_inv());
        let expected = -(zdot(&xd, &yd) * yi);
        let top_right = dw.view((0, 3), (3, 3)).into_owned();
        assert!(linalg::max_abs_diff(&top_right, &expected) < 1e-10);
        let top_left = dw.view((0, 0), (3, 3)).into_owned();
        assert!(top_left.iter().all(|w| w.norm() < 1e-10));
        let iw = to_w_frame(&p, &complex_structure(&p));
        let mut diag_i = CMat::identity(6, 6).map(|w| w * I);
        for k in 3..6 {
            diag_i[(k, k)] = -I;
        }
        assert!(linalg::max_abs_diff(&iw, &diag_i) < 1e-10);
    }

    #[test]
    fn inverse_decomposition_examples() {
        let p = SiegelPoint::new(RMat::zeros(2, 2), diag(&[2.0, 4.0])).unwrap();
        let d = inverse_decomposition(&p).unwrap();
        assert!(d.v.iter().all(|v| v.abs() < 1e-15));
        assert!(linalg::max_abs_diff_real(&d.w, &diag(&[-0.5, -0.25])) < 1e-15);
        let p = SiegelPoint::new(diag(&[1.0]), diag(&[1.0])).unwrap();
        let d = inverse_decomposition(&p).unwrap();
        assert!((d.v[(0, 0)] - 0.5).abs() < 1e-15 && (d.w[(0, 0)] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn transversality_examples() {
        let p = SiegelPoint::new(RMat::zeros(2, 2), RMat::identity(2, 2)).unwrap();
        assert_eq!(transversality(&p), Transversality { graph_transverse: true, totally_complex: true });
        let t = transversality_relaxed(&diag(&[1.0]), &diag(&[0.0])).unwrap();
        assert_eq!(t, Transversality { graph_transverse: true, totally_complex: false });
        assert_eq!(t, transversality_rank_oracle(&diag(&[1.0]), &diag(&[0.0])));
    }

    #[test]
    fn degeneration_examples() {
        let one = CMat::identity(1, 1);
        let path = SiegelPath::exact(one, 1.0).unwrap();
        let r = degeneration_limit(&path, &[1.0, 3.0, 1e4]).unwrap();
        assert!(r.iter().all(|v| *v < 1e-12), "{r:?}");
        assert!(degeneration_limit(&path, &[0.5]).is_err());
        assert!(SiegelPath::exact(CMat::zeros(2, 2), 1.0).is_err());
    }
}
