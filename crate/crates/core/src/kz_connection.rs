//! The Knizhnik–Zamolodchikov connection on `(V_1 ⊗ V_2 ⊗ V_3 ⊗ V_4)^SU(2)`
//! over `C \ {-1, 0, 1}`.
//!
//! A covariant constant section satisfies
//! `s'(tau) = kappa * (Omega_41/tau + Omega_42/(tau-1) + Omega_43/(tau+1)) s(tau)`,
//! where `Omega_ij` is the split Casimir acting in factors `i` and `j`. The
//! generators are normalised so that they are orthonormal for the trace form
//! of the defining representation (long roots of length `sqrt 2`).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{self, c, CMat};
use crate::{Error, Result};

/// Highest weight `lambda` of an SU(2) irrep; spin `lambda / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinLabel {
    pub lambda: u32,
}

impl SpinLabel {
    pub fn new(lambda: u32) -> Self {
        SpinLabel { lambda }
    }

    pub fn spin(&self) -> f64 {
        self.lambda as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.lambda as usize + 1
    }
}

pub const PUNCTURES: [Complex64; 3] = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
pub const MIN_PUNCTURE_DISTANCE: f64 = 1e-3;
pub const MIN_STEPS: usize = 100;
pub const MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourPointConfig {
    pub labels: [SpinLabel; 4],
    pub tau: Complex64,
    pub coupling: f64,
}

impl FourPointConfig {
    pub fn new(labels: [SpinLabel; 4], tau: Complex64, coupling: f64) -> Result<Self> {
        for s in PUNCTURES {
            if (tau - s).norm() <= 1e-9 {
                return Err(Error::Domain(format!("tau = {tau} coincides with the puncture {s}")));
            }
        }
        Ok(FourPointConfig { labels, tau, coupling })
    }
}

/// Anti-Hermitian generators `J_a = -i sqrt(2) S_a` in the basis
/// `m = j, j-1, ..., -j`.
pub fn irrep_generators(label: SpinLabel) -> [CMat; 3] {
    let n = label.dim();
    let j = label.spin();
    let m = |i: usize| j - i as f64;
    // S_+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> is basis index i-1.
    let mut raise = CMat::zeros(n, n);
    for i in 1..n {
        let mi = m(i);
        raise[(i - 1, i)] = c((j * (j + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower).map(|z| z * 0.5);
    let sy = (&raise - &lower).map(|z| z / c(0.0, 2.0));
    let sz = CMat::from_fn(n, n, |r, col| if r == col { c(m(r), 0.0) } else { c(0.0, 0.0) });
    let factor = c(0.0, -std::f64::consts::SQRT_2);
    [sx.map(|z| z * factor), sy.map(|z| z * factor), sz.map(|z| z * factor)]
}

/// `sum_a J_a J_a`; equals `-2 j (j + 1) Id` on the spin-`j` irrep.
pub fn casimir(label: SpinLabel) -> CMat {
    let g = irrep_generators(label);
    &g[0] * &g[0] + &g[1] * &g[1] + &g[2] * &g[2]
}

fn embed(op: &CMat, slot: usize, labels: &[SpinLabel; 4]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for (i, l) in labels.iter().enumerate() {
        let factor = if i == slot { op.clone() } else { CMat::identity(l.dim(), l.dim()) };
        out = linalg::kron(&out, &factor);
    }
    out
}

fn check_slot(slot: usize) -> Result<usize> {
    if (1..=4).contains(&slot) {
        Ok(slot - 1)
    } else {
        Err(Error::OutOfRange(format!("tensor slot {slot} is not in 1..=4")))
    }
}

/// `Omega_ij` on the full tensor product, with slots numbered `1..=4`.
///
/// With the trace form `<A, B> = tr(AB)` the dual basis of `J_a` is `-J_a`,
/// so `Omega_ij = -sum_a J_a^(i) J_a^(j)`. On the spin-`J` component of
/// factors `(j_i, j_j)` it acts by `J(J+1) - j_i(j_i+1) - j_j(j_j+1)`.
pub fn casimir_pair(i: usize, j: usize, labels: &[SpinLabel; 4]) -> Result<CMat> {
    let (a, b) = (check_slot(i)?, check_slot(j)?);
    if a == b {
        return Err(Error::Invalid(format!("Omega_{i}{j} needs two distinct slots")));
    }
    let gi = irrep_generators(labels[a]);
    let gj = irrep_generators(labels[b]);
    let dim: usize = labels.iter().map(|l| l.dim()).product();
    let mut out = CMat::zeros(dim, dim);
    for k in 0..3 {
        out -= embed(&gi[k], a, labels) * embed(&gj[k], b, labels);
    }
    Ok(out)
}

/// Diagonal action of the generators on the tensor product.
pub fn total_generators(labels: &[SpinLabel; 4]) -> [CMat; 3] {
    let dim: usize = labels.iter().map(|l| l.dim()).product();
    let mut out = [CMat::zeros(dim, dim), CMat::zeros(dim, dim), CMat::zeros(dim, dim)];
    for (slot, l) in labels.iter().enumerate() {
        let g = irrep_generators(*l);
        for k in 0..3 {
            out[k] += embed(&g[k], slot, labels);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct InvariantSubspace {
    pub ambient_dim: usize,
    /// Orthonormal columns spanning the invariant tensors.
    pub basis: CMat,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector onto the subspace, on the ambient space.
    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// `B^† M B` for an ambient operator `M`.
    pub fn restrict(&self, op: &CMat) -> CMat {
        self.basis.adjoint() * op * &self.basis
    }
}

/// Joint kernel of the three total generators, found as the kernel of the
/// positive semidefinite total Casimir `-sum_a J_a J_a`.
pub fn invariant_subspace(labels: &[SpinLabel; 4]) -> InvariantSubspace {
    let total = total_generators(labels);
    let ambient_dim = total[0].nrows();
    let neg_casimir = -(&total[0] * &total[0] + &total[1] * &total[1] + &total[2] * &total[2]);
    let (values, vectors) = linalg::hermitian_eigen(&neg_casimir);
    // Nonzero eigenvalues are 2J(J+1) >= 3/2.
    let keep: Vec<usize> = values.iter().enumerate().filter(|(_, &v)| v.abs() < 0.5).map(|(i, _)| i).collect();
    let basis = CMat::from_fn(ambient_dim, keep.len(), |r, col| vectors[(r, keep[col])]);
    InvariantSubspace { ambient_dim, basis }
}

/// The connection form restricted to invariant tensors.
#[derive(Clone, Debug)]
pub struct KzSystem {
    pub labels: [SpinLabel; 4],
    pub coupling: f64,
    pub subspace: InvariantSubspace,
    /// Restrictions of `Omega_41`, `Omega_42`, `Omega_43`; these are the
    /// residues at `tau = 0`, `1`, `-1` respectively.
    pub residues: [CMat; 3],
}

impl KzSystem {
    pub fn new(labels: [SpinLabel; 4], coupling: f64) -> Result<Self> {
        let subspace = invariant_subspace(&labels);
        let residues = [
            subspace.restrict(&casimir_pair(4, 1, &labels)?),
            subspace.restrict(&casimir_pair(4, 2, &labels)?),
            subspace.restrict(&casimir_pair(4, 3, &labels)?),
        ];
        Ok(KzSystem { labels, coupling, subspace, residues })
    }

    pub fn from_config(config: &FourPointConfig) -> Result<Self> {
        Self::new(config.labels, config.coupling)
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    /// `A(tau) = Omega_41/tau + Omega_42/(tau-1) + Omega_43/(tau+1)` on the
    /// invariant subspace (without the coupling).
    pub fn connection_matrix(&self, tau: Complex64) -> CMat {
        let one = c(1.0, 0.0);
        self.residues[0].map(|z| z / tau)
            + self.residues[1].map(|z| z / (tau - one))
            + self.residues[2].map(|z| z / (tau + one))
    }

    /// Residue of the connection form at a puncture.
    pub fn residue_at(&self, puncture: Complex64) -> Result<&CMat> {
        let idx = if puncture == c(0.0, 0.0) {
            0
        } else if puncture == c(1.0, 0.0) {
            1
        } else if puncture == c(-1.0, 0.0) {
            2
        } else {
            return Err(Error::Invalid(format!("{puncture} is not a puncture")));
        };
        Ok(&self.residues[idx])
    }

    /// Transport along a polyline; see [`kz_transport`].
    pub fn transport(&self, path: &[Complex64], steps: usize) -> Result<KzTransport> {
        validate_path(path)?;
        if steps < MIN_STEPS {
            return Err(Error::StepBudget(format!("{steps} steps is below the minimum of {MIN_STEPS}")));
        }
        if steps > MAX_STEPS / 2 {
            return Err(Error::StepBudget(format!("{steps} steps exceeds the budget of {}", MAX_STEPS / 2)));
        }
        let coarse = self.integrate(path, steps);
        let fine = self.integrate(path, 2 * steps);
        let halving_defect = linalg::max_abs_diff(&coarse, &fine);
        Ok(KzTransport { matrix: fine, halving_defect })
    }

    fn integrate(&self, path: &[Complex64], steps: usize) -> CMat {
        let d = self.dim();
        let mut m = CMat::identity(d, d);
        let lengths: Vec<f64> = path.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = lengths.iter().sum();
        if total == 0.0 || d == 0 {
            return m;
        }
        let kappa = self.coupling;
        for (seg, w) in path.windows(2).enumerate() {
            if lengths[seg] == 0.0 {
                continue;
            }
            let n = ((steps as f64 * lengths[seg] / total).ceil() as usize).max(1);
            let dtau = (w[1] - w[0]) / n as f64;
            let rhs = |tau: Complex64, y: &CMat| -> CMat { self.connection_matrix(tau).map(|z| z * dtau * kappa) * y };
            for s in 0..n {
                let t0 = w[0] + dtau * s as f64;
                let half = t0 + dtau * 0.5;
                let k1 = rhs(t0, &m);
                let k2 = rhs(half, &(&m + k1.map(|z| z * 0.5)));
                let k3 = rhs(half, &(&m + k2.map(|z| z * 0.5)));
                let k4 = rhs(t0 + dtau, &(&m + &k3));
                m += (k1 + k2.map(|z| z * 2.0) + k3.map(|z| z * 2.0) + k4).map(|z| z / 6.0);
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct KzTransport {
    pub matrix: CMat,
    /// Max-entry change between `steps` and `2 * steps` integrations.
    pub halving_defect: f64,
}

fn distance_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn validate_path(path: &[Complex64]) -> Result<()> {
    for (i, p) in path.iter().enumerate() {
        for s in PUNCTURES {
            if (p - s).norm() < MIN_PUNCTURE_DISTANCE {
                return Err(Error::Domain(format!("path point {i} ({p}) is within {MIN_PUNCTURE_DISTANCE} of {s}")));
            }
        }
    }
    for (i, w) in path.windows(2).enumerate() {
        for s in PUNCTURES {
            if distance_to_segment(s, w[0], w[1]) < MIN_PUNCTURE_DISTANCE {
                return Err(Error::Domain(format!("path segment {i} passes within {MIN_PUNCTURE_DISTANCE} of {s}")));
            }
        }
    }
    Ok(())
}

/// Parallel transport of the KZ connection along a polyline starting at
/// `config.tau`, by fixed-step RK4 on `s' = kappa A(tau) s`.
///
/// The result maps the initial value of a covariant constant section to its
/// value at the end of the path.
pub fn kz_transport(config: &FourPointConfig, path: &[Complex64], steps: usize) -> Result<KzTransport> {
    if let Some(first) = path.first() {
        if (first - config.tau).norm() > 1e-12 {
            return Err(Error::Invalid(format!("path starts at {first}, not at tau = {}", config.tau)));
        }
    }
    KzSystem::from_config(config)?.transport(path, steps)
}

/// Closed polygon approximating a counter-clockwise circle, starting and
/// ending at `center + radius`.
pub fn circle_path(center: Complex64, radius: f64, segments: usize) -> Vec<Complex64> {
    let segments = segments.max(64);
    (0..=segments)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

pub fn reversed(path: &[Complex64]) -> Vec<Complex64> {
    path.iter().rev().cloned().collect()
}

/// `min_c ||M - c Id||_max` attained at `c = tr(M) / d`.
pub fn scalar_deviation(m: &CMat) -> f64 {
    let d = m.nrows();
    if d == 0 {
        return 0.0;
    }
    let scalar = m.trace() / d as f64;
    linalg::max_abs_diff(m, &CMat::identity(d, d).map(|z| z * scalar))
}

/// Largest distance between the spectra of `a` and `b` under the best
/// matching of eigenvalues.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n <= 6 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let d = a.iter().zip(p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max);
            best = best.min(d);
        });
        return best;
    }
    let mut used = vec![false; n];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, (x - b[j]).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Compares the local monodromy of a counter-clockwise loop around
/// `puncture` with `exp(2 pi i kappa eig(residue))`; returns the spectral
/// distance.
pub fn monodromy_defect(system: &KzSystem, puncture: Complex64, radius: f64, steps: usize) -> Result<f64> {
    let path = circle_path(puncture, radius, 256);
    let m = system.transport(&path, steps)?.matrix;
    let got = linalg::eigenvalues(&m)?;
    let expected: Vec<Complex64> = linalg::eigenvalues(system.residue_at(puncture)?)?
        .into_iter()
        .map(|l| (c(0.0, 2.0 * std::f64::consts::PI * system.coupling) * l).exp())
        .collect();
    Ok(spectral_distance(&got, &expected))
}

/// Two traceless symmetric complex 3×3 matrices are conjugate iff their
/// spectra coincide; compares sorted spectra to `1e-8`.
pub fn symbol_conjugacy_check(a: &CMat, b: &CMat) -> Result<bool> {
    for (name, m) in [("A", a), ("B", b)] {
        if m.shape() != (3, 3) {
            return Err(Error::Invalid(format!("{name} is not 3x3")));
        }
        if linalg::max_abs_diff(m, &m.transpose()) > 1e-10 {
            return Err(Error::Invalid(format!("{name} is not symmetric")));
        }
        if m.trace().norm() > 1e-10 {
            return Err(Error::Invalid(format!("{name} is not traceless")));
        }
    }
    let ea = linalg::eigenvalues(a)?;
    let eb = linalg::eigenvalues(b)?;
    Ok(spectral_distance(&ea, &eb) < 1e-8)
}

/// Applies a transport matrix to an initial invariant vector.
pub fn transport_vector(t: &KzTransport, v: &DVector<Complex64>) -> DVector<Complex64> {
    &t.matrix * v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(l: [u32; 4]) -> [SpinLabel; 4] {
        l.map(SpinLabel::new)
    }

    #[test]
    fn generators_are_anti_hermitian_and_orthonormal() {
        for lambda in 0..6 {
            let g = irrep_generators(SpinLabel::new(lambda));
            for m in &g {
                assert!(linalg::max_abs_diff(m, &m.adjoint().map(|z| -z)) < 1e-14);
                assert!(m.trace().norm() < 1e-14);
            }
        }
        let g = irrep_generators(SpinLabel::new(1));
        for a in 0..3 {
            for b in 0..3 {
                let t = -(&g[a] * &g[b]).trace();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((t - c(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn casimir_scalars() {
        assert!(irrep_generators(SpinLabel::new(0)).iter().all(|m| m.shape() == (1, 1) && m[(0, 0)].norm() == 0.0));
        for (lambda, value) in [(1, 1.5), (2, 4.0), (3, 7.5)] {
            let cas = casimir(SpinLabel::new(lambda));
            let n = cas.nrows();
            let expected = CMat::identity(n, n).map(|z| z * -value);
            assert!(linalg::max_abs_diff(&cas, &expected) < 1e-13);
        }
    }

    #[test]
    fn two_spin_halves_pair_spectrum() {
        let ls = labels([1, 1, 0, 0]);
        let omega = casimir_pair(1, 2, &ls).unwrap();
        let (vals, _) = linalg::hermitian_eigen(&omega);
        let expected = [-1.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-13);
        }
        assert!(omega.trace().norm() < 1e-13);
    }

    #[test]
    fn trivial_factor_gives_zero_pair() {
        let ls = labels([2, 0, 1, 1]);
        let omega = casimir_pair(1, 2, &ls).unwrap();
        assert!(omega.iter().all(|z| z.norm() < 1e-15));
        assert!(casimir_pair(2, 2, &ls).is_err());
        assert!(casimir_pair(0, 2, &ls).is_err());
    }

    #[test]
    fn invariant_dimensions() {
        assert_eq!(invariant_subspace(&labels([1, 1, 1, 1])).dim(), 2);
        assert_eq!(invariant_subspace(&labels([0, 0, 0, 0])).dim(), 1);
        assert_eq!(invariant_subspace(&labels([1, 1, 1, 3])).dim(), 1);
        assert_eq!(invariant_subspace(&labels([1, 0, 0, 0])).dim(), 0);
    }

    #[test]
    fn empty_path_is_identity() {
        let sys = KzSystem::new(labels([1, 1, 1, 1]), 1.0).unwrap();
        let p = c(0.5, 0.5);
        for path in [vec![], vec![p], vec![p, p]] {
            let t = sys.transport(&path, 100).unwrap();
            assert!(linalg::max_abs_diff(&t.matrix, &CMat::identity(2, 2)) == 0.0);
        }
    }

    #[test]
    fn path_validation() {
        let sys = KzSystem::new(labels([1, 1, 1, 1]), 1.0).unwrap();
        assert!(matches!(sys.transport(&[c(-0.5, 0.0), c(0.5, 0.0)], 200), Err(Error::Domain(_))));
        assert!(matches!(sys.transport(&[c(0.0005, 0.0), c(0.5, 0.5)], 200), Err(Error::Domain(_))));
        assert!(matches!(sys.transport(&[c(0.5, 0.5), c(0.6, 0.5)], 10), Err(Error::StepBudget(_))));
        let cfg = FourPointConfig::new(labels([1, 1, 1, 1]), c(0.5, 0.5), 1.0).unwrap();
        assert!(kz_transport(&cfg, &[c(0.4, 0.5), c(0.6, 0.5)], 200).is_err());
        assert!(FourPointConfig::new(labels([1, 1, 1, 1]), c(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn symbol_conjugacy_examples() {
        let diag = |a: f64, b: f64, d: f64| {
            CMat::from_diagonal(&DVector::from_vec(vec![c(a, 0.0), c(b, 0.0), c(d, 0.0)]))
        };
        let a = diag(1.0, -1.0, 0.0);
        assert!(symbol_conjugacy_check(&a, &a).unwrap());
        assert!(symbol_conjugacy_check(&a, &diag(-1.0, 0.0, 1.0)).unwrap());
        assert!(!symbol_conjugacy_check(&a, &diag(2.0, -2.0, 0.0)).unwrap());
        assert!(symbol_conjugacy_check(&a, &diag(1.0, 1.0, 0.0)).is_err());
        let mut asym = a.clone();
        asym[(0, 1)] = c(1.0, 0.0);
        assert!(symbol_conjugacy_check(&asym, &a).is_err());
    }

    #[test]
    fn symbol_conjugacy_under_complex_orthogonal_conjugation() {
        // A complex rotation R with R^T R = Id keeps symmetric matrices symmetric.
        let th = c(0.3, 0.7);
        let (co, si) = (th.cos(), th.sin());
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let r = CMat::from_row_slice(3, 3, &[co, -si, zero, si, co, zero, zero, zero, one]);
        let a = CMat::from_row_slice(
            3,
            3,
            &[c(1.0, 0.5), c(0.2, 0.0), c(0.0, 0.3), c(0.2, 0.0), c(-0.4, 0.0), c(0.7, 0.0), c(0.0, 0.3), c(0.7, 0.0), c(-0.6, -0.5)],
        );
        let b = &r * &a * r.transpose();
        assert!(symbol_conjugacy_check(&a, &b).unwrap());
    }
}
