//! Time-ordered transport for `E'(t) = -P(t) E(t)` with
//! `P(t) = P_inf + delta(t)`, `||delta(t)|| <= c t^alpha`, `alpha < -1`.
//!
//! The Dyson series writes `E = sum_n f_n` with `f_0(s) = exp(-(s - t0) P_inf)`
//! and `f_n(s) = int_{t0}^s exp(-(s - u) P_inf) (-delta(u)) f_{n-1}(u) du`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat};
use crate::{Error, Result};

const GL_NODES: usize = 16;
pub const MAX_DOUBLINGS: usize = 40;
pub const MAX_SERIES_TERMS: usize = 200;
pub const MAX_ODE_STEPS: usize = 20_000_000;

type DeltaFn = dyn Fn(f64) -> CMat + Send + Sync;

#[derive(Clone)]
pub struct GeneratorFamily {
    p_inf: CMat,
    delta: Arc<DeltaFn>,
    bound_c: f64,
    alpha: f64,
    t_min: f64,
}

impl std::fmt::Debug for GeneratorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeneratorFamily")
            .field("p_inf", &self.p_inf)
            .field("bound_c", &self.bound_c)
            .field("alpha", &self.alpha)
            .field("t_min", &self.t_min)
            .finish()
    }
}

impl GeneratorFamily {
    /// Validates the decay bound on `t_min * 2^m` for `m < 40` and that the
    /// Hermitian part of `P_inf` is positive semidefinite.
    pub fn new(
        p_inf: CMat,
        delta: impl Fn(f64) -> CMat + Send + Sync + 'static,
        bound_c: f64,
        alpha: f64,
        t_min: f64,
    ) -> Result<Self> {
        let d = p_inf.nrows();
        if d == 0 || p_inf.ncols() != d {
            return Err(Error::Invalid("P_inf must be a nonempty square matrix".into()));
        }
        if !(alpha < -1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must be < -1")));
        }
        if !(bound_c >= 0.0 && bound_c.is_finite()) {
            return Err(Error::Invalid(format!("bound constant {bound_c} must be finite and nonnegative")));
        }
        if !(t_min > 0.0 && t_min.is_finite()) {
            return Err(Error::Invalid(format!("t_min = {t_min} must be positive")));
        }
        let (herm, _) = linalg::hermitian_eigen(&linalg::hermitian_part(&p_inf));
        let scale = linalg::spectral_norm(&p_inf).max(1.0);
        if herm[0] < -1e-12 * scale {
            return Err(Error::Domain(format!(
                "Hermitian part of P_inf has eigenvalue {:e}; exp(-s P_inf) is not a contraction",
                herm[0]
            )));
        }
        for m in 0..40 {
            let t = t_min * 2f64.powi(m);
            let dt = delta(t);
            if dt.shape() != (d, d) {
                return Err(Error::Invalid(format!("delta({t}) has the wrong shape")));
            }
            let norm = linalg::spectral_norm(&dt);
            if norm > bound_c * t.powf(alpha) * (1.0 + 1e-10) + 1e-300 {
                return Err(Error::Domain(format!("||delta({t})|| = {norm:e} exceeds c t^alpha")));
            }
        }
        Ok(GeneratorFamily { p_inf, delta: Arc::new(delta), bound_c, alpha, t_min })
    }

    /// `delta(t) = C t^alpha` with `c = ||C||`.
    pub fn power(p_inf: CMat, coeff: CMat, alpha: f64, t_min: f64) -> Result<Self> {
        if coeff.shape() != p_inf.shape() {
            return Err(Error::Invalid("delta coefficient and P_inf differ in shape".into()));
        }
        let c = linalg::spectral_norm(&coeff);
        Self::new(p_inf, move |t| coeff.map(|z| z * t.powf(alpha)), c, alpha, t_min)
    }

    pub fn dim(&self) -> usize {
        self.p_inf.nrows()
    }

    pub fn p_inf(&self) -> &CMat {
        &self.p_inf
    }

    pub fn delta(&self, t: f64) -> CMat {
        (self.delta)(t)
    }

    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn generator(&self, t: f64) -> CMat {
        &self.p_inf + self.delta(t)
    }

    /// `int_{t0}^t c s^alpha ds`.
    pub fn decay_integral(&self, t0: f64, t: f64) -> f64 {
        let a1 = self.alpha + 1.0;
        self.bound_c * (t.powf(a1) - t0.powf(a1)) / a1
    }

    fn check_interval(&self, t0: f64, t: f64) -> Result<()> {
        if !(t0 >= self.t_min) || !t0.is_finite() {
            return Err(Error::Domain(format!("t0 = {t0} is below t_min = {}", self.t_min)));
        }
        if !(t >= t0) || !t.is_finite() {
            return Err(Error::Domain(format!("t = {t} must satisfy t >= t0 = {t0}")));
        }
        Ok(())
    }
}

fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

/// Exponentials needed on one panel of width `h`.
struct PanelExps {
    /// `exp(-h (x_i - x_i y_m) P)`, indexed `[i][m]`.
    inner: Vec<Vec<CMat>>,
    /// `exp(-h x_i P)`.
    to_node: Vec<CMat>,
    /// `exp(-h P)`.
    full: CMat,
}

struct DysonQuadrature {
    x: Vec<f64>,
    wx: Vec<f64>,
    y: Vec<f64>,
    wy: Vec<f64>,
    /// Lagrange weights `L_j(x_i y_m)` on the panel nodes, `[i][m][j]`.
    lagrange_sub: Vec<Vec<Vec<f64>>>,
}

fn lagrange_weights(nodes: &[f64], at: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &xm)| (at - xm) / (nodes[j] - xm))
                .product()
        })
        .collect()
}

impl DysonQuadrature {
    fn new() -> Self {
        let (x, wx) = linalg::gauss_legendre_on(GL_NODES, 0.0, 1.0);
        let (y, wy) = (x.clone(), wx.clone());
        let lagrange_sub = x
            .iter()
            .map(|&xi| y.iter().map(|&ym| lagrange_weights(&x, xi * ym)).collect())
            .collect();
        DysonQuadrature { x, wx, y, wy, lagrange_sub }
    }

    fn exps(&self, p: &CMat, h: f64) -> PanelExps {
        let inner = self
            .x
            .iter()
            .map(|&xi| self.y.iter().map(|&ym| expm(&p.map(|z| z * (-h * xi * (1.0 - ym))))).collect())
            .collect();
        let to_node = self.x.iter().map(|&xi| expm(&p.map(|z| z * (-h * xi)))).collect();
        PanelExps { inner, to_node, full: expm(&p.map(|z| z * -h)) }
    }
}

/// Panel boundaries from `t0` to `t`: widths `h_P / 2^m` no larger than a
/// quarter of the panel's left end.
fn panels(p_norm: f64, t0: f64, t: f64) -> Vec<(f64, f64)> {
    let h_p = 1.0 / (1.0 + p_norm);
    let mut out = Vec::new();
    let mut a = t0;
    while a < t {
        let mut h = h_p;
        while h > a / 4.0 {
            h *= 0.5;
        }
        let b = if a + h >= t * (1.0 - 1e-14) { t } else { a + h };
        out.push((a, b));
        a = b;
    }
    out
}

#[derive(Clone, Debug)]
pub struct DysonResult {
    pub matrix: CMat,
    pub terms: usize,
    /// Bound `b_{n+1} exp(cX)` on the discarded tail.
    pub tail_bound: f64,
    /// Spectral norms of the individual terms `f_n(t)`.
    pub term_norms: Vec<f64>,
}

/// The Dyson series to the truncation order where the remaining tail is
/// certified below `tol`.
pub fn dyson_transport(fam: &GeneratorFamily, t0: f64, t: f64, tol: f64) -> Result<CMat> {
    Ok(dyson_series(fam, t0, t, tol)?.matrix)
}

pub fn dyson_series(fam: &GeneratorFamily, t0: f64, t: f64, tol: f64) -> Result<DysonResult> {
    fam.check_interval(t0, t)?;
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let d = fam.dim();
    let big_x = fam.decay_integral(t0, t);
    let growth = big_x.exp();
    // Terms needed: b_n = X^n / n!.
    let mut terms = 0;
    let mut b = 1.0;
    loop {
        let next = b * big_x / (terms as f64 + 1.0);
        if next * growth < tol {
            break;
        }
        terms += 1;
        b = next;
        if terms > MAX_SERIES_TERMS {
            return Err(Error::Convergence(format!("series needs more than {MAX_SERIES_TERMS} terms")));
        }
    }
    let tail_bound = b * big_x / (terms as f64 + 1.0) * growth;

    let p = &fam.p_inf;
    if t == t0 {
        return Ok(DysonResult { matrix: CMat::identity(d, d), terms: 0, tail_bound: 0.0, term_norms: vec![1.0] });
    }
    let quad = DysonQuadrature::new();
    let pans = panels(linalg::spectral_norm(p), t0, t);
    let mut cache: HashMap<u64, PanelExps> = HashMap::new();
    for &(a, b) in &pans {
        cache.entry((b - a).to_bits()).or_insert_with(|| quad.exps(p, b - a));
    }
    let n_nodes = pans.len() * GL_NODES;
    let neg_delta: Vec<CMat> = pans
        .iter()
        .flat_map(|&(a, b)| quad.x.iter().map(move |&xi| a + (b - a) * xi))
        .map(|s| -fam.delta(s))
        .collect();

    // f_0 on the nodes, and at panel ends.
    let mut f_nodes: Vec<CMat> = Vec::with_capacity(n_nodes);
    let mut f_end = CMat::identity(d, d);
    for &(a, b) in &pans {
        let e = &cache[&(b - a).to_bits()];
        for i in 0..GL_NODES {
            f_nodes.push(&e.to_node[i] * &f_end);
        }
        f_end = &e.full * &f_end;
    }
    let mut total = f_end.clone();
    let mut term_norms = vec![linalg::spectral_norm(&f_end)];

    for _ in 0..terms {
        let phi: Vec<CMat> = neg_delta.iter().zip(&f_nodes).map(|(dl, f)| dl * f).collect();
        let mut next_nodes = Vec::with_capacity(n_nodes);
        let mut g_start = CMat::zeros(d, d);
        for (pi, &(a, b)) in pans.iter().enumerate() {
            let h = b - a;
            let e = &cache[&h.to_bits()];
            let local = &phi[pi * GL_NODES..(pi + 1) * GL_NODES];
            for i in 0..GL_NODES {
                let mut acc = &e.to_node[i] * &g_start;
                let xi = quad.x[i];
                for m in 0..GL_NODES {
                    let lw = &quad.lagrange_sub[i][m];
                    let mut interp = CMat::zeros(d, d);
                    for (j, l) in lw.iter().enumerate() {
                        interp += local[j].map(|z| z * *l);
                    }
                    acc += (&e.inner[i][m] * interp).map(|z| z * (h * xi * quad.wy[m]));
                }
                next_nodes.push(acc);
            }
            let mut end = &e.full * &g_start;
            for (j, lj) in local.iter().enumerate() {
                let w = h * quad.wx[j];
                // exp(-h (1 - x_j) P), using x_j = 1 - x_{n-1-j}.
                end += (&e.to_node[GL_NODES - 1 - j] * lj).map(|z| z * w);
            }
            g_start = end;
        }
        term_norms.push(linalg::spectral_norm(&g_start));
        total += &g_start;
        f_nodes = next_nodes;
    }
    Ok(DysonResult { matrix: total, terms, tail_bound, term_norms })
}

#[derive(Clone, Debug)]
pub struct OdeTransport {
    pub matrix: CMat,
    /// Max-entry change between `steps` and `2 * steps`.
    pub halving_defect: f64,
}

fn rk4(fam: &GeneratorFamily, t0: f64, t: f64, steps: usize) -> CMat {
    let d = fam.dim();
    let mut e = CMat::identity(d, d);
    if t == t0 {
        return e;
    }
    let h = (t - t0) / steps as f64;
    for s in 0..steps {
        let a = t0 + h * s as f64;
        let p0 = fam.generator(a).map(|z| z * -h);
        let ph = fam.generator(a + 0.5 * h).map(|z| z * -h);
        let p1 = fam.generator(a + h).map(|z| z * -h);
        let k1 = &p0 * &e;
        let k2 = &ph * (&e + k1.map(|z| z * 0.5));
        let k3 = &ph * (&e + k2.map(|z| z * 0.5));
        let k4 = &p1 * (&e + &k3);
        e += (k1 + k2.map(|z| z * 2.0) + k3.map(|z| z * 2.0) + k4).map(|z| z / 6.0);
    }
    e
}

fn rk4_graded(fam: &GeneratorFamily, t0: f64, t: f64, h_max: f64, refine: usize) -> CMat {
    // Steps proportional to min(h_max, s/64) so that early decay is resolved.
    let mut e = CMat::identity(fam.dim(), fam.dim());
    let mut a = t0;
    while a < t {
        let h = h_max.min(a / 64.0) / refine as f64;
        let b = (a + h * 64.0).min(t);
        let n = (((b - a) / h).ceil() as usize).max(1);
        e = rk4(fam, a, b, n) * e;
        a = b;
    }
    e
}

/// Fixed-step RK4 from `E(t0) = Id`, with a step-halving check.
pub fn ode_transport(fam: &GeneratorFamily, t0: f64, t: f64, steps: usize) -> Result<OdeTransport> {
    fam.check_interval(t0, t)?;
    if steps == 0 || steps > MAX_ODE_STEPS / 2 {
        return Err(Error::StepBudget(format!("{steps} steps is outside 1..={}", MAX_ODE_STEPS / 2)));
    }
    let coarse = rk4(fam, t0, t, steps);
    let fine = rk4(fam, t0, t, 2 * steps);
    Ok(OdeTransport { halving_defect: linalg::max_abs_diff(&coarse, &fine), matrix: fine })
}

/// Chooses a step count whose halving defect is below `tol`.
pub fn ode_transport_to(fam: &GeneratorFamily, t0: f64, t: f64, tol: f64) -> Result<OdeTransport> {
    let mut steps = 64;
    loop {
        let r = ode_transport(fam, t0, t, steps)?;
        if r.halving_defect < tol {
            return Ok(r);
        }
        steps *= 2;
        if steps > MAX_ODE_STEPS / 2 {
            return Err(Error::StepBudget(format!("no step count up to {MAX_ODE_STEPS} reaches {tol:e}")));
        }
    }
}

#[derive(Clone, Debug)]
pub struct LimitTransport {
    pub e_infinity: CMat,
    pub kernel_residual: f64,
    pub t_final: f64,
}

/// Doubles `t` until `||E(2t) - E(t)|| < tol`.
pub fn limit_transport(fam: &GeneratorFamily, t0: f64, tol: f64) -> Result<LimitTransport> {
    fam.check_interval(t0, t0)?;
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let p_norm = linalg::spectral_norm(&fam.p_inf);
    let h_max = if p_norm > 0.0 { 0.1 / p_norm } else { f64::INFINITY };
    let mut t = 2.0 * t0.max(1.0);
    let mut e_t = rk4_graded(fam, t0, t, h_max, 1);
    for _ in 0..MAX_DOUBLINGS {
        let step = rk4_graded(fam, t, 2.0 * t, h_max, 1);
        let e_2t = &step * &e_t;
        let change = linalg::spectral_norm(&(&e_2t - &e_t));
        t *= 2.0;
        e_t = e_2t;
        if change < tol {
            let kernel_residual = linalg::spectral_norm(&(&fam.p_inf * &e_t));
            if kernel_residual >= 10.0 * tol {
                return Err(Error::Tolerance(format!(
                    "kernel residual {kernel_residual:e} exceeds 10 * tol at t = {t}"
                )));
            }
            return Ok(LimitTransport { e_infinity: e_t, kernel_residual, t_final: t });
        }
    }
    Err(Error::Convergence(format!("Cauchy criterion not met within {MAX_DOUBLINGS} doublings")))
}

/// `||E(t)|| <= exp(c (t^(alpha+1) - t0^(alpha+1)) / (alpha+1))` at each grid point.
pub fn bound_check(fam: &GeneratorFamily, t0: f64, t_grid: &[f64]) -> Result<Vec<bool>> {
    let mut grid: Vec<(usize, f64)> = t_grid.iter().cloned().enumerate().collect();
    for &(_, t) in &grid {
        fam.check_interval(t0, t)?;
    }
    grid.sort_by(|a, b| a.1.total_cmp(&b.1));
    let h_max = 0.02 / linalg::spectral_norm(&fam.p_inf).max(1.0);
    let mut out = vec![false; t_grid.len()];
    let mut e = CMat::identity(fam.dim(), fam.dim());
    let mut at = t0;
    for (idx, t) in grid {
        if t > at {
            e = rk4_graded(fam, at, t, h_max, 2) * e;
            at = t;
        }
        let bound = fam.decay_integral(t0, t).exp();
        out[idx] = linalg::spectral_norm(&e) <= bound * (1.0 + 1e-9);
    }
    Ok(out)
}

/// `(t - t0)^n / n!`.
pub fn simplex_volume(n: u32, t0: f64, t: f64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * (t - t0) / k as f64)
}

/// Monte Carlo estimate of the volume of `{t0 <= s_n <= ... <= s_1 <= t}`:
/// a uniform point of the cube lies in the simplex iff its coordinates are
/// already sorted.
pub fn simplex_volume_mc(n: u32, t0: f64, t: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0f64; n as usize];
    let mut hits = 0usize;
    for _ in 0..samples {
        for v in buf.iter_mut() {
            *v = rng.random::<f64>();
        }
        if buf.windows(2).all(|w| w[0] >= w[1]) {
            hits += 1;
        }
    }
    (t - t0).powi(n as i32) * hits as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalar(p: f64, coeff: f64) -> GeneratorFamily {
        GeneratorFamily::power(CMat::from_element(1, 1, c(p, 0.0)), CMat::from_element(1, 1, c(coeff, 0.0)), -2.0, 1.0)
            .unwrap()
    }

    #[test]
    fn rejects_bad_families() {
        let one = CMat::identity(1, 1);
        assert!(GeneratorFamily::power(one.clone(), one.clone(), -1.0, 1.0).is_err());
        assert!(GeneratorFamily::power(-one.clone(), one.clone(), -2.0, 1.0).is_err());
        assert!(GeneratorFamily::new(one.clone(), |t| CMat::from_element(1, 1, c(1.0 / t, 0.0)), 1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn zero_perturbation_is_semigroup() {
        let p = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.2), c(0.5, -0.2), c(2.0, 0.0)]);
        let fam = GeneratorFamily::power(p.clone(), CMat::zeros(2, 2), -2.0, 1.0).unwrap();
        let e = dyson_transport(&fam, 1.0, 3.0, 1e-12).unwrap();
        assert!(linalg::max_abs_diff(&e, &(p.map(|z| z * -2.0)).exp()) < 1e-13);
    }

    #[test]
    fn scalar_closed_form() {
        let fam = scalar(1.0, 1.0);
        for (t0, t) in [(1.0f64, 2.0f64), (1.0, 10.0), (2.0, 7.5)] {
            let expected = (-(t - t0) - (1.0 / t0 - 1.0 / t)).exp();
            let e = dyson_transport(&fam, t0, t, 1e-12).unwrap();
            assert!((e[(0, 0)].re - expected).abs() < 1e-10, "{t0} {t}: {} vs {expected}", e[(0, 0)].re);
            let o = ode_transport(&fam, t0, t, 4000).unwrap();
            assert!((o.matrix[(0, 0)].re - expected).abs() < 1e-10);
        }
        let e = dyson_transport(&fam, 1.5, 1.5, 1e-10).unwrap();
        assert_eq!(e, CMat::identity(1, 1));
    }

    #[test]
    fn diagonal_constant_generator() {
        let p = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(2.0, 0.0)]));
        let fam = GeneratorFamily::power(p, CMat::zeros(2, 2), -2.0, 1.0).unwrap();
        let o = ode_transport(&fam, 1.0, 2.0, 500).unwrap();
        assert!((o.matrix[(0, 0)].re - (-0.5f64).exp()).abs() < 1e-12);
        assert!((o.matrix[(1, 1)].re - (-2.0f64).exp()).abs() < 1e-12);
        assert!(o.matrix[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn limit_examples() {
        let fam = scalar(0.0, 1.0);
        let l = limit_transport(&fam, 1.0, 1e-8).unwrap();
        assert!((l.e_infinity[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-7, "{l:?}");
        assert_eq!(l.kernel_residual, 0.0);

        let p = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        let fam = GeneratorFamily::power(p, CMat::zeros(2, 2), -2.0, 1.0).unwrap();
        let l = limit_transport(&fam, 1.0, 1e-6).unwrap();
        let expected = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(linalg::max_abs_diff(&l.e_infinity, &expected) < 1e-6);
    }

    #[test]
    fn simplex_volumes() {
        assert!((simplex_volume(3, 1.0, 3.0) - 8.0 / 6.0).abs() < 1e-15);
        let mc = simplex_volume_mc(3, 1.0, 3.0, 200_000, 7);
        assert!((mc / (8.0 / 6.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn panels_cover_interval() {
        let p = panels(1.0, 1.0, 10.0);
        assert_eq!(p.first().unwrap().0, 1.0);
        assert_eq!(p.last().unwrap().1, 10.0);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));
        assert!(p.iter().all(|&(a, b)| b - a <= a / 4.0 + 1e-15));
    }
}
