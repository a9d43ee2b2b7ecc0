//! Quantum integers at the root of unity `q = exp(i pi / r)`, `r = k + 2`,
//! theta symbols, and the norms of the labeled TQFT basis.
//!
//! The norm of the basis vector `v_l` attached to a labeling `l` is
//!
//! ```text
//! [v_l, v_l] = eta^(1-g) * prod_v <l(e1(v)), l(e2(v)), l(e3(v))> / prod_e <l(e)>
//! ```
//!
//! with `<j> = (-1)^j [j+1]` and the vertex factor read as the theta symbol of
//! the three incident labels.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::pants_graph::{check_member, enumerate_labelings, Labeling, TrivalentGraph};
use crate::{Error, Result};

/// Level `k`, root-of-unity order `r = k + 2` and `eta = sqrt(2/r) sin(pi/r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumParams {
    k: u32,
    r: u32,
    eta: f64,
}

impl QuantumParams {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::OutOfRange("quantum parameters need level k >= 1".into()));
        }
        let r = k + 2;
        let rf = r as f64;
        let eta = (2.0 / rf).sqrt() * (std::f64::consts::PI / rf).sin();
        Ok(QuantumParams { k, r, eta })
    }

    pub fn level(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `[j] = sin(j pi / r) / sin(pi / r)` for any integer `j`.
    pub fn qint(&self, j: i64) -> f64 {
        let r = self.r as f64;
        (j as f64 * std::f64::consts::PI / r).sin() / (std::f64::consts::PI / r).sin()
    }

    /// `[j]! = [1][2]...[j]`, with `[0]! = 1`.
    pub fn qfact(&self, j: u32) -> f64 {
        (1..=j as i64).map(|m| self.qint(m)).product()
    }

    /// `<j> = (-1)^j [j + 1]`.
    pub fn loop_value(&self, j: u32) -> f64 {
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.qint(j as i64 + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumInteger {
    pub qint: f64,
    pub qfact: f64,
    pub loop_value: f64,
}

/// `[j]`, `[j]!` and `<j>` for `0 <= j <= r - 1`.
pub fn quantum_integer(j: u32, params: &QuantumParams) -> Result<QuantumInteger> {
    if j >= params.r {
        return Err(Error::OutOfRange(format!(
            "quantum integer index {j} outside [0, {}]",
            params.r - 1
        )));
    }
    Ok(QuantumInteger {
        qint: params.qint(j as i64),
        qfact: params.qfact(j),
        loop_value: params.loop_value(j),
    })
}

/// Theta symbol `<a, b, c>` of an admissible triple.
pub fn theta_symbol(a: u32, b: u32, c: u32, params: &QuantumParams) -> Result<f64> {
    let k = params.k;
    if a > k || b > k || c > k {
        return Err(Error::OutOfRange(format!("triple ({a}, {b}, {c}) exceeds level {k}")));
    }
    let sum = a + b + c;
    if !(a.abs_diff(b) <= c && c <= a + b && sum <= 2 * k && sum.is_multiple_of(2)) {
        return Err(Error::NotAdmissible(a, b, c, k));
    }
    let alpha = (b + c - a) / 2;
    let beta = (a + c - b) / 2;
    let gamma = (a + b - c) / 2;
    let half = alpha + beta + gamma;
    let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
    let num = params.qfact(half + 1) * params.qfact(alpha) * params.qfact(beta) * params.qfact(gamma);
    let den = params.qfact(a) * params.qfact(b) * params.qfact(c);
    Ok(sign * num / den)
}

/// `[v_l, v_l]` for a member `l` of `L_k` on `graph`.
pub fn norm_squared(graph: &TrivalentGraph, labeling: &Labeling, params: &QuantumParams) -> Result<f64> {
    if labeling.level != params.k {
        return Err(Error::Invalid(format!(
            "labeling at level {} evaluated with level {} parameters",
            labeling.level, params.k
        )));
    }
    check_member(graph, labeling)?;
    let genus = graph.genus() as i32;
    let mut value = params.eta.powi(1 - genus);
    for v in 0..graph.vertices().len() {
        let (a, b, c) = labeling.vertex_triple(graph, v);
        value *= theta_symbol(a, b, c, params)?;
    }
    for &l in &labeling.values {
        value /= params.loop_value(l);
    }
    Ok(value)
}

/// Norms `[v_l, v_l]` of every labeling in `L_k(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTable {
    pub level: u32,
    pub entries: BTreeMap<Labeling, f64>,
}

impl NormTable {
    pub fn build(graph: &TrivalentGraph, params: &QuantumParams) -> Result<Self> {
        let labelings = enumerate_labelings(graph, params.k);
        let values: Vec<(Labeling, f64)> = labelings
            .into_par_iter()
            .map(|l| norm_squared(graph, &l, params).map(|n| (l, n)))
            .collect::<Result<_>>()?;
        for (l, n) in &values {
            if !(*n > 0.0) {
                return Err(Error::Tolerance(format!("norm of {:?} is not positive: {n}", l.values)));
            }
        }
        Ok(NormTable { level: params.k, entries: values.into_iter().collect() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Coefficients with respect to `v_l`.
    Raw,
    /// Coefficients with respect to `v_l / [v_l, v_l]^(1/2)`.
    Orthonormal,
}

pub type Coefficients = BTreeMap<Labeling, Complex64>;

/// Hermitian pairing of two states given by coefficients on `L_k(P)`.
pub fn bs_inner(c1: &Coefficients, c2: &Coefficients, norms: &NormTable, basis: Basis) -> Result<Complex64> {
    for l in c1.keys().chain(c2.keys()) {
        if !norms.entries.contains_key(l) {
            return Err(Error::NotMember(format!("coefficient on {:?} outside the norm table support", l.values)));
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (l, a) in c1 {
        if let Some(b) = c2.get(l) {
            let weight = match basis {
                Basis::Raw => norms.entries[l],
                Basis::Orthonormal => 1.0,
            };
            total += a * b.conj() * weight;
        }
    }
    Ok(total)
}

/// Rewrites raw-basis coefficients in the orthonormal basis.
pub fn to_orthonormal(c: &Coefficients, norms: &NormTable) -> Result<Coefficients> {
    c.iter()
        .map(|(l, a)| {
            let n = norms
                .entries
                .get(l)
                .ok_or_else(|| Error::NotMember(format!("{:?} outside the norm table support", l.values)))?;
            Ok((l.clone(), a * n.sqrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_integer_values() {
        for k in 1..10 {
            let p = QuantumParams::new(k).unwrap();
            let q = quantum_integer(1, &p).unwrap();
            assert!((q.qint - 1.0).abs() < 1e-15);
            let q0 = quantum_integer(0, &p).unwrap();
            assert_eq!(q0.qint, 0.0);
            assert_eq!(q0.qfact, 1.0);
            assert_eq!(q0.loop_value, 1.0);
        }
        let p = QuantumParams::new(2).unwrap();
        assert!((quantum_integer(2, &p).unwrap().qint - 2f64.sqrt()).abs() < 1e-14);
        assert!(quantum_integer(4, &p).is_err());
        assert!(QuantumParams::new(0).is_err());
    }

    #[test]
    fn eta_at_r3() {
        let p = QuantumParams::new(1).unwrap();
        assert!((p.eta() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn theta_symbol_examples() {
        let p1 = QuantumParams::new(1).unwrap();
        assert_eq!(theta_symbol(0, 0, 0, &p1).unwrap(), 1.0);
        assert!((theta_symbol(1, 1, 0, &p1).unwrap() + 1.0).abs() < 1e-14);
        // 40-digit evaluation of the product formula: -1/phi.
        let p3 = QuantumParams::new(3).unwrap();
        let expected = -0.618_033_988_749_895;
        assert!((theta_symbol(2, 2, 2, &p3).unwrap() - expected).abs() < 1e-14);
        assert!(matches!(theta_symbol(1, 0, 0, &p1), Err(Error::NotAdmissible(..))));
        assert!(matches!(theta_symbol(2, 0, 0, &p1), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn theta_graph_level_one_norm() {
        let g = TrivalentGraph::theta();
        let p = QuantumParams::new(1).unwrap();
        let l = Labeling::new(vec![1, 1, 0], 1).unwrap();
        assert!((norm_squared(&g, &l, &p).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_labeling_norm_is_eta_power() {
        for (g, k) in [(TrivalentGraph::theta(), 3), (TrivalentGraph::chain(3).unwrap(), 4)] {
            let p = QuantumParams::new(k).unwrap();
            let zero = Labeling::new(vec![0; g.edges().len()], k).unwrap();
            let expected = p.eta().powi(1 - g.genus() as i32);
            assert!((norm_squared(&g, &zero, &p).unwrap() - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn non_members_are_rejected() {
        let g = TrivalentGraph::theta();
        let p = QuantumParams::new(2).unwrap();
        let l = Labeling::new(vec![1, 0, 0], 2).unwrap();
        assert!(norm_squared(&g, &l, &p).is_err());
        let wrong_level = Labeling::new(vec![0, 0, 0], 1).unwrap();
        assert!(matches!(norm_squared(&g, &wrong_level, &p), Err(Error::Invalid(_))));
    }

    #[test]
    fn dumbbell_level_two_norms_positive() {
        let t = NormTable::build(&TrivalentGraph::dumbbell(), &QuantumParams::new(2).unwrap()).unwrap();
        assert_eq!(t.len(), 10);
        assert!(t.entries.values().all(|&n| n > 0.0));
    }

    #[test]
    fn inner_product_examples() {
        let g = TrivalentGraph::theta();
        let norms = NormTable::build(&g, &QuantumParams::new(1).unwrap()).unwrap();
        let l0 = Labeling::new(vec![1, 1, 0], 1).unwrap();
        let l1 = Labeling::new(vec![0, 1, 1], 1).unwrap();
        let one = |l: &Labeling| Coefficients::from([(l.clone(), Complex64::new(1.0, 0.0))]);
        let ip = bs_inner(&one(&l0), &one(&l0), &norms, Basis::Orthonormal).unwrap();
        assert!((ip - 1.0).norm() < 1e-15);
        let ip = bs_inner(&one(&l0), &one(&l0), &norms, Basis::Raw).unwrap();
        assert!((ip - 2f64.sqrt()).norm() < 1e-12);
        let ip = bs_inner(&one(&l0), &one(&l1), &norms, Basis::Raw).unwrap();
        assert_eq!(ip, Complex64::new(0.0, 0.0));
        let outside = Labeling::new(vec![1, 0, 0], 1).unwrap();
        assert!(bs_inner(&one(&outside), &one(&l0), &norms, Basis::Raw).is_err());
    }

    #[test]
    fn reflection_of_quantum_integers() {
        for k in 1..20 {
            let p = QuantumParams::new(k).unwrap();
            let r = p.order() as i64;
            for j in 0..=r {
                assert!((p.qint(j) - p.qint(r - j)).abs() < 1e-12);
            }
        }
    }
}
