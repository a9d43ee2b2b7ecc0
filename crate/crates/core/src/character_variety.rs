//! SU(2) trace coordinates on character varieties of the four-holed sphere
//! and the one-holed torus, and the rescaled label domain of a pants graph.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::linalg::c;
use crate::pants_graph::{Labeling, TrivalentGraph};
use crate::{Error, Result};

/// A 2×2 matrix `[[a, b], [-b̄, ā]]` with `|a|² + |b|² = 1`, stored in full.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SU2Element {
    m: [[Complex64; 2]; 2],
}

const UNITARY_TOL: f64 = 1e-12;

impl SU2Element {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = SU2Element { m };
        let prod = u.adjoint().mul(&u);
        let dev = (prod.m[0][0] - 1.0).norm() + prod.m[0][1].norm() + prod.m[1][0].norm() + (prod.m[1][1] - 1.0).norm();
        if dev >= UNITARY_TOL {
            return Err(Error::Domain(format!("matrix is not unitary (residual {dev:e})")));
        }
        if (u.det() - 1.0).norm() >= UNITARY_TOL {
            return Err(Error::Domain(format!("determinant {} is not 1", u.det())));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        SU2Element { m: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]] }
    }

    /// `q0 + q1 i + q2 j + q3 k` for a unit quaternion.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let a = c(q[0], q[1]);
        let b = c(q[2], q[3]);
        SU2Element { m: [[a, b], [-b.conj(), a.conj()]] }
    }

    /// Rotation by `angle` about the unit axis `n`: `cos(a/2) - i sin(a/2) n·sigma`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, co) = (0.5 * angle).sin_cos();
        let n = axis.map(|x| x / norm);
        Self::from_quaternion([co, -s * n[2], -s * n[1], -s * n[0]])
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        let mut m = [[c(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SU2Element { m }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        SU2Element { m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]] }
    }

    /// For unitary matrices the inverse is the adjoint.
    pub fn inverse(&self) -> Self {
        self.adjoint()
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1]).re
    }

    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.mul(self).mul(&g.inverse())
    }
}

/// Haar-distributed element from a normalised Gaussian quaternion.
pub fn haar_su2<R: rand::Rng + ?Sized>(rng: &mut R) -> SU2Element {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return SU2Element::from_quaternion(q.map(|x| x / n));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourHoleTraces {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourHoleTraces {
    pub fn new(v: [f64; 7]) -> Result<Self> {
        if let Some(bad) = v.iter().find(|t| !(t.abs() <= 2.0)) {
            return Err(Error::OutOfRange(format!("trace {bad} is outside [-2, 2]")));
        }
        Ok(FourHoleTraces { a: v[0], b: v[1], c: v[2], d: v[3], x: v[4], y: v[5], z: v[6] })
    }

    /// Traces of `A, B, C, D = (ABC)^-1, AB, BC, AC`.
    pub fn from_holonomy(a: &SU2Element, b: &SU2Element, cc: &SU2Element) -> Self {
        let d = a.mul(b).mul(cc).inverse();
        let clamp = |t: f64| t.clamp(-2.0, 2.0);
        FourHoleTraces {
            a: clamp(a.trace()),
            b: clamp(b.trace()),
            c: clamp(cc.trace()),
            d: clamp(d.trace()),
            x: clamp(a.mul(b).trace()),
            y: clamp(b.mul(cc).trace()),
            z: clamp(a.mul(cc).trace()),
        }
    }
}

pub fn sphere4_residual(t: &FourHoleTraces) -> f64 {
    let FourHoleTraces { a, b, c, d, x, y, z } = *t;
    (x * x + y * y + z * z + x * y * z - (a * b + c * d) * x - (a * d + b * c) * y - (a * c + b * d) * z
        + (a * a + b * b + c * c + d * d + a * b * c * d - 4.0))
        .abs()
}

pub fn torus_residual(a: &SU2Element, b: &SU2Element) -> Result<f64> {
    let a = SU2Element::new(a.m)?;
    let b = SU2Element::new(b.m)?;
    let comm = a.mul(&b).mul(&a.inverse()).mul(&b.inverse());
    let (ta, tb, tab) = (a.trace(), b.trace(), a.mul(&b).trace());
    Ok((comm.trace() - ta * ta - tb * tb - tab * tab + ta * tb * tab + 2.0).abs())
}

pub fn torus_fiber_membership(x: f64, y: f64, z: f64, c0: f64) -> Result<bool> {
    if let Some(bad) = [x, y, z].into_iter().find(|t| !(t.abs() <= 2.0)) {
        return Err(Error::OutOfRange(format!("coordinate {bad} is outside [-2, 2]")));
    }
    Ok((x * x + y * y + z * z - x * y * z - 2.0 - c0).abs() < 1e-9)
}

/// Sum condition on a vertex triple of the label domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SumRule {
    /// `z1 + z2 + z3 <= 2`.
    #[default]
    Symmetric,
    /// `z2 + z3 <= 2` for the triple in slot order.
    Printed,
}

pub fn triple_in_domain(z: [f64; 3], rule: SumRule) -> bool {
    let eps = 1e-12;
    let [z1, z2, z3] = z;
    let triangle = (z1 - z2).abs() <= z3 + eps && z3 <= z1 + z2 + eps;
    let sum = match rule {
        SumRule::Symmetric => z1 + z2 + z3 <= 2.0 + eps,
        SumRule::Printed => z2 + z3 <= 2.0 + eps,
    };
    triangle && sum
}

/// Whether the edge coordinates `z` lie in the label domain of the graph.
pub fn bs_domain_membership(graph: &TrivalentGraph, z: &BTreeMap<String, f64>, rule: SumRule) -> Result<bool> {
    let mut values = Vec::with_capacity(graph.edges().len());
    for e in graph.edges() {
        let v = *z.get(&e.id).ok_or_else(|| Error::Invalid(format!("no coordinate for edge {}", e.id)))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!("coordinate {v} of edge {} is outside [0, 1]", e.id)));
        }
        values.push(v);
    }
    if z.len() != values.len() {
        return Err(Error::Invalid("coordinates given for unknown edges".into()));
    }
    Ok((0..graph.vertices().len()).all(|v| {
        let [e1, e2, e3] = graph.vertex_edges(v);
        triple_in_domain([values[e1], values[e2], values[e3]], rule)
    }))
}

/// `l / k` keyed by edge id.
pub fn rescaled_labeling(graph: &TrivalentGraph, labeling: &Labeling) -> BTreeMap<String, f64> {
    let k = labeling.level.max(1) as f64;
    graph.edges().iter().zip(&labeling.values).map(|(e, &l)| (e.id.clone(), l as f64 / k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleReport {
    pub seed: u64,
    pub draws: usize,
    pub max_sphere4: f64,
    pub max_torus: f64,
}

const CHUNK: usize = 4096;

/// Seeded Haar sampling; every 4096-draw chunk has its own stream, so the
/// result does not depend on the thread count.
pub fn sample_residuals(seed: u64, draws: usize) -> SampleReport {
    let chunks = draws.div_ceil(CHUNK);
    let (s4, tor) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let n = CHUNK.min(draws - chunk * CHUNK);
            let mut best = (0.0f64, 0.0f64);
            for _ in 0..n {
                let (a, b, cc) = (haar_su2(&mut rng), haar_su2(&mut rng), haar_su2(&mut rng));
                best.0 = best.0.max(sphere4_residual(&FourHoleTraces::from_holonomy(&a, &b, &cc)));
                let (p, q) = (haar_su2(&mut rng), haar_su2(&mut rng));
                best.1 = best.1.max(torus_residual(&p, &q).expect("Haar samples are in SU(2)"));
            }
            best
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    SampleReport { seed, draws, max_sphere4: s4, max_torus: tor }
}
