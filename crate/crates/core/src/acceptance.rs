//! The acceptance suite: nine end-to-end checks over the library, each with
//! a tolerance and a wall-clock budget.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abelian_hitchin::{self, ThetaParams};
use crate::character_variety::{self, SumRule};
use crate::kz_connection::{self, KzSystem, SpinLabel};
use crate::linalg::{self, c, CMat, RMat};
use crate::pants_graph::{self, TrivalentGraph};
use crate::quantum_algebra::{self, NormTable, QuantumParams};
use crate::siegel_geometry::{self, SiegelPath, SiegelPoint};
use crate::toeplitz_cp1::{self, SphereFunction};
use crate::volterra_transport::{self, GeneratorFamily};
use crate::Result;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {} ({}): {} [{:.2}s / {}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u32, &str, u64, Check); 9] = [
    (1, "labeling counts", 5, labeling_counts),
    (2, "basis norms", 10, basis_norms),
    (3, "KZ flatness and monodromy", 30, kz_flatness),
    (4, "Siegel identities", 10, siegel_identities),
    (5, "degeneration limit", 5, degeneration),
    (6, "Volterra transport", 60, volterra),
    (7, "character varieties", 30, character_varieties),
    (8, "abelian Hitchin", 10, abelian_hitchin_check),
    (9, "Toeplitz asymptotics", 60, toeplitz_asymptotics),
];

pub fn run_one(id: u32) -> Option<CriterionResult> {
    let &(id, name, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let budget = Duration::from_secs(budget);
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let within = elapsed <= budget;
    let detail = if within { detail } else { format!("{detail}; over the time budget") };
    Some(CriterionResult { id, name, passed: ok && within, detail, elapsed, budget })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_one(c.0)).collect()
}

fn labeling_counts() -> Result<(bool, String)> {
    let mut ok = true;
    let mut counts = Vec::new();
    for k in 1..=8 {
        let theta = pants_graph::enumerate_labelings(&TrivalentGraph::theta(), k).len();
        let dumbbell = pants_graph::enumerate_labelings(&TrivalentGraph::dumbbell(), k).len();
        let oracle = pants_graph::verlinde_number(2, k).round() as usize;
        ok &= theta == dumbbell && theta == oracle;
        counts.push(theta.to_string());
    }
    ok &= counts[0] == "4" && counts[1] == "10";
    Ok((ok, format!("g=2 counts k=1..8: {}", counts.join(" "))))
}

/// Four vertices, every pair joined once.
pub fn complete_graph_k4() -> TrivalentGraph {
    TrivalentGraph::from_slot_pairing(4, &[(0, 3), (1, 6), (2, 9), (4, 7), (5, 10), (8, 11)]).expect("K4 is trivalent")
}

fn basis_norms() -> Result<(bool, String)> {
    let graphs = [
        TrivalentGraph::theta(),
        TrivalentGraph::dumbbell(),
        TrivalentGraph::chain(3)?,
        complete_graph_k4(),
    ];
    let mut min_norm = f64::INFINITY;
    let mut total = 0;
    for g in &graphs {
        for k in 1..=6 {
            let table = NormTable::build(g, &QuantumParams::new(k)?)?;
            total += table.len();
            min_norm = table.entries.values().cloned().fold(min_norm, f64::min);
        }
    }
    let l = pants_graph::Labeling::new(vec![1, 1, 0], 1)?;
    let v = quantum_algebra::norm_squared(&TrivalentGraph::theta(), &l, &QuantumParams::new(1)?)?;
    let err = (v - 2f64.sqrt()).abs();
    Ok((min_norm > 0.0 && err < 1e-10, format!("{total} norms, min {min_norm:.3e}; theta (1,1,0) error {err:.1e}")))
}

fn kz_flatness() -> Result<(bool, String)> {
    let labels = [1, 1, 1, 1].map(SpinLabel::new);
    let steps = 10_000;
    let mut flat: f64 = 0.0;
    let mut reverse: f64 = 0.0;
    let mut mono: f64 = 0.0;
    let mut notes = Vec::new();
    for kappa in [1.0, 0.25] {
        let sys = KzSystem::new(labels, kappa)?;
        let d = sys.dim();
        for center in [c(0.5, 0.5), c(-0.4, -0.6), c(2.0, 0.3)] {
            let t = sys.transport(&kz_connection::circle_path(center, 0.1, 256), steps)?;
            flat = flat.max(kz_connection::scalar_deviation(&t.matrix));
        }
        let path = [c(0.5, 0.5), c(0.3, 1.2), c(-1.5, 0.8), c(-0.5, -0.4)];
        let fwd = sys.transport(&path, steps)?.matrix;
        let back = sys.transport(&kz_connection::reversed(&path), steps)?.matrix;
        reverse = reverse.max(linalg::max_abs_diff(&(back * fwd), &CMat::identity(d, d)));
        let mut worst: f64 = 0.0;
        for p in kz_connection::PUNCTURES {
            worst = worst.max(kz_connection::monodromy_defect(&sys, p, 0.4, steps)?);
        }
        notes.push(format!("kappa={kappa}: {worst:.1e}"));
        mono = mono.max(worst);
    }
    Ok((
        flat < 1e-6 && mono < 1e-5 && reverse < 1e-6,
        format!("scalar deviation {flat:.1e}, monodromy {}, reversal {reverse:.1e}", notes.join(", ")),
    ))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> RMat {
    let a = RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> SiegelPoint {
    let x = random_symmetric(rng, n);
    let a = RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let y = &a * a.transpose() + RMat::identity(n, n) * 0.3;
    SiegelPoint::new(x, y).expect("constructed positive definite")
}

/// Worst violations of the linear-algebra identities over `count` seeded points.
#[derive(Clone, Copy, Debug, Default)]
pub struct SiegelReport {
    pub square: f64,
    pub finite_difference: f64,
    pub inverse: f64,
    pub projections: f64,
    pub metric_min_eig: f64,
    pub transversality_mismatches: usize,
    pub transversality_cases: usize,
}

pub fn siegel_report(seed: u64, count: usize) -> Result<SiegelReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SiegelReport { metric_min_eig: f64::INFINITY, ..Default::default() };
    let h = 1e-5;
    for i in 0..count {
        let n = 1 + i % 5;
        let p = random_point(&mut rng, n);
        let id2 = RMat::identity(2 * n, 2 * n);
        let cs = siegel_geometry::complex_structure(&p);
        r.square = r.square.max(linalg::max_abs_diff_real(&(&cs * &cs), &(-&id2)));
        let g = siegel_geometry::compatible_metric(&p);
        r.square = r.square.max(linalg::symmetry_residual(&g));
        r.metric_min_eig = r.metric_min_eig.min(linalg::symmetric_eigenvalues(&g)[0]);

        let xd = random_symmetric(&mut rng, n);
        let yd = random_symmetric(&mut rng, n);
        let d = siegel_geometry::complex_structure_derivative(&p, &xd, &yd)?;
        let plus = SiegelPoint::new(p.x() + &xd * h, p.y() + &yd * h)?;
        let minus = SiegelPoint::new(p.x() - &xd * h, p.y() - &yd * h)?;
        let fd = (siegel_geometry::complex_structure(&plus) - siegel_geometry::complex_structure(&minus)) / (2.0 * h);
        r.finite_difference = r.finite_difference.max(linalg::max_abs_diff_real(&d, &fd));

        let inv = siegel_geometry::inverse_decomposition(&p)?;
        let prod = linalg::complex_from_parts(&inv.v, &inv.w) * p.z();
        r.inverse = r.inverse.max(linalg::max_abs_diff(&prod, &CMat::identity(n, n)));

        let fp = siegel_geometry::frame_and_projections(&p)?;
        let (pt, pp) = (&fp.pi_t, &fp.pi_prime);
        for residual in [
            linalg::max_abs_diff(&(pt * pt), pt),
            linalg::max_abs_diff(&(pp * pp), pp),
            linalg::max_abs_diff(&(pt * pp), pt),
            linalg::max_abs_diff(&(pp * pt), pp),
        ] {
            r.projections = r.projections.max(residual);
        }

        // Alternate generic, graph-singular and relaxed (Y singular) inputs.
        let (x, y) = match i % 3 {
            0 => (p.x().clone(), p.y().clone()),
            1 => {
                // Z = X + iY with a common real kernel vector of X and Y.
                let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).normalize();
                let proj = RMat::identity(n, n) - &v * v.transpose();
                (&proj * p.x() * &proj, &proj * p.y() * &proj)
            }
            _ => {
                let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).normalize();
                let proj = RMat::identity(n, n) - &v * v.transpose();
                (p.x().clone(), &proj * p.y() * &proj)
            }
        };
        let x = (&x + x.transpose()) * 0.5;
        let y = (&y + y.transpose()) * 0.5;
        let det = siegel_geometry::transversality_relaxed(&x, &y)?;
        let oracle = siegel_geometry::transversality_rank_oracle(&x, &y);
        r.transversality_cases += 1;
        if det != oracle {
            r.transversality_mismatches += 1;
        }
    }
    Ok(r)
}

fn siegel_identities() -> Result<(bool, String)> {
    let r = siegel_report(2024, 200)?;
    let ok = r.square < 1e-9
        && r.metric_min_eig > 0.0
        && r.finite_difference < 1e-6
        && r.inverse < 1e-10
        && r.projections < 1e-10
        && r.transversality_mismatches == 0;
    Ok((
        ok,
        format!(
            "I^2+Id {:.1e}, fd {:.1e}, inverse {:.1e}, projections {:.1e}, transversality {}/{} agree",
            r.square,
            r.finite_difference,
            r.inverse,
            r.projections,
            r.transversality_cases - r.transversality_mismatches,
            r.transversality_cases
        ),
    ))
}

/// The two-dimensional degeneration example, on `t = 10^(1 + m/4)`, `m = 0..=12`.
pub fn degeneration_example() -> Result<(Vec<f64>, Vec<f64>)> {
    let z_inf = CMat::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.2, -0.1), c(0.2, -0.1), c(-0.7, 1.2)]);
    let coeff = CMat::from_row_slice(2, 2, &[c(0.3, 0.1), c(-0.4, 0.2), c(-0.4, 0.2), c(0.5, -0.6)]);
    let path = SiegelPath::power_remainder(z_inf, coeff, 3.0, 1.0)?;
    let grid: Vec<f64> = (0..=12).map(|m| 10f64.powf(1.0 + m as f64 / 4.0)).collect();
    let residuals = siegel_geometry::degeneration_limit(&path, &grid)?;
    Ok((grid, residuals))
}

fn degeneration() -> Result<(bool, String)> {
    let (grid, res) = degeneration_example()?;
    let last = *res.last().unwrap();
    let monotone = res.windows(2).all(|w| w[1] < w[0]);
    let ok = monotone && last < 1e-4 && (grid.last().unwrap() - 1e4).abs() < 1e-9;
    Ok((ok, format!("residual at t=1e4 {last:.2e}, monotone {monotone}")))
}

/// A seeded family with `P_inf = B B^† + i S` and `delta(t) = C t^-2`.
pub fn random_family(rng: &mut ChaCha8Rng, d: usize) -> Result<GeneratorFamily> {
    let g = |rng: &mut ChaCha8Rng| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let b = CMat::from_fn(d, d, |_, _| g(rng)) * c(0.6, 0.0);
    let s = CMat::from_fn(d, d, |_, _| g(rng));
    let s = linalg::hermitian_part(&s) * c(0.0, 0.5);
    let p = &b * b.adjoint() + s;
    let coeff = CMat::from_fn(d, d, |_, _| g(rng)) * c(0.5, 0.0);
    GeneratorFamily::power(p, coeff, -2.0, 1.0)
}

fn volterra() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let (t0, t) = (1.0, 3.0);
    let mut agree: f64 = 0.0;
    let mut bound_ok = true;
    for i in 0..50 {
        let fam = random_family(&mut rng, 1 + i % 6)?;
        let series = volterra_transport::dyson_transport(&fam, t0, t, 1e-10)?;
        let ode = volterra_transport::ode_transport_to(&fam, t0, t, 1e-10)?;
        agree = agree.max(linalg::max_abs_diff(&series, &ode.matrix));
        bound_ok &= volterra_transport::bound_check(&fam, t0, &[1.0, 1.5, 2.0, 3.0, 5.0])?.into_iter().all(|b| b);
    }
    let scalar = GeneratorFamily::power(CMat::identity(1, 1), CMat::identity(1, 1), -2.0, 1.0)?;
    let mut scalar_err: f64 = 0.0;
    for (a, b) in [(1.0, 2.0), (1.0, 6.0), (2.0, 4.5)] {
        let e = volterra_transport::dyson_transport(&scalar, a, b, 1e-12)?;
        scalar_err = scalar_err.max((e[(0, 0)].re - (-(b - a) - (1.0 / a - 1.0 / b)).exp()).abs());
    }
    bound_ok &= volterra_transport::bound_check(&scalar, 1.0, &[1.0, 2.0, 10.0, 100.0])?.into_iter().all(|b| b);
    let p = CMat::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
    let off = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let lim = volterra_transport::limit_transport(&GeneratorFamily::power(p, off, -2.0, 1.0)?, 1.0, 1e-5)?;
    let ok = agree < 1e-6 && scalar_err < 1e-8 && bound_ok && lim.kernel_residual < 1e-4;
    Ok((
        ok,
        format!(
            "series vs RK4 {agree:.1e}, scalar {scalar_err:.1e}, bound holds {bound_ok}, kernel residual {:.1e}",
            lim.kernel_residual
        ),
    ))
}

fn character_varieties() -> Result<(bool, String)> {
    let r = character_variety::sample_residuals(7, 100_000);
    let mut inside = true;
    for g in [TrivalentGraph::theta(), TrivalentGraph::dumbbell()] {
        for k in 1..=6 {
            for l in pants_graph::enumerate_labelings(&g, k) {
                inside &= character_variety::bs_domain_membership(&g, &character_variety::rescaled_labeling(&g, &l), SumRule::Symmetric)?;
            }
        }
    }
    let ok = r.max_sphere4 < 1e-10 && r.max_torus < 1e-12 && inside;
    Ok((
        ok,
        format!("sphere residual {:.1e}, torus residual {:.1e}, labelings in domain {inside}", r.max_sphere4, r.max_torus),
    ))
}

fn abelian_hitchin_check() -> Result<(bool, String)> {
    let zs = abelian_hitchin::z_grid(16);
    let taus: Vec<Complex64> = (0..5)
        .flat_map(|i| (0..5).map(move |j| c(-0.5 + 0.25 * i as f64, 0.5 + 0.375 * j as f64)))
        .collect();
    let mut heat: f64 = 0.0;
    for k in 1..=5 {
        for &tau in &taus {
            let p = ThetaParams::auto(k, tau)?;
            for j in 0..k {
                for &z in &zs {
                    heat = heat.max(abelian_hitchin::heat_residual(j, &p, z)?);
                }
            }
        }
    }
    let mut evolve: f64 = 0.0;
    let pairs = [(1, c(0.0, 1.0), c(0.0, 2.0)), (2, c(0.1, 1.0), c(-0.3, 1.5)), (3, c(0.25, 0.5), c(-0.5, 2.0)), (5, c(0.0, 2.0), c(0.4, 0.6))];
    for (k, t0, t1) in pairs {
        for j in 0..k {
            evolve = evolve.max(abelian_hitchin::heat_evolve_check(j, k, t0, t1, &zs)?);
        }
    }
    Ok((heat < 1e-9 && evolve < 1e-10, format!("heat residual {heat:.1e}, evolution {evolve:.1e}")))
}

pub const TOEPLITZ_LEVELS: [u32; 5] = [4, 8, 16, 32, 64];

fn toeplitz_asymptotics() -> Result<(bool, String)> {
    let mut diag: f64 = 0.0;
    for k in TOEPLITZ_LEVELS {
        let t = toeplitz_cp1::toeplitz(&SphereFunction::Height, k)?;
        for a in 0..=k as usize {
            let expected = (k as f64 - 2.0 * a as f64) / (k as f64 + 2.0);
            diag = diag.max((t[(a, a)] - c(expected, 0.0)).norm());
        }
    }
    let h = SphereFunction::Height;
    let defects = toeplitz_cp1::multiplicativity_decay(&h, &h, &TOEPLITZ_LEVELS)?;
    let slope = toeplitz_cp1::decay_slope(&TOEPLITZ_LEVELS, &defects);
    let ok = diag < 1e-9 && (-1.3..=-0.7).contains(&slope);
    Ok((ok, format!("diagonal error {diag:.1e}, slope {slope:.3}")))
}
