//! Command-line front end of the `hitchin-lab` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::abelian_hitchin::{self, ThetaParams};
use crate::acceptance;
use crate::character_variety::{self, SumRule};
use crate::io::{self, fmt_f64, Csv};
use crate::kz_connection::{KzSystem, SpinLabel};
use crate::linalg::{self, c, CMat, RMat};
use crate::pants_graph::{self, TrivalentGraph};
use crate::quantum_algebra::{NormTable, QuantumParams};
use crate::siegel_geometry::{self, SiegelPoint};
use crate::toeplitz_cp1::{self, SphereFunction};
use crate::volterra_transport;
use crate::{Error, Result};

pub const THREADS_ENV: &str = "HITCHIN_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hitchin-lab", version, about = "Numerical checks for SU(2) quantum Chern-Simons theory")]
pub struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph JSON file, or one of `theta`, `dumbbell`, `chain:<genus>`.
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub level: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissible labelings of a pants graph.
    Labelings(GraphArgs),
    /// Norms of the labeled basis vectors.
    Norms(GraphArgs),
    /// Labeling counts of the chain graph against the Verlinde formula.
    Verlinde {
        /// Genus range `a..=b` or a single genus.
        #[arg(long, default_value = "2..=3")]
        genus: String,
        /// Level range `a..=b` or a single level.
        #[arg(long, default_value = "0..=8")]
        levels: String,
    },
    /// Parallel transport of the KZ connection along a polyline.
    KzTransport {
        /// Four highest weights, e.g. `1,1,1,1`.
        #[arg(long, default_value = "1,1,1,1")]
        labels: String,
        /// JSON list of `[re, im]` points; the first is the base point.
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Largest accepted step-halving defect.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Residuals of the Siegel-space identities.
    SiegelCheck {
        /// JSON `{"X": ..., "Y": ...}`; random points are used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dyson-series transport of a generator family.
    Dyson {
        /// JSON family `{"P_infinity": ..., "delta": {"type": "power", "C": ..., "alpha": ...}}`.
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        /// Comma-separated end times.
        #[arg(long, default_value = "2,4,8")]
        times: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Seeded Haar sampling of the trace identities.
    CharvarSample {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
    /// Heat-equation residuals of level-k theta functions.
    ThetaHeat {
        #[arg(long)]
        level: u32,
        /// Points `re:im`, comma separated; a 5x5 grid by default.
        #[arg(long)]
        taus: Option<String>,
        #[arg(long, default_value_t = 16)]
        z_samples: usize,
    },
    /// Multiplicativity defects of Toeplitz operators on the sphere.
    Toeplitz {
        /// Registry name (`one`, `zero`, `height`, `x1`, `x2`, `z`, `zbar`, `mode:<m>`) or JSON file.
        #[arg(long, default_value = "height")]
        f: String,
        #[arg(long, default_value = "height")]
        g: String,
        #[arg(long, default_value = "4,8,16,32,64")]
        levels: String,
    },
    /// Membership of edge coordinates in the rescaled label domain.
    BsDomain {
        #[arg(long)]
        graph: String,
        /// `edge=value` pairs, comma separated.
        #[arg(long)]
        z: String,
        /// Use the sum bound on the last two slots only.
        #[arg(long)]
        printed_rule: bool,
    },
    /// Membership of a point in a one-holed torus fiber.
    TorusFiber {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, allow_hyphen_values = true)]
        c0: f64,
    },
    /// Runs the acceptance suite.
    Accept {
        /// Only this criterion.
        #[arg(long)]
        only: Option<u32>,
    },
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn load_graph(source: &str) -> Result<TrivalentGraph> {
    let path = Path::new(source);
    if path.exists() {
        return TrivalentGraph::from_json(&io::read_text(path)?);
    }
    match source {
        "theta" => Ok(TrivalentGraph::theta()),
        "dumbbell" => Ok(TrivalentGraph::dumbbell()),
        _ => match source.strip_prefix("chain:").map(str::parse::<usize>) {
            Some(Ok(g)) => TrivalentGraph::chain(g),
            _ => Err(Error::Invalid(format!("{source:?} is neither a graph file nor a preset"))),
        },
    }
}

fn parse_range(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Invalid(format!("{s:?} is not a range `a..=b` or a list"));
    if let Some((a, b)) = s.split_once("..=") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("{p:?} is not a number"))))
        .collect()
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|p| {
            let (re, im) = p.split_once(':').ok_or_else(|| Error::Invalid(format!("{p:?} is not `re:im`")))?;
            let re = re.trim().parse().map_err(|_| Error::Invalid(format!("{p:?} is not `re:im`")))?;
            let im = im.trim().parse().map_err(|_| Error::Invalid(format!("{p:?} is not `re:im`")))?;
            Ok(c(re, im))
        })
        .collect()
}

fn load_function(source: &str) -> Result<SphereFunction> {
    let path = Path::new(source);
    if path.exists() {
        SphereFunction::from_json(&io::read_text(path)?)
    } else {
        SphereFunction::from_name(source)
    }
}

fn edge_header(graph: &TrivalentGraph) -> Vec<&str> {
    graph.edge_ids()
}

pub fn run(cli: &Cli) -> Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Labelings(a) => {
            let g = load_graph(&a.graph)?;
            let mut csv = Csv::new(&edge_header(&g));
            for l in pants_graph::enumerate_labelings(&g, a.level) {
                csv.row(&l.values);
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::Norms(a) => {
            let g = load_graph(&a.graph)?;
            let table = NormTable::build(&g, &QuantumParams::new(a.level)?)?;
            let mut cols = edge_header(&g);
            cols.push("norm");
            let mut csv = Csv::new(&cols);
            for (l, v) in &table.entries {
                csv.row(l.values.iter().map(|x| x.to_string()).chain([fmt_f64(*v)]));
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::Verlinde { genus, levels } => {
            let mut csv = Csv::new(&["genus", "level", "labelings", "verlinde", "agree"]);
            for g in parse_range(genus)? {
                let graph = TrivalentGraph::chain(g as usize)?;
                for k in parse_range(levels)? {
                    let count = pants_graph::enumerate_labelings(&graph, k).len();
                    let v = pants_graph::verlinde_number(g, k).round() as usize;
                    csv.row([g.to_string(), k.to_string(), count.to_string(), v.to_string(), (v == count).to_string()]);
                }
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::KzTransport { labels, path, steps, kappa, tol } => {
            let ls = parse_range(labels)?;
            let ls: [u32; 4] = ls
                .try_into()
                .map_err(|_| Error::Invalid(format!("{labels:?} must list four highest weights")))?;
            let points = io::path_from_json(&io::read_text(path)?)?;
            let sys = KzSystem::new(ls.map(SpinLabel::new), *kappa)?;
            let t = sys.transport(&points, *steps)?;
            if !(t.halving_defect <= *tol) {
                return Err(Error::Tolerance(format!(
                    "step-halving defect {:e} exceeds {tol:e}; increase --steps",
                    t.halving_defect
                )));
            }
            let body = json!({
                "labels": ls,
                "kappa": kappa,
                "steps": steps,
                "dim": sys.dim(),
                "matrix": io::matrix_to_json(&t.matrix),
                "halving_defect": t.halving_defect,
            });
            io::emit(out, &io::json_artifact(body))?;
        }
        Command::SiegelCheck { input, count, seed } => {
            let mut csv = Csv::new(&["check", "value"]);
            match input {
                Some(p) => {
                    let (x, y) = io::siegel_input_from_json(&io::read_text(p)?)?;
                    let t = siegel_geometry::transversality_relaxed(&x, &y)?;
                    let oracle = siegel_geometry::transversality_rank_oracle(&x, &y);
                    csv.row(["graph_transverse".to_string(), t.graph_transverse.to_string()]);
                    csv.row(["totally_complex".to_string(), t.totally_complex.to_string()]);
                    csv.row(["rank_oracle_agrees".to_string(), (t == oracle).to_string()]);
                    if let Ok(point) = SiegelPoint::new(x, y) {
                        for (name, v) in single_point_residuals(&point)? {
                            csv.row([name.to_string(), fmt_f64(v)]);
                        }
                    }
                }
                None => {
                    let r = acceptance::siegel_report(*seed, *count)?;
                    for (name, v) in [
                        ("square_plus_identity", r.square),
                        ("finite_difference", r.finite_difference),
                        ("inverse", r.inverse),
                        ("projections", r.projections),
                        ("metric_min_eigenvalue", r.metric_min_eig),
                    ] {
                        csv.row([name.to_string(), fmt_f64(v)]);
                    }
                    csv.row(["transversality_mismatches".to_string(), r.transversality_mismatches.to_string()]);
                }
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::Dyson { family, t0, times, tol } => {
            let fam = io::family_from_json(&io::read_text(family)?)?;
            let mut csv = Csv::new(&["t", "row", "col", "re", "im", "norm", "bound_holds"]);
            let ts = parse_floats(times)?;
            let bounds = volterra_transport::bound_check(&fam, *t0, &ts)?;
            for (t, ok) in ts.iter().zip(bounds) {
                let e = volterra_transport::dyson_transport(&fam, *t0, *t, *tol)?;
                let norm = linalg::spectral_norm(&e);
                for i in 0..e.nrows() {
                    for j in 0..e.ncols() {
                        csv.row([fmt_f64(*t), i.to_string(), j.to_string(), fmt_f64(e[(i, j)].re), fmt_f64(e[(i, j)].im), fmt_f64(norm), ok.to_string()]);
                    }
                }
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::CharvarSample { seed, draws } => {
            let r = character_variety::sample_residuals(*seed, *draws);
            let mut csv = Csv::new(&["seed", "draws", "max_sphere4_residual", "max_torus_residual"]);
            csv.row([r.seed.to_string(), r.draws.to_string(), fmt_f64(r.max_sphere4), fmt_f64(r.max_torus)]);
            io::emit(out, &csv.into_string())?;
        }
        Command::ThetaHeat { level, taus, z_samples } => {
            let taus = match taus {
                Some(s) => parse_complex_list(s)?,
                None => (0..5)
                    .flat_map(|i| (0..5).map(move |j| c(-0.5 + 0.25 * i as f64, 0.5 + 0.375 * j as f64)))
                    .collect(),
            };
            let zs = abelian_hitchin::z_grid(*z_samples);
            let mut csv = Csv::new(&["k", "tau_re", "tau_im", "max_residual"]);
            for tau in taus {
                let p = ThetaParams::auto(*level, tau)?;
                let mut worst: f64 = 0.0;
                for j in 0..*level {
                    for &z in &zs {
                        worst = worst.max(abelian_hitchin::heat_residual(j, &p, z)?);
                    }
                }
                csv.row([level.to_string(), fmt_f64(tau.re), fmt_f64(tau.im), fmt_f64(worst)]);
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::Toeplitz { f, g, levels } => {
            let (f, g) = (load_function(f)?, load_function(g)?);
            let ks = parse_range(levels)?;
            let defects = toeplitz_cp1::multiplicativity_decay(&f, &g, &ks)?;
            let mut csv = Csv::new(&["k", "defect"]);
            for (k, d) in ks.iter().zip(&defects) {
                csv.row([k.to_string(), fmt_f64(*d)]);
            }
            io::emit(out, &csv.into_string())?;
        }
        Command::BsDomain { graph, z, printed_rule } => {
            let g = load_graph(graph)?;
            let mut coords = BTreeMap::new();
            for part in z.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Invalid(format!("{part:?} is not `edge=value`")))?;
                let v: f64 = v.trim().parse().map_err(|_| Error::Invalid(format!("{v:?} is not a number")))?;
                coords.insert(k.trim().to_string(), v);
            }
            let rule = if *printed_rule { SumRule::Printed } else { SumRule::Symmetric };
            let member = character_variety::bs_domain_membership(&g, &coords, rule)?;
            let mut csv = Csv::new(&["member"]);
            csv.row([member]);
            io::emit(out, &csv.into_string())?;
        }
        Command::TorusFiber { x, y, z, c0 } => {
            let member = character_variety::torus_fiber_membership(*x, *y, *z, *c0)?;
            let mut csv = Csv::new(&["member"]);
            csv.row([member]);
            io::emit(out, &csv.into_string())?;
        }
        Command::Accept { only } => {
            let results = match only {
                Some(id) => vec![acceptance::run_one(*id).ok_or_else(|| Error::OutOfRange(format!("no criterion {id}")))?],
                None => acceptance::run_all(),
            };
            let mut text = crate::artifact_header();
            text.push('\n');
            for r in &results {
                text.push_str(&r.line());
                text.push('\n');
            }
            io::emit(out, &text)?;
            if results.iter().any(|r| !r.passed) {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

fn single_point_residuals(p: &SiegelPoint) -> Result<Vec<(&'static str, f64)>> {
    let n = p.n();
    let i = siegel_geometry::complex_structure(p);
    let square = linalg::max_abs_diff_real(&(&i * &i), &(-RMat::identity(2 * n, 2 * n)));
    let g = siegel_geometry::compatible_metric(p);
    let inv = siegel_geometry::inverse_decomposition(p)?;
    let inverse = linalg::max_abs_diff(&(linalg::complex_from_parts(&inv.v, &inv.w) * p.z()), &CMat::identity(n, n));
    let fp = siegel_geometry::frame_and_projections(p)?;
    let idem = linalg::max_abs_diff(&(&fp.pi_t * &fp.pi_t), &fp.pi_t);
    Ok(vec![
        ("square_plus_identity", square),
        ("metric_min_eigenvalue", linalg::symmetric_eigenvalues(&g)[0]),
        ("inverse", inverse),
        ("projections", idem),
    ])
}
