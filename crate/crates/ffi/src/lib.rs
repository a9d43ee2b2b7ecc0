//! C ABI over `hitchin-lab`.
//!
//! Every function returns an [`HlStatus`]. Results are written through out
//! pointers; on failure a message is kept per thread and can be read with
//! [`hl_last_error_message`]. Objects are opaque handles released by the
//! matching `_free` function. Complex arrays are interleaved `re, im` pairs
//! and matrices are row-major.

use std::any::Any;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hitchin_lab::abelian_hitchin::{self, ThetaParams};
use hitchin_lab::character_variety;
use hitchin_lab::kz_connection::{KzSystem, SpinLabel};
use hitchin_lab::linalg::{c, CMat, RMat};
use hitchin_lab::pants_graph::{self, TrivalentGraph};
use hitchin_lab::quantum_algebra::{NormTable, QuantumParams};
use hitchin_lab::siegel_geometry::{self, SiegelPoint};
use hitchin_lab::toeplitz_cp1::{self, SphereFunction};
use hitchin_lab::volterra_transport::{self, GeneratorFamily};
use hitchin_lab::{acceptance, cli, Error};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    Panic = 4,
    BufferTooSmall = 5,
}

/// A trivalent pants graph.
pub struct HlGraph(TrivalentGraph);

/// A KZ system on invariant tensors of four irreps.
pub struct HlKzSystem(KzSystem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Core(Error),
    Buffer { needed: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult = Result<(), Failure>;

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn panic_message(p: &(dyn Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn guard(f: impl FnOnce() -> FfiResult) -> HlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            HlStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            let status = if e.is_numerical() { HlStatus::Numerical } else { HlStatus::InvalidInput };
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Buffer { needed })) => {
            set_error(format!("buffer too small: {needed} elements needed"));
            HlStatus::BufferTooSmall
        }
        Err(p) => {
            set_error(format!("panic: {}", panic_message(p.as_ref())));
            HlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, v: T) -> FfiResult {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(v);
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::Invalid(format!("{name} is not UTF-8")).into())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `data` into `buf` after reporting its length through `len_out`.
unsafe fn fill<T: Copy>(data: &[T], buf: *mut T, cap: usize, len_out: *mut usize) -> FfiResult {
    write(len_out, "len_out", data.len())?;
    if data.len() > cap {
        return Err(Failure::Buffer { needed: data.len() });
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

fn interleave(m: &CMat) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)].re);
            v.push(m[(i, j)].im);
        }
    }
    v
}

unsafe fn complex_square(p: *const f64, n: usize, name: &'static str) -> Result<CMat, Failure> {
    let s = slice(p, 2 * n * n, name)?;
    Ok(CMat::from_fn(n, n, |i, j| c(s[2 * (i * n + j)], s[2 * (i * n + j) + 1])))
}

unsafe fn real_square(p: *const f64, n: usize, name: &'static str) -> Result<RMat, Failure> {
    Ok(RMat::from_row_slice(n, n, slice(p, n * n, name)?))
}

/// Null-terminated version string with static lifetime.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error on this thread into `buf` (null-terminated).
/// `len_out` receives the message length without the terminator; it is 0
/// when the previous call succeeded.
///
/// # Safety
/// `buf` must hold `cap` bytes; `len_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_last_error_message(buf: *mut c_char, cap: usize, len_out: *mut usize) -> HlStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone()).unwrap_or_default();
    let bytes = msg.as_bytes_with_nul();
    if len_out.is_null() {
        return HlStatus::NullPointer;
    }
    len_out.write(bytes.len() - 1);
    if bytes.len() > cap {
        return HlStatus::BufferTooSmall;
    }
    if buf.is_null() {
        return HlStatus::NullPointer;
    }
    std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
    HlStatus::Ok
}

/// Builds a graph from a file path, JSON text, or a preset name
/// (`theta`, `dumbbell`, `chain:<genus>`).
///
/// # Safety
/// `source` must be a null-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_new(source: *const c_char, out: *mut *mut HlGraph) -> HlStatus {
    guard(|| {
        let source = read_str(source, "source")?;
        let g = if source.trim_start().starts_with('{') { TrivalentGraph::from_json(source)? } else { cli::load_graph(source)? };
        write(out, "out", Box::into_raw(Box::new(HlGraph(g))))
    })
}

/// # Safety
/// `graph` must come from [`hl_graph_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_free(graph: *mut HlGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_genus(graph: *const HlGraph, out: *mut usize) -> HlStatus {
    guard(|| write(out, "out", deref(graph, "graph")?.0.genus()))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_graph_edge_count(graph: *const HlGraph, out: *mut usize) -> HlStatus {
    guard(|| write(out, "out", deref(graph, "graph")?.0.edges().len()))
}

/// Admissible labelings, one row of edge labels per labeling. `len_out`
/// receives the number of `u32` entries (rows times edge count).
///
/// # Safety
/// `buf` must hold `cap` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_labelings(
    graph: *const HlGraph,
    level: u32,
    buf: *mut u32,
    cap: usize,
    len_out: *mut usize,
) -> HlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let flat: Vec<u32> = pants_graph::enumerate_labelings(g, level).into_iter().flat_map(|l| l.values).collect();
        fill(&flat, buf, cap, len_out)
    })
}

/// Norms of the labeled basis vectors, in the order of [`hl_labelings`].
///
/// # Safety
/// `buf` must hold `cap` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_norms(
    graph: *const HlGraph,
    level: u32,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> HlStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.0;
        let table = NormTable::build(g, &QuantumParams::new(level)?)?;
        let v: Vec<f64> = table.entries.values().copied().collect();
        fill(&v, buf, cap, len_out)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_verlinde_number(genus: u32, level: u32, out: *mut f64) -> HlStatus {
    guard(|| {
        if genus < 2 {
            return Err(Error::OutOfRange(format!("genus {genus} is below 2")).into());
        }
        write(out, "out", pants_graph::verlinde_number(genus, level))
    })
}

/// # Safety
/// `labels` must point to four values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_kz_new(labels: *const u32, coupling: f64, out: *mut *mut HlKzSystem) -> HlStatus {
    guard(|| {
        let l = slice(labels, 4, "labels")?;
        let sys = KzSystem::new([0, 1, 2, 3].map(|i| SpinLabel::new(l[i])), coupling)?;
        write(out, "out", Box::into_raw(Box::new(HlKzSystem(sys))))
    })
}

/// # Safety
/// `sys` must come from [`hl_kz_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hl_kz_free(sys: *mut HlKzSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Dimension of the invariant subspace.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_kz_dim(sys: *const HlKzSystem, out: *mut usize) -> HlStatus {
    guard(|| write(out, "out", deref(sys, "sys")?.0.dim()))
}

/// Transport along the polyline through `n_points` complex points. The
/// matrix is written as `dim * dim` interleaved complex entries.
///
/// # Safety
/// `path` must hold `2 * n_points` values, `buf` `cap` values.
#[no_mangle]
pub unsafe extern "C" fn hl_kz_transport(
    sys: *const HlKzSystem,
    path: *const f64,
    n_points: usize,
    steps: usize,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
    halving_defect: *mut f64,
) -> HlStatus {
    guard(|| {
        let sys = &deref(sys, "sys")?.0;
        let p = slice(path, 2 * n_points, "path")?;
        let pts: Vec<Complex64> = p.chunks(2).map(|z| c(z[0], z[1])).collect();
        let t = sys.transport(&pts, steps)?;
        write(halving_defect, "halving_defect", t.halving_defect)?;
        fill(&interleave(&t.matrix), buf, cap, len_out)
    })
}

/// Complex structure `I` of `Z = X + iY` as a real `2n x 2n` matrix.
///
/// # Safety
/// `x`, `y` must hold `n * n` values, `out` `4 * n * n`.
#[no_mangle]
pub unsafe extern "C" fn hl_siegel_complex_structure(n: usize, x: *const f64, y: *const f64, out: *mut f64) -> HlStatus {
    guard(|| {
        let p = SiegelPoint::new(real_square(x, n, "x")?, real_square(y, n, "y")?)?;
        let i = siegel_geometry::complex_structure(&p);
        let mut len = 0;
        let data: Vec<f64> = (0..2 * n).flat_map(|r| (0..2 * n).map(move |s| (r, s))).map(|(r, s)| i[(r, s)]).collect();
        fill(&data, out, 4 * n * n, &mut len)
    })
}

/// Whether the graph of `X + iY` is transverse and whether it is totally
/// complex, for symmetric `X`, `Y` with `Y` possibly degenerate.
///
/// # Safety
/// `x`, `y` must hold `n * n` values; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_siegel_transversality(
    n: usize,
    x: *const f64,
    y: *const f64,
    graph_transverse: *mut bool,
    totally_complex: *mut bool,
) -> HlStatus {
    guard(|| {
        let t = siegel_geometry::transversality_relaxed(&real_square(x, n, "x")?, &real_square(y, n, "y")?)?;
        write(graph_transverse, "graph_transverse", t.graph_transverse)?;
        write(totally_complex, "totally_complex", t.totally_complex)
    })
}

/// Transport `E(t)` of `E' = -(P + C s^alpha) E`, `E(t0) = Id`, as `n * n`
/// interleaved complex entries.
///
/// # Safety
/// `p_inf`, `coeff` must hold `2 * n * n` values, `out` the same.
#[no_mangle]
pub unsafe extern "C" fn hl_dyson_power(
    n: usize,
    p_inf: *const f64,
    coeff: *const f64,
    alpha: f64,
    t_min: f64,
    t0: f64,
    t: f64,
    tol: f64,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        let fam = GeneratorFamily::power(complex_square(p_inf, n, "p_inf")?, complex_square(coeff, n, "coeff")?, alpha, t_min)?;
        let e = volterra_transport::dyson_transport(&fam, t0, t, tol)?;
        let mut len = 0;
        fill(&interleave(&e), out, 2 * n * n, &mut len)
    })
}

/// Largest residuals of the four-holed sphere and one-holed torus trace
/// identities over `draws` seeded Haar samples.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_charvar_sample(seed: u64, draws: usize, max_sphere4: *mut f64, max_torus: *mut f64) -> HlStatus {
    guard(|| {
        let r = character_variety::sample_residuals(seed, draws);
        write(max_sphere4, "max_sphere4", r.max_sphere4)?;
        write(max_torus, "max_torus", r.max_torus)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_torus_fiber_membership(x: f64, y: f64, z: f64, c0: f64, out: *mut bool) -> HlStatus {
    guard(|| write(out, "out", character_variety::torus_fiber_membership(x, y, z, c0)?))
}

/// `theta_j(z, tau)` at level `k` and its heat-equation residual.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_theta(
    j: u32,
    k: u32,
    tau_re: f64,
    tau_im: f64,
    z_re: f64,
    z_im: f64,
    value: *mut f64,
    heat_residual: *mut f64,
) -> HlStatus {
    guard(|| {
        let p = ThetaParams::auto(k, c(tau_re, tau_im))?;
        let z = c(z_re, z_im);
        let v = abelian_hitchin::theta_value(j, &p, z)?;
        let r = abelian_hitchin::heat_residual(j, &p, z)?;
        let mut len = 0;
        fill(&[v.re, v.im], value, 2, &mut len)?;
        write(heat_residual, "heat_residual", r)
    })
}

/// Toeplitz matrix of a registry function at level `k`, as `(k+1)^2`
/// interleaved complex entries.
///
/// # Safety
/// `name` must be null-terminated; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn hl_toeplitz(
    name: *const c_char,
    k: u32,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> HlStatus {
    guard(|| {
        let f = SphereFunction::from_name(read_str(name, "name")?)?;
        fill(&interleave(&toeplitz_cp1::toeplitz(&f, k)?), buf, cap, len_out)
    })
}

/// Runs the acceptance suite; `passed` receives the number of passing
/// criteria and `total` their count.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_accept(passed: *mut u32, total: *mut u32) -> HlStatus {
    guard(|| {
        let r = acceptance::run_all();
        write(passed, "passed", r.iter().filter(|x| x.passed).count() as u32)?;
        write(total, "total", r.len() as u32)
    })
}
