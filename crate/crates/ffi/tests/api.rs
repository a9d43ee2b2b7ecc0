use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hitchin_lab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let mut len = 0;
    assert_eq!(unsafe { hl_last_error_message(buf.as_mut_ptr(), buf.len(), &mut len) }, HlStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string()
}

fn graph(source: &str) -> *mut HlGraph {
    let s = CString::new(source).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hl_graph_new(s.as_ptr(), &mut g) }, HlStatus::Ok);
    g
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(hl_version()) };
    assert_eq!(v.to_str().unwrap(), hitchin_lab::VERSION);
}

#[test]
fn labelings_and_norms() {
    let g = graph("theta");
    let mut genus = 0;
    assert_eq!(unsafe { hl_graph_genus(g, &mut genus) }, HlStatus::Ok);
    assert_eq!(genus, 2);
    let mut len = 0;
    // Size query with an empty buffer.
    assert_eq!(unsafe { hl_labelings(g, 1, ptr::null_mut(), 0, &mut len) }, HlStatus::BufferTooSmall);
    assert_eq!(len, 12);
    assert!(last_error().contains("12"));
    let mut buf = vec![0u32; len];
    assert_eq!(unsafe { hl_labelings(g, 1, buf.as_mut_ptr(), buf.len(), &mut len) }, HlStatus::Ok);
    assert_eq!(buf, [0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 0]);
    let mut norms = [0.0; 4];
    assert_eq!(unsafe { hl_norms(g, 1, norms.as_mut_ptr(), 4, &mut len) }, HlStatus::Ok);
    assert!(norms.iter().all(|n| (n - 2f64.sqrt()).abs() < 1e-12));
    unsafe { hl_graph_free(g) };
}

#[test]
fn graph_errors() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hl_graph_new(ptr::null(), &mut g) }, HlStatus::NullPointer);
    assert!(last_error().contains("source"));
    let s = CString::new("chain:1").unwrap();
    assert_eq!(unsafe { hl_graph_new(s.as_ptr(), &mut g) }, HlStatus::InvalidInput);
    assert!(g.is_null());
    let json = CString::new(hitchin_lab::pants_graph::TrivalentGraph::dumbbell().to_json()).unwrap();
    assert_eq!(unsafe { hl_graph_new(json.as_ptr(), &mut g) }, HlStatus::Ok);
    let mut edges = 0;
    assert_eq!(unsafe { hl_graph_edge_count(g, &mut edges) }, HlStatus::Ok);
    assert_eq!(edges, 3);
    unsafe { hl_graph_free(g) };
    unsafe { hl_graph_free(ptr::null_mut()) };
    let mut v = 0.0;
    assert_eq!(unsafe { hl_verlinde_number(3, 2, &mut v) }, HlStatus::Ok);
    assert!((v - 36.0).abs() < 1e-9);
    assert_eq!(unsafe { hl_verlinde_number(1, 2, &mut v) }, HlStatus::InvalidInput);
}

#[test]
fn kz_loop_and_step_budget() {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { hl_kz_new([1u32, 1, 1, 1].as_ptr(), 1.0, &mut sys) }, HlStatus::Ok);
    let mut dim = 0;
    assert_eq!(unsafe { hl_kz_dim(sys, &mut dim) }, HlStatus::Ok);
    assert_eq!(dim, 2);
    let path = [0.5, 0.5, 0.7, 0.5, 0.7, 0.3, 0.5, 0.5];
    let mut m = [0.0; 8];
    let (mut len, mut defect) = (0, 0.0);
    let st = unsafe { hl_kz_transport(sys, path.as_ptr(), 4, 400, m.as_mut_ptr(), 8, &mut len, &mut defect) };
    assert_eq!(st, HlStatus::Ok);
    // A loop around no puncture has trivial monodromy.
    for (i, x) in m.iter().enumerate() {
        let want = if i == 0 || i == 6 { 1.0 } else { 0.0 };
        assert!((x - want).abs() < 1e-8, "{m:?}");
    }
    assert!(defect < 1e-8);
    let st = unsafe { hl_kz_transport(sys, path.as_ptr(), 4, 10, m.as_mut_ptr(), 8, &mut len, &mut defect) };
    assert_eq!(st, HlStatus::Numerical);
    unsafe { hl_kz_free(sys) };
}

#[test]
fn siegel_and_dyson() {
    let (x, y) = ([0.3, 0.1, 0.1, -0.2], [2.0, 0.5, 0.5, 1.0]);
    let mut i = [0.0; 16];
    assert_eq!(unsafe { hl_siegel_complex_structure(2, x.as_ptr(), y.as_ptr(), i.as_mut_ptr()) }, HlStatus::Ok);
    for r in 0..4 {
        for s in 0..4 {
            let sq: f64 = (0..4).map(|t| i[4 * r + t] * i[4 * t + s]).sum();
            assert!((sq + if r == s { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let bad_y = [1.0, 0.0, 0.0, -1.0];
    assert_eq!(unsafe { hl_siegel_complex_structure(2, x.as_ptr(), bad_y.as_ptr(), i.as_mut_ptr()) }, HlStatus::InvalidInput);
    let (mut gt, mut tc) = (false, false);
    let zero = [0.0; 4];
    assert_eq!(unsafe { hl_siegel_transversality(2, x.as_ptr(), zero.as_ptr(), &mut gt, &mut tc) }, HlStatus::Ok);
    assert!(!tc);

    // Scalar family: E(t) = exp(-(t - t0) - C (1/t0 - 1/t)) for alpha = -2.
    let p = [1.0, 0.0];
    let coeff = [0.5, 0.0];
    let mut e = [0.0; 2];
    assert_eq!(unsafe { hl_dyson_power(1, p.as_ptr(), coeff.as_ptr(), -2.0, 1.0, 1.0, 3.0, 1e-12, e.as_mut_ptr()) }, HlStatus::Ok);
    let want = (-(2.0f64) - 0.5 * (1.0 - 1.0 / 3.0)).exp();
    assert!((e[0] - want).abs() < 1e-10 && e[1].abs() < 1e-14);
}

#[test]
fn samples_theta_toeplitz() {
    let (mut s, mut t) = (1.0, 1.0);
    assert_eq!(unsafe { hl_charvar_sample(5, 2000, &mut s, &mut t) }, HlStatus::Ok);
    assert!(s < 1e-12 && t < 1e-12);
    let mut member = true;
    assert_eq!(unsafe { hl_torus_fiber_membership(3.0, 0.0, 0.0, 0.0, &mut member) }, HlStatus::InvalidInput);

    let mut v = [0.0; 2];
    let mut r = 1.0;
    assert_eq!(unsafe { hl_theta(0, 1, 0.0, 1.0, 0.0, 0.0, v.as_mut_ptr(), &mut r) }, HlStatus::Ok);
    assert!((v[0] - 1.086_434_811_213_308).abs() < 1e-13 && r < 1e-12);
    assert_eq!(unsafe { hl_theta(0, 1, 0.0, -1.0, 0.0, 0.0, v.as_mut_ptr(), &mut r) }, HlStatus::InvalidInput);

    let name = CString::new("height").unwrap();
    let mut len = 0;
    let mut buf = vec![0.0; 2 * 9];
    assert_eq!(unsafe { hl_toeplitz(name.as_ptr(), 2, buf.as_mut_ptr(), buf.len(), &mut len) }, HlStatus::Ok);
    assert_eq!(len, 18);
    let tr: f64 = (0..3).map(|i| buf[2 * (4 * i)]).sum();
    assert!(tr.abs() < 1e-12);
    let unknown = CString::new("nope").unwrap();
    assert_eq!(unsafe { hl_toeplitz(unknown.as_ptr(), 2, buf.as_mut_ptr(), buf.len(), &mut len) }, HlStatus::InvalidInput);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/hitchin_lab.h");
    let src = include_str!("../src/lib.rs");
    for line in src.lines().filter(|l| l.contains("extern \"C\" fn ")) {
        let name = line.split("fn ").nth(1).unwrap().split('(').next().unwrap();
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libhitchin_lab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/smoke.c"))
        .arg(format!("-I{}", concat!(env!("CARGO_MANIFEST_DIR"), "/include")))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "theta k=1: 4 labelings\n");
}
