use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use l1pca_ffi::*;

unsafe fn matrix(data: &[f64], rows: usize, cols: usize) -> *mut L1pcaMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(l1pca_matrix_new(data.as_ptr(), rows, cols, &mut m), L1pcaStatus::Ok);
    m
}

unsafe fn last_error() -> String {
    CStr::from_ptr(l1pca_last_error_message()).to_string_lossy().into_owned()
}

#[test]
fn solve_one_dimensional() {
    unsafe {
        let m = matrix(&[1.0, -2.0, 3.0], 1, 3);
        let mut r = ptr::null_mut();
        assert_eq!(l1pca_solve(m, ptr::null(), &mut r), L1pcaStatus::Ok);
        let mut info = L1pcaResultInfo::default();
        assert_eq!(l1pca_result_info(r, &mut info), L1pcaStatus::Ok);
        assert_eq!((info.dim, info.samples, info.k), (1, 3, 1));
        assert!((info.l1_metric - 6.0).abs() < 1e-12);
        assert!(info.converged);
        let mut signs = [0i8; 3];
        assert_eq!(l1pca_result_signs(r, signs.as_mut_ptr(), 3), L1pcaStatus::Ok);
        assert_eq!(signs, [1, -1, 1]);
        l1pca_result_free(r);
        l1pca_matrix_free(m);
    }
}

#[test]
fn every_solver_through_the_abi() {
    let data = [1.0, 0.3, -2.0, 0.5, 1.5, -0.7, 0.2, 2.0, 1.1, -1.3, 0.4, 0.9];
    for solver in [
        L1pcaSolverKind::L1bf,
        L1pcaSolverKind::FixedPoint,
        L1pcaSolverKind::AltOpt,
        L1pcaSolverKind::Oracle,
    ] {
        unsafe {
            let m = matrix(&data, 3, 4);
            let cfg = L1pcaConfig {
                solver,
                k: 2,
                restarts: 3,
                ..l1pca_config_default()
            };
            let mut r = ptr::null_mut();
            assert_eq!(l1pca_solve(m, &cfg, &mut r), L1pcaStatus::Ok, "{solver:?}");
            let mut q = [0.0; 6];
            assert_eq!(l1pca_result_basis(r, q.as_mut_ptr(), 5), L1pcaStatus::BufferTooSmall);
            assert!(last_error().contains("needs 6"));
            assert_eq!(l1pca_result_basis(r, q.as_mut_ptr(), 6), L1pcaStatus::Ok);
            // columns of the row-major 3 x 2 basis are orthonormal
            let dot = |a: usize, b: usize| (0..3).map(|i| q[i * 2 + a] * q[i * 2 + b]).sum::<f64>();
            assert!((dot(0, 0) - 1.0).abs() < 1e-10 && (dot(1, 1) - 1.0).abs() < 1e-10);
            assert!(dot(0, 1).abs() < 1e-10);
            l1pca_result_free(r);
            l1pca_matrix_free(m);
        }
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(l1pca_matrix_new(ptr::null(), 1, 1, &mut m), L1pcaStatus::NullPointer);
        let bad = [1.0, f64::NAN];
        assert_eq!(l1pca_matrix_new(bad.as_ptr(), 1, 2, &mut m), L1pcaStatus::InvalidInput);
        assert!(!last_error().is_empty());

        let m = matrix(&[1.0, 0.0, 0.0, 1.0], 2, 2);
        let mut rank = 0;
        assert_eq!(l1pca_matrix_rank(m, &mut rank), L1pcaStatus::Ok);
        assert_eq!(rank, 2);
        let cfg = L1pcaConfig {
            k: 3,
            ..l1pca_config_default()
        };
        let mut r = ptr::null_mut();
        assert_eq!(l1pca_solve(m, &cfg, &mut r), L1pcaStatus::Precondition);
        assert!(r.is_null());
        assert!(last_error().contains("K = 3"));
        l1pca_matrix_free(m);
        l1pca_matrix_free(ptr::null_mut());
        l1pca_result_free(ptr::null_mut());
    }
}

#[test]
fn nuclear_norm_of_buffer() {
    let mut v = 0.0;
    let data = [3.0, 0.0, 0.0, -4.0];
    unsafe {
        assert_eq!(l1pca_nuclear_norm(data.as_ptr(), 2, 2, &mut v), L1pcaStatus::Ok);
    }
    assert!((v - 7.0).abs() < 1e-12);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/l1pca.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "L1PCA_H",
        "typedef struct L1pcaMatrix L1pcaMatrix;",
        "L1PCA_STATUS_BUFFER_TOO_SMALL = 6",
        "l1pca_solve(",
        "l1pca_last_error_message(",
        "l1pca_result_basis(",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"]).arg(header()).output() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "l1pca.h"

int main(void) {
    const double x[6] = {1.0, 0.0, 2.0, 0.0, 1.0, -1.0};
    L1pcaMatrix *m = NULL;
    L1pcaResult *r = NULL;
    L1pcaResultInfo info;
    L1pcaConfig cfg = l1pca_config_default();
    cfg.solver = L1PCA_SOLVER_KIND_ORACLE;
    if (l1pca_matrix_new(x, 2, 3, &m) != L1PCA_STATUS_OK) return 1;
    if (l1pca_solve(m, &cfg, &r) != L1PCA_STATUS_OK) return 2;
    if (l1pca_result_info(r, &info) != L1PCA_STATUS_OK) return 3;
    printf("%.9f %zu\n", info.l1_metric, info.samples);
    cfg.k = 5;
    L1pcaResult *bad = NULL;
    if (l1pca_solve(m, &cfg, &bad) != L1PCA_STATUS_PRECONDITION) return 4;
    l1pca_result_free(r);
    l1pca_matrix_free(m);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    // test binaries link the rlib only, so build the shared library now
    let built = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "-p", "l1pca-ffi", "--lib", "--profile", "test"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .unwrap();
    assert!(built.success());
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap().to_path_buf();
    if !lib_dir.join("libl1pca_ffi.so").exists() {
        eprintln!("no shared library in {}, skipping", lib_dir.display());
        return;
    }
    let work = tempfile_dir();
    let src = work.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = work.join("main");
    let include = header().parent().unwrap().to_path_buf();
    let Ok(out) = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-ll1pca_ffi")
        .arg("-o")
        .arg(&bin)
        .output()
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    // optimum over {+-1}^3 of |X^T q|_1 for X = [[1,0,2],[0,1,-1]]
    let text = String::from_utf8_lossy(&run.stdout);
    let mut parts = text.split_whitespace();
    let metric: f64 = parts.next().unwrap().parse().unwrap();
    assert_eq!(parts.next(), Some("3"));
    let expected = [[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]];
    let best = (0..8)
        .map(|code: u32| {
            let b: Vec<f64> = (0..3).map(|i| if (code >> i) & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let xb: Vec<f64> = expected.iter().map(|row| row.iter().zip(&b).map(|(a, s)| a * s).sum()).collect();
            xb.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    assert!((metric - best).abs() < 1e-8, "{metric} vs {best}");
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("l1pca-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
