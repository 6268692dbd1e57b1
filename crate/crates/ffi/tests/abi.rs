use std::ffi::{c_char, CString};
use std::process::Command;
use std::ptr;

use mmab_ffi::*;

fn last_error() -> String {
    unsafe {
        let n = mmab_last_error(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; n + 1];
        mmab_last_error(buf.as_mut_ptr(), buf.len());
        let bytes: Vec<u8> = buf[..n].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }
}

#[test]
fn graph_handles() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(mmab_graph_disconnected_clique(4, 1, &mut g), MmabStatus::Ok);
        let mut n = 0;
        assert_eq!(mmab_graph_node_count(g, &mut n), MmabStatus::Ok);
        assert_eq!(n, 4);
        let (mut e01, mut e12, mut conn) = (true, false, true);
        mmab_graph_has_edge(g, 0, 1, &mut e01);
        mmab_graph_has_edge(g, 1, 2, &mut e12);
        mmab_graph_is_connected(g, &mut conn);
        assert!(!e01 && e12 && !conn);
        let mut w = [0.0; 16];
        assert_eq!(mmab_graph_metropolis_weights(g, w.as_mut_ptr(), 16), MmabStatus::Ok);
        assert_eq!(w[0], 1.0);
        for i in 0..4 {
            assert!((w[i * 4..i * 4 + 4].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(mmab_graph_metropolis_weights(g, w.as_mut_ptr(), 15), MmabStatus::BufferTooSmall);
        assert_eq!(mmab_graph_has_edge(g, 0, 9, &mut e01), MmabStatus::InvalidArgument);
        mmab_graph_free(g);
    }
}

#[test]
fn edge_list_parsing() {
    unsafe {
        let text = CString::new("3\n1 2\n2 3\n").unwrap();
        let mut g = ptr::null_mut();
        let status = mmab_graph_from_edge_list(text.as_ptr(), &mut g);
        assert_eq!(status, MmabStatus::Ok, "{}", last_error());
        let mut conn = false;
        mmab_graph_is_connected(g, &mut conn);
        assert!(conn);
        mmab_graph_free(g);
        assert_eq!(mmab_graph_from_edge_list(ptr::null(), &mut g), MmabStatus::NullPointer);
    }
}

#[test]
fn environment_stats_and_constraints() {
    unsafe {
        let spec = CString::new("thm4(8, 1, 0.4)").unwrap();
        let mut env = ptr::null_mut();
        assert_eq!(mmab_env_from_spec(spec.as_ptr(), 100, 0, &mut env), MmabStatus::Ok);
        let (mut means, mut gaps, mut best) = ([0.0; 2], [0.0; 2], 9);
        assert_eq!(
            mmab_env_global_stats(env, means.as_mut_ptr(), gaps.as_mut_ptr(), 2, &mut best),
            MmabStatus::Ok
        );
        assert_eq!(best, 0);
        assert!((gaps[1] - 5.0 * 0.4 / 8.0).abs() < 1e-12);
        mmab_env_free(env);

        let bad = CString::new("thm8(M=4, T=512, eta=4)").unwrap();
        assert_eq!(mmab_env_from_spec(bad.as_ptr(), 512, 0, &mut env), MmabStatus::ConstraintViolated);
        assert!(last_error().contains("ε ≤ 1/4"), "{}", last_error());
        let unknown = CString::new("thm9(4)").unwrap();
        assert_eq!(mmab_env_from_spec(unknown.as_ptr(), 10, 0, &mut env), MmabStatus::InvalidArgument);
    }
}

#[test]
fn run_and_read_trajectory() {
    unsafe {
        let spec = CString::new("thm4(8, 1, 0.4)").unwrap();
        let policy = CString::new("fixed(2)").unwrap();
        let (mut env, mut g, mut traj) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        mmab_env_from_spec(spec.as_ptr(), 1000, 0, &mut env);
        mmab_graph_complete(8, &mut g);
        assert_eq!(mmab_run(env, g, policy.as_ptr(), 1000, 7, &mut traj), MmabStatus::Ok, "{}", last_error());
        let mut r = 0.0;
        mmab_trajectory_final_regret(traj, &mut r);
        assert!((r - 250.0).abs() < 1e-9);
        let mut curve = vec![0.0; 1000];
        assert_eq!(mmab_trajectory_regret_curve(traj, curve.as_mut_ptr(), 1000), MmabStatus::Ok);
        assert!((curve[0] - 0.25).abs() < 1e-12);
        let mut counts = [0u64; 16];
        mmab_trajectory_pull_counts(traj, counts.as_mut_ptr(), 16);
        assert!(counts.chunks(2).all(|c| c == [0, 1000]));
        let mut td = 1;
        mmab_trajectory_disagreement_steps(traj, &mut td);
        assert_eq!(td, 0);
        mmab_trajectory_free(traj);

        let unknown = CString::new("softmax").unwrap();
        assert_eq!(mmab_run(env, g, unknown.as_ptr(), 10, 0, &mut traj), MmabStatus::InvalidArgument);
        let mut small = ptr::null_mut();
        mmab_graph_complete(3, &mut small);
        assert_eq!(mmab_run(env, small, policy.as_ptr(), 10, 0, &mut traj), MmabStatus::SimulationFailed);
        mmab_graph_free(small);
        mmab_graph_free(g);
        mmab_env_free(env);
    }
}

#[test]
fn analysis_functions() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(mmab_per_step_kl(0.125, &mut v), MmabStatus::Ok);
        let direct = 0.5 * (0.5f64 / 0.625).ln() + 0.5 * (0.5f64 / 0.375).ln();
        assert!((v - direct).abs() < 1e-15);
        assert_eq!(mmab_exact_tv(0.125, 2, &mut v), MmabStatus::Ok);
        assert!((v - 0.140625).abs() < 1e-15);
        assert_eq!(mmab_kl_bernoulli(1.5, 0.5, &mut v), MmabStatus::InvalidArgument);

        let hs = [1024u64, 2048, 4096, 8192];
        let ms: Vec<f64> = hs.iter().map(|&t| 3.0 * (t as f64).powf(0.5)).collect();
        let (mut a, mut p, mut r2) = (0.0, 0.0, 0.0);
        assert_eq!(
            mmab_fit_scaling_exponent(hs.as_ptr(), ms.as_ptr(), 4, &mut a, &mut p, &mut r2),
            MmabStatus::Ok
        );
        assert!((a - 0.5).abs() < 1e-12 && (p - 3.0).abs() < 1e-9 && (r2 - 1.0).abs() < 1e-12);
        assert_eq!(mmab_derive_run_seed(1, 2, 3), mmab::rng::derive_run_seed(1, 2, 3));
    }
}

#[test]
fn null_handles_are_reported() {
    unsafe {
        let mut n = 0;
        assert_eq!(mmab_graph_node_count(ptr::null(), &mut n), MmabStatus::NullPointer);
        assert_eq!(mmab_env_arm_count(ptr::null(), &mut n), MmabStatus::NullPointer);
        mmab_graph_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mmab.h")).unwrap();
    for name in [
        "mmab_last_error",
        "mmab_graph_complete",
        "mmab_env_from_spec",
        "mmab_run",
        "mmab_trajectory_regret_curve",
        "mmab_fit_scaling_exponent",
        "MMAB_STATUS_CONSTRAINT_VIOLATED",
        "typedef struct MmabGraph MmabGraph",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let Ok(out) = Command::new(&cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mmab.h"))
        .output()
    else {
        eprintln!("no C compiler found, skipping header compile check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(|d| d.parent()).unwrap().join("libmmab_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping link check", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let Ok(out) = Command::new(&cc)
        .args(["-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("no C compiler found, skipping link check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("regret 250.000000"), "{text}");
    assert!(text.contains("ε ≤ 1/4"), "{text}");
}
