//! C interface to the simulator.
//!
//! Graphs, environments and trajectories are opaque handles returned
//! through out-parameters and released with the matching `*_free`. Every fallible call returns an
//! [`MmabStatus`]; on failure, [`mmab_last_error`] describes the cause for
//! the calling thread.
//!
//! # Safety
//!
//! Handle arguments must be null or pointers previously returned by this
//! library and not yet freed. Output pointers must be null or valid for a
//! write, buffers must hold `len` elements, and strings must be
//! NUL-terminated.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;

use mmab::analysis::{self, ScalingPoint};
use mmab::cli::config::SpecCall;
use mmab::cli::factory::{resolve_policy, InstanceKind};
use mmab::env::Environment;
use mmab::graph::{self, Graph, TemporalGraphModel};
use mmab::rng::{derive_run_seed, SimRng};
use mmab::sim::{self, Trajectory};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConstraintViolated = 3,
    SimulationFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub struct MmabGraph(Graph);
pub struct MmabEnv(Environment);
pub struct MmabTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: impl std::fmt::Display) {
    LAST_ERROR.with(|e| {
        let mut bytes = msg.to_string().into_bytes();
        bytes.retain(|&b| b != 0);
        *e.borrow_mut() = bytes;
    });
}

fn fail(status: MmabStatus, msg: impl std::fmt::Display) -> MmabStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> MmabStatus) -> MmabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MmabStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, MmabStatus> {
    if p.is_null() {
        return Err(fail(MmabStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MmabStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn put<T>(out: *mut T, value: T) -> MmabStatus {
    if out.is_null() {
        return fail(MmabStatus::NullPointer, "null output pointer");
    }
    out.write(value);
    MmabStatus::Ok
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> MmabStatus {
    put(out, Box::into_raw(Box::new(value)))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> MmabStatus {
    if out.is_null() {
        return fail(MmabStatus::NullPointer, "null output buffer");
    }
    if len < src.len() {
        return fail(MmabStatus::BufferTooSmall, format!("buffer holds {len} values, need {}", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    MmabStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! handle {
    ($p:expr) => {
        match $p.as_ref() {
            Some(h) => &h.0,
            None => return fail(MmabStatus::NullPointer, "null handle"),
        }
    };
}

/// Copies the calling thread's last error message, NUL-terminated, into
/// `buf` and returns the full message length excluding the terminator.
/// Pass a null `buf` to query the length.
#[no_mangle]
pub unsafe extern "C" fn mmab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

fn graph_result(r: Result<Graph, graph::GraphError>, out: *mut *mut MmabGraph) -> MmabStatus {
    match r {
        Ok(g) => unsafe { put_handle(out, MmabGraph(g)) },
        Err(e) => fail(MmabStatus::InvalidArgument, e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_complete(nodes: usize, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| graph_result(graph::make_complete_graph(nodes), out))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_path(nodes: usize, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| graph_result(graph::make_path_graph(nodes), out))
}

/// Nodes `0..q` form one clique, the rest another.
#[no_mangle]
pub unsafe extern "C" fn mmab_graph_disconnected_clique(m: usize, q: usize, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| graph_result(graph::make_disconnected_clique_graph(m, q), out))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_two_expander(m: usize, eta: f64, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| graph_result(graph::make_two_expander_graph(m, eta).map(|x| x.graph), out))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_erdos_renyi(nodes: usize, c: f64, seed: u64, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| graph_result(graph::sample_er_graph(nodes, c, &mut SimRng::seed_from_u64(seed)), out))
}

/// Parses the 1-indexed edge-list text format.
#[no_mangle]
pub unsafe extern "C" fn mmab_graph_from_edge_list(text: *const c_char, out: *mut *mut MmabGraph) -> MmabStatus {
    guard(|| {
        let s = try_status!(self::text(text));
        graph_result(Graph::from_edge_list(s), out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_free(g: *mut MmabGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_node_count(g: *const MmabGraph, out: *mut usize) -> MmabStatus {
    guard(|| put(out, handle!(g).node_count()))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_has_edge(g: *const MmabGraph, i: usize, j: usize, out: *mut bool) -> MmabStatus {
    guard(|| {
        let g = handle!(g);
        if i >= g.node_count() || j >= g.node_count() {
            return fail(MmabStatus::InvalidArgument, format!("node out of range for {} nodes", g.node_count()));
        }
        put(out, g.has_edge(i, j))
    })
}

#[no_mangle]
pub unsafe extern "C" fn mmab_graph_is_connected(g: *const MmabGraph, out: *mut bool) -> MmabStatus {
    guard(|| put(out, graph::is_connected(handle!(g))))
}

/// Writes the row-major `n x n` Metropolis weight matrix.
#[no_mangle]
pub unsafe extern "C" fn mmab_graph_metropolis_weights(g: *const MmabGraph, out: *mut f64, len: usize) -> MmabStatus {
    guard(|| {
        let w = graph::metropolis_weights(handle!(g));
        let n = w.node_count();
        let flat: Vec<f64> = (0..n).flat_map(|i| w.row(i).to_vec()).collect();
        copy_out(&flat, out, len)
    })
}

/// Builds an environment from an instance spec such as `thm4(8, 1, 0.4)`.
/// `horizon` is used by horizon-dependent instances; `run_seed` drives any
/// latent draws. Violated instance constraints return
/// `ConstraintViolated`.
#[no_mangle]
pub unsafe extern "C" fn mmab_env_from_spec(
    spec: *const c_char,
    horizon: u64,
    run_seed: u64,
    out: *mut *mut MmabEnv,
) -> MmabStatus {
    guard(|| {
        let s = try_status!(text(spec));
        let kind = match SpecCall::parse(s).and_then(|call| InstanceKind::resolve(&call)) {
            Ok(k) => k,
            Err(e) => return fail(MmabStatus::InvalidArgument, e),
        };
        match kind.environment(horizon, run_seed) {
            Ok(e) => put_handle(out, MmabEnv(e)),
            Err(e) => fail(MmabStatus::ConstraintViolated, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mmab_env_free(e: *mut MmabEnv) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mmab_env_client_count(e: *const MmabEnv, out: *mut usize) -> MmabStatus {
    guard(|| put(out, handle!(e).client_count()))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_env_arm_count(e: *const MmabEnv, out: *mut usize) -> MmabStatus {
    guard(|| put(out, handle!(e).arm_count()))
}

/// Writes global means and gaps (`arms` values each) and the 0-based
/// optimal arm.
#[no_mangle]
pub unsafe extern "C" fn mmab_env_global_stats(
    e: *const MmabEnv,
    means: *mut f64,
    gaps: *mut f64,
    arms: usize,
    optimal_arm: *mut usize,
) -> MmabStatus {
    guard(|| {
        let st = handle!(e).global_stats();
        for (src, dst) in [(&st.global_means, means), (&st.gaps, gaps)] {
            let s = copy_out(src, dst, arms);
            if s != MmabStatus::Ok {
                return s;
            }
        }
        put(optimal_arm, st.optimal_arm)
    })
}

/// Simulates `horizon` steps on a static graph. `policy` is a spec such as
/// `gossip_ucb(C=2)`, `exp3_gossip` or `fixed(1)` (1-based arm).
#[no_mangle]
pub unsafe extern "C" fn mmab_run(
    env: *const MmabEnv,
    graph: *const MmabGraph,
    policy: *const c_char,
    horizon: u64,
    run_seed: u64,
    out: *mut *mut MmabTrajectory,
) -> MmabStatus {
    guard(|| {
        let env = handle!(env);
        let g = handle!(graph);
        let spec = try_status!(text(policy));
        let policy = match SpecCall::parse(spec).and_then(|c| resolve_policy(&c)) {
            Ok(p) => p,
            Err(e) => return fail(MmabStatus::InvalidArgument, e),
        };
        match sim::run(env, &TemporalGraphModel::Static(g.clone()), &policy, horizon, run_seed) {
            Ok(t) => put_handle(out, MmabTrajectory(t)),
            Err(e) => fail(MmabStatus::SimulationFailed, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn mmab_trajectory_free(t: *mut MmabTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mmab_trajectory_final_regret(t: *const MmabTrajectory, out: *mut f64) -> MmabStatus {
    guard(|| put(out, handle!(t).final_regret()))
}

/// Writes the cumulative pseudo-regret after each of the `horizon` steps.
#[no_mangle]
pub unsafe extern "C" fn mmab_trajectory_regret_curve(t: *const MmabTrajectory, out: *mut f64, len: usize) -> MmabStatus {
    guard(|| copy_out(&handle!(t).regret_curve, out, len))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_trajectory_disagreement_steps(t: *const MmabTrajectory, out: *mut u64) -> MmabStatus {
    guard(|| put(out, handle!(t).t_disagree))
}

/// Writes pull counts, row-major by client then arm.
#[no_mangle]
pub unsafe extern "C" fn mmab_trajectory_pull_counts(t: *const MmabTrajectory, out: *mut u64, len: usize) -> MmabStatus {
    guard(|| {
        let counts = &handle!(t).pull_counts;
        if out.is_null() {
            return fail(MmabStatus::NullPointer, "null output buffer");
        }
        if len < counts.len() {
            return fail(MmabStatus::BufferTooSmall, format!("buffer holds {len} values, need {}", counts.len()));
        }
        ptr::copy_nonoverlapping(counts.as_ptr(), out, counts.len());
        MmabStatus::Ok
    })
}

fn number(r: Result<f64, analysis::AnalysisError>, out: *mut f64) -> MmabStatus {
    match r {
        Ok(v) => unsafe { put(out, v) },
        Err(e) => fail(MmabStatus::InvalidArgument, e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn mmab_kl_bernoulli(p: f64, q: f64, out: *mut f64) -> MmabStatus {
    guard(|| number(analysis::kl_bernoulli(p, q), out))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_per_step_kl(eps: f64, out: *mut f64) -> MmabStatus {
    guard(|| number(analysis::per_step_kl(eps), out))
}

#[no_mangle]
pub unsafe extern "C" fn mmab_exact_tv(eps: f64, d: u32, out: *mut f64) -> MmabStatus {
    guard(|| number(analysis::exact_tv_small_epoch(eps, d), out))
}

/// Least-squares fit of `log R = alpha log T + b` over horizons of at least
/// 1024 with positive mean regret.
#[no_mangle]
pub unsafe extern "C" fn mmab_fit_scaling_exponent(
    horizons: *const u64,
    means: *const f64,
    n: usize,
    alpha: *mut f64,
    prefactor: *mut f64,
    r2: *mut f64,
) -> MmabStatus {
    guard(|| {
        if horizons.is_null() || means.is_null() {
            return fail(MmabStatus::NullPointer, "null input buffer");
        }
        let (hs, ms) = (std::slice::from_raw_parts(horizons, n), std::slice::from_raw_parts(means, n));
        let points: Vec<ScalingPoint> = hs
            .iter()
            .zip(ms)
            .map(|(&horizon, &mean)| ScalingPoint {
                horizon,
                mean,
                stderr: 0.0,
            })
            .collect();
        match analysis::fit_scaling_exponent(&points) {
            Ok(f) => {
                for (dst, v) in [(alpha, f.alpha), (prefactor, f.prefactor), (r2, f.r2)] {
                    let s = put(dst, v);
                    if s != MmabStatus::Ok {
                        return s;
                    }
                }
                MmabStatus::Ok
            }
            Err(e) => fail(MmabStatus::InvalidArgument, e),
        }
    })
}

#[no_mangle]
pub extern "C" fn mmab_derive_run_seed(master: u64, horizon_index: u64, seed: u64) -> u64 {
    derive_run_seed(master, horizon_index, seed)
}
