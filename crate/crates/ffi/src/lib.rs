//! C interface to `v2v-offload`.
//!
//! Every function returns a [`VecStatus`]; on anything but `VEC_STATUS_OK` the
//! message is available from [`vec_last_error_message`] on the same thread.
//! Scenarios are opaque handles created by [`vec_scenario_from_toml`] and
//! released with [`vec_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use v2v_offload::comms::{direct_rate, tran_delay, ChannelParams};
use v2v_offload::cost::{CostTimeMatrix, Problem};
use v2v_offload::error::SolveError;
use v2v_offload::harness::{run_world, FilterMode, World};
use v2v_offload::solvers::{solve, SolverKind, SolverOptions};
use v2v_offload::ScenarioConfig;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ConfigError = 4,
    Infeasible = 5,
    Internal = 6,
}

/// A built scenario: fleet, tasks, trace and departures.
pub struct VecScenario {
    world: World,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VecMetrics {
    pub makespan: f64,
    pub planned_makespan: f64,
    pub avg_subtask_delay: f64,
    pub reoffload_count: u64,
    pub failed_tasks: u64,
    pub infeasible: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecChannel {
    /// Hz.
    pub bandwidth: f64,
    /// Watts.
    pub tx_power: f64,
    pub channel_gain: f64,
    /// Watts.
    pub noise_power: f64,
}

impl From<VecChannel> for ChannelParams {
    fn from(c: VecChannel) -> Self {
        ChannelParams {
            bandwidth: c.bandwidth,
            tx_power: c.tx_power,
            channel_gain: c.channel_gain,
            noise_power: c.noise_power,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(VecStatus, String);

fn fail<T>(status: VecStatus, msg: impl ToString) -> Result<T, Failure> {
    Err(Failure(status, msg.to_string()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            VecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            VecStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(VecStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(VecStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse_solver(s: &str) -> Result<SolverKind, Failure> {
    s.parse().or_else(|e: SolveError| fail(VecStatus::InvalidArgument, e))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn vec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a TOML scenario and builds it. `*out` receives a handle to free
/// with `vec_scenario_free`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vec_scenario_from_toml(toml: *const c_char, out: *mut *mut VecScenario) -> VecStatus {
    guard(|| {
        if out.is_null() {
            return fail(VecStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let text = read_str(toml, "toml")?;
        let cfg = ScenarioConfig::from_toml_str(text).or_else(|e| fail(VecStatus::ConfigError, e))?;
        let world = World::build(&cfg).or_else(|e| fail(VecStatus::ConfigError, e))?;
        *out = Box::into_raw(Box::new(VecScenario { world }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from `vec_scenario_from_toml` and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn vec_scenario_free(scenario: *mut VecScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Vehicle and subtask counts of a scenario.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn vec_scenario_counts(
    scenario: *const VecScenario,
    vehicles: *mut usize,
    subtasks: *mut usize,
) -> VecStatus {
    guard(|| {
        if scenario.is_null() || vehicles.is_null() || subtasks.is_null() {
            return fail(VecStatus::NullArgument, "null argument");
        }
        let w = &(*scenario).world;
        *vehicles = w.n_vehicles();
        *subtasks = w.subtasks.len();
        Ok(())
    })
}

/// Plans and executes the scenario with `solver` (hgsa, random, df, scf, ssf
/// or brute). An infeasible plan still fills `out` and returns `VEC_STATUS_INFEASIBLE`.
///
/// # Safety
/// `scenario` must be a live handle, `solver` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vec_scenario_simulate(
    scenario: *const VecScenario,
    solver: *const c_char,
    filter_on: bool,
    out: *mut VecMetrics,
) -> VecStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(VecStatus::NullArgument, "null argument");
        }
        let solver = parse_solver(read_str(solver, "solver")?)?;
        let filter = if filter_on { FilterMode::On } else { FilterMode::Off };
        let r = run_world(&(*scenario).world, solver, filter, "ffi").or_else(|e| fail(VecStatus::ConfigError, e))?;
        *out = VecMetrics {
            makespan: r.makespan,
            planned_makespan: r.planned_makespan,
            avg_subtask_delay: r.avg_subtask_delay,
            reoffload_count: r.reoffload_count as u64,
            failed_tasks: r.failed_tasks as u64,
            infeasible: r.infeasible,
        };
        if r.infeasible {
            return fail(VecStatus::Infeasible, "some planning round had no feasible assignment");
        }
        Ok(())
    })
}

/// Solves a bare cost matrix (`rows`×`cols`, row-major, `INFINITY` marks a
/// non-candidate). `stays` may be null for vehicles that never leave;
/// otherwise it holds `cols` values. `assignment` receives `rows` column indices.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn vec_solve_costs(
    costs: *const f64,
    rows: usize,
    cols: usize,
    stays: *const f64,
    solver: *const c_char,
    seed: u64,
    assignment: *mut usize,
    makespan: *mut f64,
) -> VecStatus {
    guard(|| {
        if costs.is_null() || assignment.is_null() || makespan.is_null() {
            return fail(VecStatus::NullArgument, "null argument");
        }
        if rows == 0 || cols == 0 {
            return fail(VecStatus::InvalidArgument, "matrix must be non-empty");
        }
        let solver = parse_solver(read_str(solver, "solver")?)?;
        let flat = std::slice::from_raw_parts(costs, rows * cols);
        let matrix: Vec<Vec<f64>> = flat.chunks(cols).map(<[f64]>::to_vec).collect();
        let mut problem = Problem::from_costs(CostTimeMatrix::from_rows(&matrix));
        if !stays.is_null() {
            problem = problem.with_stays(std::slice::from_raw_parts(stays, cols).to_vec());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match solve(solver, &problem, &SolverOptions::default(), &mut rng) {
            Ok(o) => {
                std::slice::from_raw_parts_mut(assignment, rows).copy_from_slice(&o.assignment);
                *makespan = o.makespan;
                Ok(())
            }
            Err(e @ (SolveError::Infeasible { .. } | SolveError::NoFeasibleAssignment)) => {
                *makespan = f64::INFINITY;
                fail(VecStatus::Infeasible, e)
            }
            Err(e) => fail(VecStatus::InvalidArgument, e),
        }
    })
}

/// Default channel parameters.
#[no_mangle]
pub extern "C" fn vec_channel_default() -> VecChannel {
    let c = ChannelParams::default();
    VecChannel {
        bandwidth: c.bandwidth,
        tx_power: c.tx_power,
        channel_gain: c.channel_gain,
        noise_power: c.noise_power,
    }
}

/// Single-hop rate in bit/s with the band shared among `m_prime` subtasks.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vec_direct_rate(channel: VecChannel, m_prime: usize, out: *mut f64) -> VecStatus {
    guard(|| {
        if out.is_null() {
            return fail(VecStatus::NullArgument, "out is null");
        }
        *out = direct_rate(&channel.into(), m_prime).or_else(|e| fail(VecStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Seconds to move `size` bits over `hops` hops.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vec_tran_delay(
    size: f64,
    channel: VecChannel,
    m_prime: usize,
    hops: u32,
    out: *mut f64,
) -> VecStatus {
    guard(|| {
        if out.is_null() {
            return fail(VecStatus::NullArgument, "out is null");
        }
        *out = tran_delay(size, &channel.into(), m_prime, hops).or_else(|e| fail(VecStatus::InvalidArgument, e))?;
        Ok(())
    })
}
