//! C ABI for `flm-core`.
//!
//! Every fallible function returns an [`FlmStatus`] and writes its result
//! through an out pointer. On failure a message is kept per thread and can be
//! read with [`flm_last_error`]. Handles are opaque and owned by the caller,
//! who releases them with the matching `_free` function.
//!
//! Matrices are passed row-major. Bit strings are passed one bit per byte,
//! any non-zero byte meaning 1.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use flm_core::benchmarks::Benchmark as CoreBenchmark;
use flm_core::bitstring::BitString;
use flm_core::bounds::{self, BoundKind, BoundResult};
use flm_core::closed_forms;
use flm_core::ea::{self, EaConfig, Init};
use flm_core::error::Error;
use flm_core::full_state::{self, FullStart};
use flm_core::level_chain::{self, LevelChain, StartMode};

/// Pass as `start_level` to start from a uniformly random search point.
pub const FLM_START_RANDOM: i64 = -1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidProbability = 3,
    DimensionMismatch = 4,
    InvalidDistribution = 5,
    AbsorbingLevel = 6,
    TooLarge = 7,
    SingularSystem = 8,
    Preconditions = 9,
    BufferTooSmall = 10,
    Internal = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlmBoundKind {
    Upper = 0,
    Lower = 1,
    Exact = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlmBenchmarkKind {
    OneMax = 0,
    LeadingOnes = 1,
    Jump = 2,
    LongPath = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlmBound {
    pub value: f64,
    pub kind: FlmBoundKind,
    /// The raw formula was negative and the value was clamped to 0.
    pub clamped: bool,
    /// False for reference values without a proof.
    pub proven: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlmOneMaxBounds {
    pub tilde_t: f64,
    pub tilde_t_plus: f64,
    pub tilde_t_minus: f64,
    pub thm_lower: f64,
    pub thm_lower_clamped: bool,
    pub e_n: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlmJumpBounds {
    pub p_k: f64,
    pub skip_bound_arbitrary: f64,
    pub skip_bound_random: f64,
    pub lower_bound_arbitrary: f64,
    pub lower_bound_random: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlmRunResult {
    pub runtime: u64,
    pub hit_optimum: bool,
}

/// Opaque level chain.
pub struct FlmLevelChain(LevelChain);

/// Opaque benchmark function.
pub struct FlmBenchmark(CoreBenchmark);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> FlmStatus {
    match err {
        Error::InvalidParameter(_) => FlmStatus::InvalidParameter,
        Error::InvalidProbability { .. } => FlmStatus::InvalidProbability,
        Error::DimensionMismatch { .. } => FlmStatus::DimensionMismatch,
        Error::InvalidDistribution(_) => FlmStatus::InvalidDistribution,
        Error::AbsorbingLevel { .. } => FlmStatus::AbsorbingLevel,
        Error::PathTooLarge { .. } | Error::StateSpaceTooLarge { .. } => FlmStatus::TooLarge,
        Error::SingularSystem { .. } => FlmStatus::SingularSystem,
        Error::Preconditions { .. } => FlmStatus::Preconditions,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => FlmStatus::Internal,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Buffer { needed: usize, given: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult = Result<(), Failure>;

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult) -> FlmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FlmStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} is null"));
            FlmStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, given })) => {
            set_error(format!("buffer holds {given} values, {needed} needed"));
            FlmStatus::BufferTooSmall
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            FlmStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(ptr: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(name))
}

unsafe fn write_values(values: &[f64], dst: *mut f64, len: usize) -> FfiResult {
    if len < values.len() {
        return Err(Failure::Buffer {
            needed: values.len(),
            given: len,
        });
    }
    if values.is_empty() {
        return Ok(());
    }
    if dst.is_null() {
        return Err(Failure::Null("out"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), dst, values.len());
    Ok(())
}

unsafe fn matrix(ptr: *const f64, rows: usize, name: &'static str) -> Result<Vec<Vec<f64>>, Failure> {
    let flat = input(ptr, rows * rows, name)?;
    Ok(flat.chunks(rows.max(1)).map(<[f64]>::to_vec).collect())
}

fn start_mode(start_level: i64) -> Result<StartMode, Failure> {
    match start_level {
        FLM_START_RANDOM => Ok(StartMode::Random),
        l if l >= 0 => Ok(StartMode::Level(l as usize)),
        l => Err(Error::InvalidParameter(format!("start level {l} is negative")).into()),
    }
}

unsafe fn bits(ptr: *const u8, len: usize) -> Result<BitString, Failure> {
    let raw = input(ptr, len, "bits")?;
    Ok(BitString::from_bits(&raw.iter().map(|&b| b != 0).collect::<Vec<_>>()))
}

impl From<&BoundResult> for FlmBound {
    fn from(b: &BoundResult) -> Self {
        Self {
            value: b.value,
            kind: match b.kind {
                BoundKind::Upper => FlmBoundKind::Upper,
                BoundKind::Lower => FlmBoundKind::Lower,
                BoundKind::Exact => FlmBoundKind::Exact,
            },
            clamped: b.clamped,
            proven: b.proven,
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn flm_last_error(buf: *mut c_char, len: usize) -> usize {
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

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn flm_status_name(status: FlmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FlmStatus::Ok => b"ok\0",
        FlmStatus::NullPointer => b"null pointer\0",
        FlmStatus::InvalidParameter => b"invalid parameter\0",
        FlmStatus::InvalidProbability => b"invalid probability\0",
        FlmStatus::DimensionMismatch => b"dimension mismatch\0",
        FlmStatus::InvalidDistribution => b"invalid distribution\0",
        FlmStatus::AbsorbingLevel => b"absorbing level\0",
        FlmStatus::TooLarge => b"problem too large\0",
        FlmStatus::SingularSystem => b"singular system\0",
        FlmStatus::Preconditions => b"preconditions violated\0",
        FlmStatus::BufferTooSmall => b"buffer too small\0",
        FlmStatus::Internal => b"internal error\0",
        FlmStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

// Level chains

unsafe fn emit_chain(chain: LevelChain, out_ptr: *mut *mut FlmLevelChain) -> FfiResult {
    *out(out_ptr, "out")? = Box::into_raw(Box::new(FlmLevelChain(chain)));
    Ok(())
}

/// Builds a chain from a `levels x levels` row-major transition matrix and a
/// start distribution of length `levels`.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_new(
    transition: *const f64,
    start: *const f64,
    levels: usize,
    out: *mut *mut FlmLevelChain,
) -> FlmStatus {
    guard(|| {
        let t = matrix(transition, levels, "transition")?;
        let s = input(start, levels, "start")?.to_vec();
        emit_chain(LevelChain::new(t, s)?, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_chain_onemax(n: usize, p: f64, start_level: i64, out: *mut *mut FlmLevelChain) -> FlmStatus {
    guard(|| emit_chain(level_chain::onemax_level_matrix(n, p, start_mode(start_level)?)?, out))
}

#[no_mangle]
pub unsafe extern "C" fn flm_chain_leadingones(
    n: usize,
    p: f64,
    start_level: i64,
    out: *mut *mut FlmLevelChain,
) -> FlmStatus {
    guard(|| emit_chain(level_chain::leadingones_level_matrix(n, p, start_mode(start_level)?)?, out))
}

/// Fitness-class chain of Jump: gap classes first, then the non-gap classes
/// by ones-count, then the optimum.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_jump(
    n: usize,
    k: usize,
    p: f64,
    start_level: i64,
    out: *mut *mut FlmLevelChain,
) -> FlmStatus {
    guard(|| emit_chain(level_chain::jump_level_matrix(n, k, p, start_mode(start_level)?)?.chain, out))
}

#[no_mangle]
pub unsafe extern "C" fn flm_chain_free(chain: *mut FlmLevelChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of levels including the top; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_levels(chain: *const FlmLevelChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.levels())
}

unsafe fn chain_ref<'a>(chain: *const FlmLevelChain) -> Result<&'a LevelChain, Failure> {
    chain.as_ref().map(|c| &c.0).ok_or(Failure::Null("chain"))
}

#[no_mangle]
pub unsafe extern "C" fn flm_chain_expected_time(chain: *const FlmLevelChain, out_time: *mut f64) -> FlmStatus {
    guard(|| {
        let t = level_chain::expected_hitting_time(chain_ref(chain)?)?.overall;
        *out(out_time, "out")? = t;
        Ok(())
    })
}

/// Writes `levels` visit probabilities.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_visit_probabilities(
    chain: *const FlmLevelChain,
    out: *mut f64,
    len: usize,
) -> FlmStatus {
    guard(|| write_values(&level_chain::visit_probabilities(chain_ref(chain)?)?, out, len))
}

/// Writes the `levels - 1` leave probabilities of the non-top levels.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_leave_probabilities(
    chain: *const FlmLevelChain,
    out: *mut f64,
    len: usize,
) -> FlmStatus {
    guard(|| write_values(&chain_ref(chain)?.leave_probs(), out, len))
}

/// Writes `levels` proven lower bounds on the visit probabilities computed
/// from the transition structure alone.
#[no_mangle]
pub unsafe extern "C" fn flm_chain_visit_lower(chain: *const FlmLevelChain, out: *mut f64, len: usize) -> FlmStatus {
    guard(|| {
        let c = chain_ref(chain)?;
        let v = (0..c.levels())
            .map(|i| bounds::visit_lower_from_chain(c, i))
            .collect::<Result<Vec<_>, _>>()?;
        write_values(&v, out, len)
    })
}

// Fitness-level bounds. `p` has `len` entries (one per non-top level),
// `start`, `v` and the rows of `gamma` have `len + 1`.

unsafe fn emit_bound(b: BoundResult, out_ptr: *mut FlmBound) -> FfiResult {
    *out(out_ptr, "out")? = FlmBound::from(&b);
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_upper_classic(p: *const f64, len: usize, out: *mut FlmBound) -> FlmStatus {
    guard(|| emit_bound(bounds::flm_upper_classic(input(p, len, "p")?)?, out))
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_lower_classic(
    p: *const f64,
    start: *const f64,
    len: usize,
    out: *mut FlmBound,
) -> FlmStatus {
    guard(|| {
        let b = bounds::flm_lower_classic(input(p, len, "p")?, input(start, len + 1, "start")?)?;
        emit_bound(b, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_lower_visit(
    p_upper: *const f64,
    v_lower: *const f64,
    len: usize,
    out: *mut FlmBound,
) -> FlmStatus {
    guard(|| {
        let b = bounds::flm_lower_visit(input(p_upper, len, "p")?, input(v_lower, len + 1, "v")?)?;
        emit_bound(b, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_upper_visit(
    p_lower: *const f64,
    v_upper: *const f64,
    len: usize,
    out: *mut FlmBound,
) -> FlmStatus {
    guard(|| {
        let b = bounds::flm_upper_visit(input(p_lower, len, "p")?, input(v_upper, len + 1, "v")?)?;
        emit_bound(b, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_lower_viscosity(
    p: *const f64,
    gamma: *const f64,
    chi: f64,
    start: *const f64,
    len: usize,
    out: *mut FlmBound,
) -> FlmStatus {
    guard(|| {
        let g = matrix(gamma, len + 1, "gamma")?;
        let b = bounds::flm_lower_viscosity(input(p, len, "p")?, &g, chi, input(start, len + 1, "start")?)?;
        emit_bound(b, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_bound_upper_viscosity(
    p: *const f64,
    gamma: *const f64,
    chi: f64,
    start: *const f64,
    len: usize,
    out: *mut FlmBound,
) -> FlmStatus {
    guard(|| {
        let g = matrix(gamma, len + 1, "gamma")?;
        let b = bounds::flm_upper_viscosity(input(p, len, "p")?, &g, chi, input(start, len + 1, "start")?)?;
        emit_bound(b, out)
    })
}

// Closed forms

#[no_mangle]
pub unsafe extern "C" fn flm_leadingones_exact(n: usize, p: f64, out_time: *mut f64) -> FlmStatus {
    guard(|| {
        *out(out_time, "out")? = closed_forms::leadingones_exact(n, p)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_e_n(n: usize, out_value: *mut f64) -> FlmStatus {
    guard(|| {
        *out(out_value, "out")? = closed_forms::e_n_factor(n)?;
        Ok(())
    })
}

/// OneMax bounds for going from fitness `k` to fitness `l` with rate `1/n`.
#[no_mangle]
pub unsafe extern "C" fn flm_onemax_bounds(n: usize, k: usize, l: usize, out_bounds: *mut FlmOneMaxBounds) -> FlmStatus {
    guard(|| {
        let b = closed_forms::onemax_bounds(n, k, l)?;
        *out(out_bounds, "out")? = FlmOneMaxBounds {
            tilde_t: b.tilde_t,
            tilde_t_plus: b.tilde_t_plus,
            tilde_t_minus: b.tilde_t_minus,
            thm_lower: b.thm_lower,
            thm_lower_clamped: b.thm_lower_clamped,
            e_n: b.e_n,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_jump_bounds(n: usize, k: usize, out_bounds: *mut FlmJumpBounds) -> FlmStatus {
    guard(|| {
        let b = closed_forms::jump_bounds(n, k)?;
        *out(out_bounds, "out")? = FlmJumpBounds {
            p_k: b.p_k,
            skip_bound_arbitrary: b.skip_bound_arbitrary,
            skip_bound_random: b.skip_bound_random,
            lower_bound_arbitrary: b.lower_bound_arbitrary,
            lower_bound_random: b.lower_bound_random,
        };
        Ok(())
    })
}

/// Lower bound for the long k-path started at its first point.
#[no_mangle]
pub unsafe extern "C" fn flm_longpath_lower_bound(n: usize, k: usize, p: f64, out: *mut FlmBound) -> FlmStatus {
    guard(|| emit_bound(closed_forms::longpath_lower_bound(n, k, p)?, out))
}

// Benchmarks and the EA

/// `k` is the jump size or the path parameter; it is ignored for OneMax and
/// LeadingOnes.
#[no_mangle]
pub unsafe extern "C" fn flm_benchmark_new(
    kind: FlmBenchmarkKind,
    n: usize,
    k: usize,
    out_ptr: *mut *mut FlmBenchmark,
) -> FlmStatus {
    guard(|| {
        let b = match kind {
            FlmBenchmarkKind::OneMax => CoreBenchmark::onemax(n)?,
            FlmBenchmarkKind::LeadingOnes => CoreBenchmark::leadingones(n)?,
            FlmBenchmarkKind::Jump => CoreBenchmark::jump(n, k)?,
            FlmBenchmarkKind::LongPath => CoreBenchmark::long_path(n, k)?,
        };
        *out(out_ptr, "out")? = Box::into_raw(Box::new(FlmBenchmark(b)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn flm_benchmark_free(benchmark: *mut FlmBenchmark) {
    if !benchmark.is_null() {
        drop(Box::from_raw(benchmark));
    }
}

unsafe fn benchmark_ref<'a>(b: *const FlmBenchmark) -> Result<&'a CoreBenchmark, Failure> {
    b.as_ref().map(|b| &b.0).ok_or(Failure::Null("benchmark"))
}

unsafe fn sized_bits(b: &CoreBenchmark, ptr: *const u8, len: usize) -> Result<BitString, Failure> {
    if len != b.n() {
        return Err(Error::DimensionMismatch {
            expected: b.n(),
            actual: len,
        }
        .into());
    }
    bits(ptr, len)
}

#[no_mangle]
pub unsafe extern "C" fn flm_benchmark_fitness(
    benchmark: *const FlmBenchmark,
    bits: *const u8,
    len: usize,
    out_fitness: *mut i64,
) -> FlmStatus {
    guard(|| {
        let b = benchmark_ref(benchmark)?;
        let x = sized_bits(b, bits, len)?;
        *out(out_fitness, "out")? = b.fitness(&x);
        Ok(())
    })
}

/// One run of the (1+1) EA. `init` may be null for a uniformly random start,
/// otherwise it holds `n` bytes. `max_iterations == 0` means no budget.
#[no_mangle]
pub unsafe extern "C" fn flm_run_ea(
    benchmark: *const FlmBenchmark,
    p: f64,
    seed: u64,
    max_iterations: u64,
    init: *const u8,
    out_result: *mut FlmRunResult,
) -> FlmStatus {
    guard(|| {
        let b = benchmark_ref(benchmark)?;
        let start = if init.is_null() {
            Init::Random
        } else {
            Init::Point(sized_bits(b, init, b.n())?)
        };
        let config = EaConfig::new(b.n(), p)?
            .with_seed(seed)
            .with_max_iterations((max_iterations > 0).then_some(max_iterations));
        let r = ea::run_ea(b, &config, &start, &mut config.rng(), None)?;
        *out(out_result, "out")? = FlmRunResult {
            runtime: r.runtime,
            hit_optimum: r.hit_optimum,
        };
        Ok(())
    })
}

/// Exact expected optimization time by solving the full Markov chain
/// (small `n` only). `init` as in [`flm_run_ea`].
#[no_mangle]
pub unsafe extern "C" fn flm_full_state_expected_time(
    benchmark: *const FlmBenchmark,
    p: f64,
    init: *const u8,
    out_time: *mut f64,
) -> FlmStatus {
    guard(|| {
        let b = benchmark_ref(benchmark)?;
        let start = if init.is_null() {
            FullStart::Random
        } else {
            FullStart::Point(sized_bits(b, init, b.n())?)
        };
        *out(out_time, "out")? = full_state::full_state_expected_time(b, p, &start)?;
        Ok(())
    })
}
