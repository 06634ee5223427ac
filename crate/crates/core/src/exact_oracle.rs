//! Ground-truth probabilities with no asymptotics.
//!
//! Two independent exact routes:
//!
//! - **Exhaustive enumeration** over all `2^N` sequences for tiny `N`,
//!   with survivor counts grouped by number of tails so that dyadic heads
//!   probabilities (`p = k/2^r`) get exact big-integer accounting.
//! - **Transfer-matrix dynamic program** over automaton states encoding
//!   the ages of the most recent `T+1` zeros; linear in `N`, so avoidance
//!   probabilities are exact (to f64 accumulation) up to `N = 10^7`.
//!
//! The automaton state is a sufficient statistic for window zero-counts:
//! a zero older than `m - 1` positions can no longer sit in any live
//! window, and once `T+1` more recent zeros exist, every window holding
//! an older zero holds more than `T` zeros anyway.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numeric::{dyadic_parts, KahanSum};
use crate::run_scan::RunParams;
use crate::theory::CoinSpec;
use crate::Result;

/// Largest sequence length the `2^N` enumeration accepts.
pub const ENUMERATION_LIMIT: u64 = 22;
/// Largest window length the conditional enumeration accepts (2^(2m-1) sequences).
pub const CONDITIONAL_LIMIT: u32 = 12;
/// DP limits: state space is O(m^(T+1)), time is O(N * states).
pub const DP_MAX_T: u32 = 3;
pub const DP_MAX_M: u32 = 64;
pub const DP_MAX_N: u64 = 10_000_000;

/// Which windows count as occurrences.
///
/// `AtMostT` is the longest-run semantics (`mu(N) >= m` iff some window
/// has at most `T` zeros); `ExactlyT` is the event `A_{n,m}` semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowMode {
    AtMostT,
    ExactlyT,
}

impl WindowMode {
    fn qualifies(self, zeros: u32, t: u32) -> bool {
        match self {
            WindowMode::AtMostT => zeros <= t,
            WindowMode::ExactlyT => zeros == t,
        }
    }
}

/// Sequence counts grouped by number of zeros: `counts[z]` sequences of
/// length `len` with exactly `z` tails. The grouping keeps enumeration
/// results exact for any coin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCountProfile {
    pub len: u32,
    pub counts: Vec<u64>,
}

impl ZeroCountProfile {
    fn new(len: u32) -> Self {
        Self {
            len,
            counts: vec![0; len as usize + 1],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Total probability of the counted sequences under the coin.
    ///
    /// Dyadic `p = k/2^r` takes an exact big-integer route (one rounding
    /// at the end); other coins use compensated f64 summation.
    pub fn probability(&self, coin: &CoinSpec) -> f64 {
        if let Some((k, r)) = dyadic_parts(coin.p()) {
            let numer = self.dyadic_numerator(k, r);
            let shift = (r as u64 * self.len as u64) as i32;
            return biguint_to_f64(&numer) * 2f64.powi(-shift);
        }
        let mut sum = KahanSum::new();
        for (z, &cnt) in self.counts.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let heads = self.len as usize - z;
            sum.add(cnt as f64 * coin.p().powi(heads as i32) * coin.q().powi(z as i32));
        }
        sum.value()
    }

    /// Exact numerator over the common denominator `2^(r * len)` when
    /// `p = k / 2^r`.
    pub fn dyadic_numerator(&self, k: u64, r: u32) -> BigUint {
        let kp = BigUint::from(k);
        let kq = BigUint::from((1u64 << r) - k);
        let mut numer = BigUint::from(0u32);
        for (z, &cnt) in self.counts.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let heads = self.len as usize - z;
            numer += BigUint::from(cnt) * kp.pow(heads as u32) * kq.pow(z as u32);
        }
        numer
    }
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    // Magnitudes stay far below f64::MAX here (len <= 23, r <= 20 gives
    // numerators under 2^460).
    debug_assert!(x.bits() < 1000, "dyadic numerator out of f64 range");
    let mut v = 0.0f64;
    for digit in x.to_u64_digits().iter().rev() {
        v = v * 18446744073709551616.0 + *digit as f64;
    }
    v
}

/// Count, by number of zeros, the sequences of length `n` containing no
/// qualifying window of length `m` starting at `1 <= start <= n - m + 1`.
pub fn enumerate_no_occurrence_counts(
    n: u64,
    params: &RunParams,
    mode: WindowMode,
) -> Result<ZeroCountProfile> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            max: ENUMERATION_LIMIT,
        });
    }
    let n = n as u32;
    let m = params.m();
    let t = params.t();
    let mut profile = ZeroCountProfile::new(n);
    let window_mask: u32 = if m >= 32 { u32::MAX } else { (1u32 << m) - 1 };
    for u in 0u32..(1u32 << n) {
        // Bit i of u is the outcome of toss i+1 (1 = heads).
        let mut hit = false;
        if n >= m {
            for start in 0..=(n - m) {
                let zeros = m - ((u >> start) & window_mask).count_ones();
                if mode.qualifies(zeros, t) {
                    hit = true;
                    break;
                }
            }
        }
        if !hit {
            profile.counts[(n - u.count_ones()) as usize] += 1;
        }
    }
    Ok(profile)
}

/// Exact `P(no qualifying window among starts 1..N-m+1)` by full
/// enumeration; the independent cross-check for the DP.
pub fn brute_force_no_occurrence(
    n: u64,
    params: &RunParams,
    coin: &CoinSpec,
    mode: WindowMode,
) -> Result<f64> {
    Ok(enumerate_no_occurrence_counts(n, params, mode)?.probability(coin))
}

/// Count, by number of zeros over `X_1..X_{2m-1}`, the sequences in
/// `A_1` (first) and in `A_1 with none of A_2..A_m` (second). Window
/// events use the exactly-`T` rule.
pub fn enumerate_conditional_counts(m: u32, t: u32) -> Result<(ZeroCountProfile, ZeroCountProfile)> {
    if m > CONDITIONAL_LIMIT {
        return Err(Error::ConditionalEnumerationTooLarge {
            m,
            max: CONDITIONAL_LIMIT,
        });
    }
    if m == 0 {
        return Err(Error::ZeroWindowLength);
    }
    let len = 2 * m - 1;
    let mut conditioning = ZeroCountProfile::new(len);
    let mut survivors = ZeroCountProfile::new(len);
    let window_mask: u32 = (1u32 << m) - 1;
    for u in 0u32..(1u32 << len) {
        let zeros_first = m - (u & window_mask).count_ones();
        if zeros_first != t {
            continue;
        }
        let z = (len - u.count_ones()) as usize;
        conditioning.counts[z] += 1;
        let mut later_hit = false;
        for start in 1..m {
            let zeros = m - ((u >> start) & window_mask).count_ones();
            if zeros == t {
                later_hit = true;
                break;
            }
        }
        if !later_hit {
            survivors.counts[z] += 1;
        }
    }
    Ok((conditioning, survivors))
}

/// Exact conditional `P(no A_2..A_m | A_1)` by enumeration over
/// `2^(2m-1)` sequences; the independent check of the alpha formulas.
pub fn brute_force_conditional_si(m: u32, t: u32, coin: &CoinSpec) -> Result<f64> {
    let (conditioning, survivors) = enumerate_conditional_counts(m, t)?;
    let denom = conditioning.probability(coin);
    if conditioning.total() == 0 || denom <= 0.0 {
        return Err(Error::DegenerateConditioning);
    }
    Ok(survivors.probability(coin) / denom)
}

// ---------------------------------------------------------------------------
// Transfer-matrix DP
// ---------------------------------------------------------------------------

/// Ages (1 = the current position) of the most recent zeros, ascending,
/// at most `T+1` entries, each at most `m-1`. Packed one byte per age.
type StateKey = u64;

fn pack(ages: &[u8]) -> StateKey {
    let mut key = 0u64;
    for (i, &a) in ages.iter().enumerate() {
        key |= (a as u64) << (8 * i);
    }
    key
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    heads_target: u32,
    tails_target: u32,
    heads_qualifies: bool,
    tails_qualifies: bool,
}

struct Automaton {
    transitions: Vec<Transition>,
    start: u32,
}

/// Build the reachable state graph for one `(m, T, mode)`.
fn build_automaton(m: u32, t: u32, mode: WindowMode) -> Automaton {
    let keep = t as usize + 1;
    let mut index: HashMap<StateKey, u32> = HashMap::new();
    let mut states: Vec<Vec<u8>> = Vec::new();
    let mut transitions: Vec<Transition> = Vec::new();

    index.insert(pack(&[]), 0);
    states.push(Vec::new());

    let mut next_unprocessed = 0usize;
    while next_unprocessed < states.len() {
        let ages = states[next_unprocessed].clone();

        let resolve = |tails: bool,
                           states: &mut Vec<Vec<u8>>,
                           index: &mut HashMap<StateKey, u32>|
         -> (u32, bool) {
            // Shift every tracked zero one position older; a new tail has
            // age 1 and is the most recent.
            let mut shifted: Vec<u8> = Vec::with_capacity(keep + 1);
            if tails {
                shifted.push(1);
            }
            shifted.extend(ages.iter().map(|&a| a + 1));
            // All shifted ages are <= m, so every tracked zero lies in the
            // window ending at the current position.
            let zeros_in_window = shifted.len() as u32;
            let qualifies = mode.qualifies(zeros_in_window, t);
            // Keep the `T+1` most recent zeros still young enough to
            // matter for a future window.
            shifted.retain(|&a| (a as u32) <= m.saturating_sub(1));
            shifted.truncate(keep);
            let key = pack(&shifted);
            let id = *index.entry(key).or_insert_with(|| {
                states.push(shifted);
                (states.len() - 1) as u32
            });
            (id, qualifies)
        };

        let (heads_target, heads_qualifies) = resolve(false, &mut states, &mut index);
        let (tails_target, tails_qualifies) = resolve(true, &mut states, &mut index);
        transitions.push(Transition {
            heads_target,
            tails_target,
            heads_qualifies,
            tails_qualifies,
        });
        next_unprocessed += 1;
    }

    Automaton {
        transitions,
        start: 0,
    }
}

/// Number of reachable automaton states for `(m, T)`; bounded by
/// `sum over j <= T+1 of C(m-1, j)`.
pub fn dp_reachable_states(m: u32, t: u32) -> Result<usize> {
    check_dp_limits(1, m, t)?;
    Ok(build_automaton(m, t, WindowMode::ExactlyT).transitions.len())
}

fn check_dp_limits(n: u64, m: u32, t: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::ZeroWindowLength);
    }
    if t > DP_MAX_T || m > DP_MAX_M || n > DP_MAX_N {
        return Err(Error::DpLimitsExceeded {
            t,
            m,
            n,
            max_t: DP_MAX_T,
            max_m: DP_MAX_M,
            max_n: DP_MAX_N,
        });
    }
    Ok(())
}

/// Exact `P(no qualifying window of length m in X_1..X_N)` by forward
/// propagation of probability mass over automaton states. Mass stepping
/// into a position whose just-completed window qualifies is discarded;
/// the answer is the mass surviving all `N` steps.
pub fn dp_no_window_probability(
    n: u64,
    params: &RunParams,
    coin: &CoinSpec,
    mode: WindowMode,
) -> Result<f64> {
    let m = params.m();
    let t = params.t();
    check_dp_limits(n, m, t)?;
    if n < u64::from(m) {
        return Ok(1.0);
    }
    let automaton = build_automaton(m, t, mode);
    let len = automaton.transitions.len();
    let p = coin.p();
    let q = coin.q();

    let mut cur = vec![0.0f64; len];
    let mut next = vec![0.0f64; len];
    cur[automaton.start as usize] = 1.0;

    for step in 1..=n {
        // Windows exist only once m tosses have completed.
        let check = step >= u64::from(m);
        for (i, tr) in automaton.transitions.iter().enumerate() {
            let mass = cur[i];
            if mass == 0.0 {
                continue;
            }
            if !(check && tr.heads_qualifies) {
                next[tr.heads_target as usize] += mass * p;
            }
            if !(check && tr.tails_qualifies) {
                next[tr.tails_target as usize] += mass * q;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        next.iter_mut().for_each(|x| *x = 0.0);
    }

    let mut total = KahanSum::new();
    for &mass in &cur {
        total.add(mass);
    }
    Ok(total.value().clamp(0.0, 1.0))
}

/// `P(mu(N) < m)` for every `m` in the range, via the at-most-`T` DP.
/// Independent window lengths run concurrently.
pub fn exact_mu_distribution(
    n: u64,
    t: u32,
    coin: &CoinSpec,
    m_range: RangeInclusive<u32>,
) -> Result<Vec<(u32, f64)>> {
    let ms: Vec<u32> = m_range.collect();
    ms.par_iter()
        .map(|&m| {
            let params = RunParams::new(t, m)?;
            let p = dp_no_window_probability(n, &params, coin, WindowMode::AtMostT)?;
            Ok((m, p))
        })
        .collect()
}

/// Survival `P(tau_m > n)` of the first hitting time, via the exactly-`T`
/// DP over the `n - m + 1` window starts.
pub fn exact_tau_survival(n: u64, params: &RunParams, coin: &CoinSpec) -> Result<f64> {
    dp_no_window_probability(n, params, coin, WindowMode::ExactlyT)
}
