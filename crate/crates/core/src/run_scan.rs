//! Deterministic scanning of bit sequences for contaminated-run statistics.
//!
//! Conventions: 1 = heads, 0 = tails; positions are 1-based (`X_1 ... X_N`).
//! The longest run `mu(N)` counts windows with *at most* `T` tails, the
//! window event `A_{n,m}` requires *exactly* `T` tails; both semantics are
//! kept explicit throughout the crate.

use std::collections::VecDeque;

use crate::error::Error;
use crate::Result;

/// An ordered record of coin toss outcomes (1 = heads, 0 = tails).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    /// Validates that every element is 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::InvalidBit { index: i, value: b });
            }
        }
        Ok(Self { bits })
    }

    pub fn from_slice(bits: &[u8]) -> Result<Self> {
        Self::from_bits(bits.to_vec())
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Outcome at 1-based position `n`.
    pub fn bit(&self, n: usize) -> Option<u8> {
        if n == 0 {
            None
        } else {
            self.bits.get(n - 1).copied()
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }
}

/// Contamination count `T` and window length `m` for the event `A_{n,m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunParams {
    t: u32,
    m: u32,
}

impl RunParams {
    /// `m` must be positive. `m < T` is allowed; the exactly-T event is
    /// then unsatisfiable and the at-most rule degenerates gracefully.
    pub fn new(t: u32, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroWindowLength);
        }
        Ok(Self { t, m })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

/// True iff the length-`m` window starting at 1-based position `n`
/// contains exactly `T` zeros (the event `A_{n,m}`).
pub fn window_is_event_a(seq: &BitSequence, n: usize, params: &RunParams) -> Result<bool> {
    let m = params.m as usize;
    if n == 0 || n + m - 1 > seq.len() {
        return Err(Error::WindowOutOfRange {
            n,
            m: params.m,
            len: seq.len(),
        });
    }
    let zeros = seq.as_slice()[n - 1..n - 1 + m]
        .iter()
        .filter(|&&b| b == 0)
        .count();
    Ok(zeros == params.t as usize)
}

/// Length of the longest window containing at most `T` zeros (`mu(N)`).
///
/// Two-pointer sliding window, one pass, O(N) time. Returns 0 for the
/// empty sequence. A window of all tails counts under the at-most rule.
pub fn longest_contaminated_run(seq: &BitSequence, t: u32) -> usize {
    let bits = seq.as_slice();
    let mut left = 0usize;
    let mut zeros = 0usize;
    let mut best = 0usize;
    for (right, &b) in bits.iter().enumerate() {
        if b == 0 {
            zeros += 1;
        }
        while zeros > t as usize {
            if bits[left] == 0 {
                zeros -= 1;
            }
            left += 1;
        }
        best = best.max(right + 1 - left);
    }
    best
}

/// First hitting (completion) time of the event `A_{n,m}`: the smallest
/// `n + m - 1` over windows with exactly `T` zeros, or `None` if no such
/// window exists. Absence is a value, not an error.
pub fn first_hitting_time(seq: &BitSequence, params: &RunParams) -> Option<usize> {
    let bits = seq.as_slice();
    let m = params.m as usize;
    let t = params.t as usize;
    if bits.len() < m {
        return None;
    }
    let mut zeros = bits[..m].iter().filter(|&&b| b == 0).count();
    if zeros == t {
        return Some(m);
    }
    for end in m..bits.len() {
        if bits[end - m] == 0 {
            zeros -= 1;
        }
        if bits[end] == 0 {
            zeros += 1;
        }
        if zeros == t {
            return Some(end + 1);
        }
    }
    None
}

/// Hitting-time tracker for one registered window length.
#[derive(Debug, Clone)]
struct HitWindow {
    m: u32,
    zeros: u32,
    hit: Option<u64>,
}

/// Single-pass scanner over a bit stream.
///
/// Tracks the running longest at-most-`T` run and, per registered window
/// length `m`, the first hitting time of the exactly-`T` event. Memory is
/// O(T + max registered m), independent of the stream length, so streams
/// of 10^6 bits and beyond never materialize.
#[derive(Debug, Clone)]
pub struct StreamScanner {
    t: u32,
    position: u64,
    /// Positions of the most recent T+1 zeros, oldest first.
    recent_zeros: VecDeque<u64>,
    longest: u64,
    hits: Vec<HitWindow>,
    /// Ring of the last `ring_len` bits, for expiring hit-window counts.
    ring: Vec<u8>,
    ring_len: usize,
}

impl StreamScanner {
    pub fn new(t: u32) -> Self {
        Self {
            t,
            position: 0,
            recent_zeros: VecDeque::with_capacity(t as usize + 2),
            longest: 0,
            hits: Vec::new(),
            ring: Vec::new(),
            ring_len: 0,
        }
    }

    /// Register a window length for hitting-time tracking. Must be called
    /// before the first bit is pushed.
    pub fn register_hitting_window(&mut self, m: u32) -> Result<()> {
        if m == 0 {
            return Err(Error::ZeroWindowLength);
        }
        if self.position > 0 {
            return Err(Error::ScannerMisuse {
                reason: "hitting windows must be registered before pushing bits".into(),
            });
        }
        if !self.hits.iter().any(|h| h.m == m) {
            self.hits.push(HitWindow {
                m,
                zeros: 0,
                hit: None,
            });
        }
        Ok(())
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        if self.ring.is_empty() && !self.hits.is_empty() {
            self.ring_len = self.hits.iter().map(|h| h.m).max().unwrap() as usize;
            self.ring = vec![0; self.ring_len];
        }
        self.position += 1;
        let pos = self.position;

        // Longest at-most-T run ending here: it must start after the
        // (T+1)-th most recent zero.
        if bit == 0 {
            self.recent_zeros.push_back(pos);
            if self.recent_zeros.len() > self.t as usize + 1 {
                self.recent_zeros.pop_front();
            }
        }
        let start = if self.recent_zeros.len() == self.t as usize + 1 {
            self.recent_zeros[0] + 1
        } else {
            1
        };
        self.longest = self.longest.max(pos - start + 1);

        // Exactly-T hitting windows: slide each count, reading the expiring
        // bit from the ring before this position overwrites its slot.
        for h in &mut self.hits {
            let m = u64::from(h.m);
            if pos > m {
                let leaving = self.ring[((pos - m - 1) % self.ring_len as u64) as usize];
                if leaving == 0 {
                    h.zeros -= 1;
                }
            }
            if bit == 0 {
                h.zeros += 1;
            }
            if h.hit.is_none() && pos >= m && h.zeros == self.t {
                h.hit = Some(pos);
            }
        }
        if self.ring_len > 0 {
            self.ring[((pos - 1) % self.ring_len as u64) as usize] = bit;
        }
    }

    pub fn extend(&mut self, bits: impl IntoIterator<Item = u8>) {
        for b in bits {
            self.push(b);
        }
    }

    /// Longest at-most-`T` run seen so far.
    pub fn longest(&self) -> u64 {
        self.longest
    }

    /// First hitting time recorded for a registered window length.
    pub fn hitting_time(&self, m: u32) -> Option<u64> {
        self.hits.iter().find(|h| h.m == m).and_then(|h| h.hit)
    }

    /// Number of bits consumed.
    pub fn position(&self) -> u64 {
        self.position
    }
}
