//! Small numeric utilities: compensated summation, log-space binomials,
//! dyadic-rational detection.

/// Kahan compensated accumulator for long probability sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// ln C(n, k), exact-ish for the small k used here (k <= n).
///
/// Computed as sum of ln((n-k+i)/i); avoids factorial overflow for any n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (1..=k)
        .map(|i| (((n - k + i) as f64) / (i as f64)).ln())
        .sum()
}

/// If `p` equals `k / 2^r` for some integer k and r <= 20, return (k, r)
/// with the smallest such r. Dyadic heads probabilities admit exact
/// rational accounting in the enumeration oracles.
pub fn dyadic_parts(p: f64) -> Option<(u64, u32)> {
    if !(0.0..=1.0).contains(&p) {
        return None;
    }
    for r in 0..=20u32 {
        let scaled = p * f64::from(1u32 << r);
        if scaled == scaled.round() {
            return Some((scaled as u64, r));
        }
    }
    None
}

/// ln(n!) by direct summation; n stays small (contamination counts).
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
