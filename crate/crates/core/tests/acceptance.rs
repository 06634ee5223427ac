//! Acceptance suite: one test per exit criterion, each printing a single
//! PASS/FAIL line with the measured quantities (run with `--nocapture`
//! to see the lines for passing criteria too).
//!
//! Every tolerance is pinned here, in code. Criteria 6 and 8 exercise the
//! full 10^6-toss seeded reproduction; expect the suite to take a few
//! minutes single-threaded.

use contam_runs::exact_oracle::{
    brute_force_conditional_si, brute_force_no_occurrence, dp_no_window_probability,
    enumerate_conditional_counts, enumerate_no_occurrence_counts, exact_mu_distribution,
    WindowMode,
};
use contam_runs::simulation::{
    compare_new_old, run_hitting_experiment, SimulationConfig, DEFAULT_CAP_MEAN_LIFETIMES,
};
use contam_runs::theory::{
    accompanying_cdf_new, accompanying_cdf_old, alpha_t1, alpha_t2, cfk_sandwich, m0_center,
    m_center, p_a1, tau_scale,
};
use contam_runs::{CoinSpec, RunParams};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Seed for the seeded reproduction runs. Fixed once; every quantity the
/// suite asserts is then deterministic.
const ACCEPTANCE_SEED: u64 = 42;

/// Workers for the simulation criteria ("with 8 workers" in the budget;
/// determinism is asserted separately in criterion 8).
const WORKERS: usize = 8;

fn coin(p: f64) -> CoinSpec {
    CoinSpec::new(p).unwrap()
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn criterion_1_lemma_3_4_exactness() {
    // T = 1: the closed-form conditional-avoidance level equals the
    // brute-force conditional to 1e-12 for m in 2..=12, p in {.3,.5,.7},
    // and exactly (as rationals) at the dyadic p = 1/2.
    let mut worst: f64 = 0.0;
    for m in 2..=12u32 {
        for &p in &[0.3, 0.5, 0.7] {
            let c = coin(p);
            let bf = brute_force_conditional_si(m, 1, &c).unwrap();
            let formula = alpha_t1(m, &c).unwrap();
            worst = worst.max((bf - formula).abs());
        }
    }

    let mut dyadic_exact = true;
    for m in 2..=12u32 {
        // At p = 1/2 all length-(2m-1) sequences are equiprobable, so the
        // conditional is a pure count ratio.
        let (conditioning, survivors) = enumerate_conditional_counts(m, 1).unwrap();
        let cond = rational(survivors.total() as i64, conditioning.total() as i64);
        let p_pow = rational(1, 1i64 << (m - 1)); // p^(m-1)
        let formula = rational(1, 2) + (rational(2, 1) * p_pow - rational(1, 1))
            / BigRational::from(BigInt::from(m));
        dyadic_exact &= cond == formula;
    }

    let pass = worst < 1e-12 && dyadic_exact;
    println!(
        "acceptance criterion 1 (Lemma 3.4 exactness): {} — max |enum - formula| = {worst:.3e}, dyadic-exact at p=1/2: {dyadic_exact}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_2_lemma_3_6_remark_3_7() {
    // T = 2, m in 5..=12, p in {0.3, 0.5}: the unrefined error must stay
    // within 10 p^m and the refined alpha must never be worse.
    let mut refined_never_worse = true;
    let mut violations = Vec::new();
    for &p in &[0.3, 0.5] {
        let c = coin(p);
        for m in 5..=12u32 {
            let bf = brute_force_conditional_si(m, 2, &c).unwrap();
            let err_plain = (bf - alpha_t2(m, &c, false).unwrap()).abs();
            let err_refined = (bf - alpha_t2(m, &c, true).unwrap()).abs();
            refined_never_worse &= err_refined <= err_plain;
            let bound = 10.0 * p.powi(m as i32);
            if err_plain > bound {
                violations.push(format!(
                    "m={m} p={p}: |enum - (q - 2/m)| = {err_plain:.3e} > 10 p^m = {bound:.3e} (ratio {:.2})",
                    err_plain / p.powi(m as i32)
                ));
            }
        }
    }

    let pass = violations.is_empty() && refined_never_worse;
    println!(
        "acceptance criterion 2 (Lemma 3.6 / Remark 3.7): {} — refined alpha never worse: {refined_never_worse}; 10 p^m violations: {}",
        if pass { "PASS" } else { "FAIL" },
        if violations.is_empty() {
            "none".to_string()
        } else {
            violations.join("; ")
        }
    );
    assert!(refined_never_worse, "refined alpha was worse somewhere");
    assert!(
        violations.is_empty(),
        "unrefined error exceeded 10 p^m at: {}",
        violations.join("; ")
    );
}

#[test]
fn criterion_3_oracle_agreement() {
    // DP equals full 2^N enumeration to 1e-12 over the whole small grid.
    let coins = [coin(0.3), coin(0.5), coin(0.7)];
    let mut worst: f64 = 0.0;
    let mut combos = 0u64;
    for n in 1..=16u64 {
        for m in 1..=n as u32 {
            for t in 1..=2u32 {
                let params = RunParams::new(t, m).unwrap();
                for mode in [WindowMode::AtMostT, WindowMode::ExactlyT] {
                    let profile = enumerate_no_occurrence_counts(n, &params, mode).unwrap();
                    for c in &coins {
                        let bf = profile.probability(c);
                        let dp = dp_no_window_probability(n, &params, c, mode).unwrap();
                        worst = worst.max((dp - bf).abs());
                        combos += 1;
                    }
                }
            }
        }
    }
    let pass = worst < 1e-12;
    println!(
        "acceptance criterion 3 (DP vs enumeration): {} — {combos} combinations, max |dp - enum| = {worst:.3e}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn criterion_4_cfk_sandwich_contains_dp() {
    // T=1, p=1/2: the exact avoidance probability must lie strictly
    // inside the CFK bounds with alpha = alpha_t1, eps = m^2 p^m / 10,
    // applied over the N1 = N - m + 1 window starts.
    let c = coin(0.5);
    let t = 1u32;
    let mut worst_margin = f64::INFINITY;
    let mut all_inside = true;
    for m in 14..=22u32 {
        let alpha = alpha_t1(m, &c).unwrap();
        let rate = tau_scale(m, t, &c, false).unwrap();
        let epsilon = f64::from(m).powi(2) * 0.5f64.powi(m as i32) / 10.0;
        for x in [0.5, 1.0, 2.0] {
            let n = (x / rate).floor() as u64;
            let n1 = n - u64::from(m) + 1;
            let params = RunParams::new(t, m).unwrap();
            let dp = dp_no_window_probability(n, &params, &c, WindowMode::ExactlyT).unwrap();
            let bounds = cfk_sandwich(n1, m, t, &c, alpha, epsilon).unwrap();
            let inside = bounds.lower < dp && dp < bounds.upper;
            all_inside &= inside;
            worst_margin = worst_margin.min((dp - bounds.lower).min(bounds.upper - dp));
        }
    }
    println!(
        "acceptance criterion 4 (CFK sandwich): {} — 27 points, worst containment margin = {worst_margin:.3e}",
        if all_inside { "PASS" } else { "FAIL" }
    );
    assert!(all_inside);
}

#[test]
fn criterion_5_convergence_rate() {
    // E(N) = sup_k |exact P(mu(N) - [m(N)] < k) - corrected CDF(k)| must
    // shrink with N, beat the classical CDF's error everywhere, and drop
    // by at least 1.5x from N = 1e4 to N = 1e6.
    let c = coin(0.5);
    let t = 1u32;
    let mut e_new = Vec::new();
    let mut e_old = Vec::new();
    for &n in &[10_000u64, 100_000, 1_000_000] {
        let center_new = m_center(n, t, &c).unwrap();
        let center_old = m0_center(n, t, &c).unwrap();
        let m_lo = (center_old.integer_part - 8).max(1) as u32;
        let m_hi = (center_new.integer_part + 12) as u32;
        let dist = exact_mu_distribution(n, t, &c, m_lo..=m_hi).unwrap();
        let mut err_new: f64 = 0.0;
        let mut err_old: f64 = 0.0;
        for &(m, exact) in &dist {
            let k_new = i64::from(m) - center_new.integer_part;
            if (-8..=12).contains(&k_new) {
                let approx = accompanying_cdf_new(k_new, n, t, &c).unwrap();
                err_new = err_new.max((exact - approx).abs());
            }
            let k_old = i64::from(m) - center_old.integer_part;
            if (-8..=12).contains(&k_old) {
                let approx = accompanying_cdf_old(k_old, n, t, &c).unwrap();
                err_old = err_old.max((exact - approx).abs());
            }
        }
        e_new.push(err_new);
        e_old.push(err_old);
    }
    let decreasing = e_new[0] > e_new[1] && e_new[1] > e_new[2];
    let beats_old = e_new.iter().zip(&e_old).all(|(n, o)| n < o);
    let ratio = e_new[0] / e_new[2];
    let pass = decreasing && beats_old && ratio >= 1.5;
    println!(
        "acceptance criterion 5 (convergence rate): {} — E_new = [{:.5}, {:.5}, {:.5}], E_old = [{:.5}, {:.5}, {:.5}], E(1e4)/E(1e6) = {ratio:.2}",
        if pass { "PASS" } else { "FAIL" },
        e_new[0], e_new[1], e_new[2], e_old[0], e_old[1], e_old[2]
    );
    assert!(decreasing, "E(N) not decreasing: {e_new:?}");
    assert!(beats_old, "corrected CDF not better than classical: new {e_new:?} old {e_old:?}");
    assert!(ratio >= 1.5, "decay ratio {ratio} < 1.5");
}

struct LongestCase {
    t: u32,
    p: f64,
    s: u64,
    paper_new: f64,
    paper_old: f64,
}

const LONGEST_CASES: [LongestCase; 4] = [
    LongestCase { t: 1, p: 0.5, s: 2000, paper_new: 0.0264, paper_old: 0.0778 },
    LongestCase { t: 2, p: 0.5, s: 2000, paper_new: 0.0148, paper_old: 0.2129 },
    LongestCase { t: 2, p: 0.6, s: 2000, paper_new: 0.0250, paper_old: 0.1953 },
    LongestCase { t: 2, p: 0.4, s: 500, paper_new: 0.0172, paper_old: 0.1948 },
];

#[test]
fn criterion_6_longest_run_reproduction() {
    // Seeded 10^6-toss experiments must land on the published Kolmogorov
    // distances: corrected within +-0.02, classical within +-0.05, and
    // the corrected fit strictly better in every configuration.
    let mut lines = Vec::new();
    let mut pass = true;
    for case in &LONGEST_CASES {
        let cfg = SimulationConfig {
            n: 1_000_000,
            s: case.s,
            t: case.t,
            coin: coin(case.p),
            seed: ACCEPTANCE_SEED,
            m_hit: None,
            cap_mean_lifetimes: DEFAULT_CAP_MEAN_LIFETIMES,
        };
        let r = compare_new_old(&cfg, WORKERS).unwrap();
        let ok_new = (r.ks_new.distance - case.paper_new).abs() <= 0.02;
        let ok_old = (r.ks_old.distance - case.paper_old).abs() <= 0.05;
        let ok_order = r.ks_new.distance < r.ks_old.distance;
        pass &= ok_new && ok_old && ok_order;
        lines.push(format!(
            "T={} p={} s={}: ks_new={:.4} (paper {:.4}), ks_old={:.4} (paper {:.4}){}",
            case.t,
            case.p,
            case.s,
            r.ks_new.distance,
            case.paper_new,
            r.ks_old.distance,
            case.paper_old,
            if ok_new && ok_old && ok_order { "" } else { " <- out of tolerance" }
        ));
    }
    println!(
        "acceptance criterion 6 (longest-run reproduction): {} — {}",
        if pass { "PASS" } else { "FAIL" },
        lines.join("; ")
    );
    assert!(pass, "{}", lines.join("\n"));
}

#[test]
fn criterion_7_hitting_time_reproduction() {
    // Scaled hitting times vs the standard exponential limit: KS <= 0.08
    // in each published configuration.
    let cases = [(1u32, 0.5, 13u32), (2, 0.5, 27), (2, 0.6, 27), (2, 0.4, 17)];
    let mut lines = Vec::new();
    let mut pass = true;
    for &(t, p, m) in &cases {
        let cfg = SimulationConfig {
            n: 1_000_000,
            s: 2000,
            t,
            coin: coin(p),
            seed: ACCEPTANCE_SEED,
            m_hit: Some(m),
            cap_mean_lifetimes: DEFAULT_CAP_MEAN_LIFETIMES,
        };
        let out = run_hitting_experiment(&cfg, WORKERS).unwrap();
        let ok = out.ks.distance <= 0.08;
        pass &= ok;
        lines.push(format!(
            "T={t} p={p} m={m}: KS={:.4}, censored={}{}",
            out.ks.distance,
            out.censored,
            if ok { "" } else { " <- exceeds 0.08" }
        ));
    }
    println!(
        "acceptance criterion 7 (hitting-time reproduction): {} — {}",
        if pass { "PASS" } else { "FAIL" },
        lines.join("; ")
    );
    assert!(pass, "{}", lines.join("\n"));
}

#[test]
fn criterion_8_determinism_across_workers() {
    // Identical seeds with different worker counts must serialize to
    // byte-identical payloads.
    let cfg = SimulationConfig {
        n: 100_000,
        s: 200,
        t: 2,
        coin: coin(0.5),
        seed: ACCEPTANCE_SEED,
        m_hit: None,
        cap_mean_lifetimes: DEFAULT_CAP_MEAN_LIFETIMES,
    };
    let serial = serde_json::to_string(&compare_new_old(&cfg, 1).unwrap()).unwrap();
    let parallel = serde_json::to_string(&compare_new_old(&cfg, 7).unwrap()).unwrap();
    let longest_ok = serial == parallel;

    let hit_cfg = SimulationConfig {
        m_hit: Some(15),
        s: 300,
        ..cfg
    };
    let serial_hit = serde_json::to_string(&run_hitting_experiment(&hit_cfg, 1).unwrap()).unwrap();
    let parallel_hit =
        serde_json::to_string(&run_hitting_experiment(&hit_cfg, 5).unwrap()).unwrap();
    let hitting_ok = serial_hit == parallel_hit;

    let pass = longest_ok && hitting_ok;
    println!(
        "acceptance criterion 8 (determinism across workers): {} — longest payload identical: {longest_ok}, hitting payload identical: {hitting_ok}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

#[test]
fn oracle_cross_check_brute_force_route() {
    // Belt-and-braces for criterion 3's enumeration path: the public f64
    // route agrees with the profile-based route used above.
    let c = coin(0.7);
    let params = RunParams::new(2, 5).unwrap();
    let via_profile = enumerate_no_occurrence_counts(14, &params, WindowMode::AtMostT)
        .unwrap()
        .probability(&c);
    let direct = brute_force_no_occurrence(14, &params, &c, WindowMode::AtMostT).unwrap();
    assert_eq!(via_profile, direct);
    // And the A_1 identity: survival at N = m is 1 - P(A_1).
    let single = brute_force_no_occurrence(5, &params, &c, WindowMode::ExactlyT).unwrap();
    assert!((single - (1.0 - p_a1(5, 2, &c).unwrap())).abs() < 1e-14);
}
