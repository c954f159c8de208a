//! Neighborhood-cardinality estimation from corrected rendezvous times.
//!
//! The wake-up of the first neighbor after a strobe starts is the first
//! order statistic of uniform wake times, so the mean corrected rendezvous
//! over a window of samples inverts to a cardinality estimate. Temporal
//! estimation averages a node's own window; spatial estimation averages the
//! window means piggybacked by exchange peers.

use crate::time::SimTime;
use std::collections::VecDeque;

/// One corrected rendezvous observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RendezvousSample {
    pub naive: SimTime,
    pub piggybacked_delay: SimTime,
    pub corrected: SimTime,
}

/// Builds a corrected sample: `corrected = naive - piggy - delta4`.
/// Non-positive corrected values indicate a timing misconfiguration and are
/// rejected (the caller counts them).
pub fn corrected_rendezvous_sample(
    naive: SimTime,
    piggy: SimTime,
    delta4: SimTime,
) -> Option<RendezvousSample> {
    let lower = piggy + delta4;
    if naive <= lower {
        return None;
    }
    Some(RendezvousSample {
        naive,
        piggybacked_delay: piggy,
        corrected: naive - lower,
    })
}

/// Per-node estimator state (k = 1).
#[derive(Debug, Clone)]
pub struct EstimatorState {
    window: VecDeque<f64>,
    neighbor_means: VecDeque<f64>,
    pub w: usize,
    pub t_w_us: f64,
    pub alpha: f64,
    pub rejected: u64,
    pub accepted: u64,
}

impl EstimatorState {
    pub fn new(w: usize, t_w: SimTime, alpha: f64) -> Self {
        EstimatorState {
            window: VecDeque::with_capacity(w),
            neighbor_means: VecDeque::with_capacity(w),
            w,
            t_w_us: t_w.as_micros() as f64,
            alpha,
            rejected: 0,
            accepted: 0,
        }
    }

    pub fn push_sample_us(&mut self, corrected_us: f64) {
        debug_assert!(corrected_us > 0.0);
        if self.window.len() == self.w {
            self.window.pop_front();
        }
        self.window.push_back(corrected_us);
        self.accepted += 1;
    }

    pub fn push_neighbor_mean_us(&mut self, mean_us: f64) {
        if self.neighbor_means.len() == self.w {
            self.neighbor_means.pop_front();
        }
        self.neighbor_means.push_back(mean_us);
    }

    pub fn window_full(&self) -> bool {
        self.window.len() == self.w
    }

    pub fn window_mean_us(&self) -> Option<f64> {
        if self.window.is_empty() {
            return None;
        }
        Some(self.window.iter().sum::<f64>() / self.window.len() as f64)
    }

    /// T-Estreme: from the node's own sample window.
    pub fn t_estimate(&self) -> Option<f64> {
        self.window_mean_us().map(|m| self.t_w_us / m - 1.0)
    }

    /// S-Estreme: from the neighbors' piggybacked window means.
    pub fn s_estimate(&self) -> Option<f64> {
        if self.neighbor_means.is_empty() {
            return None;
        }
        let m = self.neighbor_means.iter().sum::<f64>() / self.neighbor_means.len() as f64;
        Some(self.t_w_us / m - 1.0)
    }

    /// Weighted blend: alpha = 1 is pure temporal, alpha = 0 pure spatial.
    pub fn combined_estimate(&self) -> Option<f64> {
        match (self.t_estimate(), self.s_estimate()) {
            (Some(t), Some(s)) => Some(t * self.alpha + s * (1.0 - self.alpha)),
            (Some(t), None) => Some(t),
            (None, Some(s)) => Some(s),
            (None, None) => None,
        }
    }
}

/// Tight bound on the expected relative cardinality error under a fixed
/// uncorrected delay `epsilon`: `-rho / (1 + rho)` with
/// `rho = epsilon (n+1) / t_w`.
pub fn expected_error_bound(epsilon: SimTime, n: u32, t_w: SimTime) -> f64 {
    let rho = epsilon.as_micros() as f64 * (n as f64 + 1.0) / t_w.as_micros() as f64;
    -rho / (1.0 + rho)
}

/// Exact expected relative error for delay `epsilon`:
/// `-eps (n+1)^2 / (n (t_w + eps (n+1)))`.
pub fn exact_expected_error(epsilon: SimTime, n: u32, t_w: SimTime) -> f64 {
    let eps = epsilon.as_micros() as f64;
    let tw = t_w.as_micros() as f64;
    let n = n as f64;
    -(eps * (n + 1.0).powi(2)) / (n * (tw + eps * (n + 1.0)))
}

/// Probability that two or more of `n` uniformly waking neighbors fall into
/// the same inter-beacon interval as the first waker:
/// `sum_j sum_{i>=2} C(n,i) q^i (1 - q j)^(n-i)` with `q = t_b / t_w`.
pub fn collision_probability(n: u32, t_b: SimTime, t_w: SimTime) -> f64 {
    assert!(n >= 2, "collision probability needs n >= 2");
    assert!(t_b < t_w, "inter-beacon interval must be below the wake period");
    let q = t_b.as_micros() as f64 / t_w.as_micros() as f64;
    let intervals = (t_w.as_micros() / t_b.as_micros()) as u32;
    let mut total = 0.0;
    for j in 1..=intervals {
        let surv = 1.0 - q * j as f64;
        if surv < 0.0 {
            break;
        }
        // Terms C(n,i) q^i surv^(n-i) via the binomial recurrence.
        let mut term = surv.powi(n as i32);
        if term == 0.0 && surv > 0.0 {
            // Underflow is only possible for huge n; irrelevant here.
            continue;
        }
        let mut sum_i = 0.0;
        for i in 1..=n {
            term *= (n - i + 1) as f64 / i as f64 * q / surv.max(f64::MIN_POSITIVE);
            if i >= 2 {
                sum_i += term;
            }
        }
        total += sum_i;
    }
    total
}

/// Probability that exactly one of `n_c` colliding responders retransmits
/// (conflict resolution completes this round).
pub fn completion_probability(n_c: u32, p: f64) -> f64 {
    n_c as f64 * p * (1.0 - p).powi(n_c as i32 - 1)
}

/// Grid argmax of the completion probability over p in (0, 1].
pub fn optimal_retransmit_p(n_c: u32, grid_step: f64) -> f64 {
    let mut best = (0.0, grid_step);
    let mut p = grid_step;
    while p <= 1.0 + 1e-12 {
        let c = completion_probability(n_c, p.min(1.0));
        if c > best.0 {
            best = (c, p.min(1.0));
        }
        p += grid_step;
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStream, StreamPurpose};

    const MS: u64 = 1_000;

    fn beta_first_order(rng: &mut RngStream, n: u32) -> f64 {
        // Inverse CDF of Beta(1, n): x = 1 - (1-u)^(1/n).
        let u = rng.uniform(0.0, 1.0);
        1.0 - (1.0 - u).powf(1.0 / n as f64)
    }

    #[test]
    fn corrected_sample_arithmetic() {
        let s = corrected_rendezvous_sample(
            SimTime::from_micros(12_000),
            SimTime::from_micros(1_000),
            SimTime::from_micros(1_100),
        )
        .unwrap();
        assert_eq!(s.corrected, SimTime::from_micros(9_900));
    }

    #[test]
    fn ideal_hook_keeps_naive() {
        let s = corrected_rendezvous_sample(SimTime::from_micros(5_000), SimTime::ZERO, SimTime::ZERO)
            .unwrap();
        assert_eq!(s.corrected, s.naive);
    }

    #[test]
    fn non_positive_corrected_rejected() {
        assert!(corrected_rendezvous_sample(
            SimTime::from_micros(900),
            SimTime::ZERO,
            SimTime::from_micros(1_100)
        )
        .is_none());
    }

    #[test]
    fn t_estimate_inverts_expectation() {
        let mut st = EstimatorState::new(1, SimTime::from_secs(1), 1.0);
        st.push_sample_us(9_900.99);
        let n = st.t_estimate().unwrap();
        assert!((n - 100.0).abs() < 0.01, "n_hat {n}");

        let mut st = EstimatorState::new(1, SimTime::from_secs(1), 1.0);
        st.push_sample_us(500.0 * MS as f64);
        assert!((st.t_estimate().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_window_gives_no_estimate() {
        let st = EstimatorState::new(50, SimTime::from_secs(1), 1.0);
        assert!(st.t_estimate().is_none());
        assert!(st.s_estimate().is_none());
        assert!(st.combined_estimate().is_none());
    }

    #[test]
    fn estimate_uses_only_last_w_samples() {
        let mut st = EstimatorState::new(3, SimTime::from_secs(1), 1.0);
        st.push_sample_us(1.0e9); // pushed out below
        for _ in 0..3 {
            st.push_sample_us(10_000.0);
        }
        assert!((st.window_mean_us().unwrap() - 10_000.0).abs() < 1e-9);
    }

    #[test]
    fn t_estimate_monotone_in_mean() {
        let tw = SimTime::from_secs(1);
        let mut prev = f64::INFINITY;
        for mean in [5_000.0, 10_000.0, 20_000.0, 100_000.0] {
            let mut st = EstimatorState::new(1, tw, 1.0);
            st.push_sample_us(mean);
            let n = st.t_estimate().unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn s_estimate_from_neighbor_means() {
        let mut st = EstimatorState::new(50, SimTime::from_secs(1), 0.0);
        for _ in 0..5 {
            st.push_neighbor_mean_us(9_900.99);
        }
        assert!((st.s_estimate().unwrap() - 100.0).abs() < 0.01);

        let mut st = EstimatorState::new(50, SimTime::from_secs(1), 0.0);
        st.push_neighbor_mean_us(90_000.0);
        let implied = 1.0e6 / 90_000.0 - 1.0;
        assert!((st.s_estimate().unwrap() - implied).abs() < 1e-9);
    }

    #[test]
    fn combined_blends_linearly() {
        let mut st = EstimatorState::new(1, SimTime::from_secs(1), 0.5);
        // t_estimate = 90: mean = tw/91; s_estimate = 110: mean = tw/111
        st.push_sample_us(1.0e6 / 91.0);
        st.push_neighbor_mean_us(1.0e6 / 111.0);
        let c = st.combined_estimate().unwrap();
        assert!((c - 100.0).abs() < 1e-6, "combined {c}");

        st.alpha = 1.0;
        assert!((st.combined_estimate().unwrap() - 90.0).abs() < 1e-6);
        st.alpha = 0.0;
        assert!((st.combined_estimate().unwrap() - 110.0).abs() < 1e-6);
    }

    #[test]
    fn beta_sampled_windows_estimate_within_ten_percent() {
        // Monte Carlo oracle: windows of w=50 samples drawn from
        // t_w * Beta(1, n) at n=100; median relative error <= 0.10.
        let mut rng = RngStream::new(11, 0, StreamPurpose::Contention);
        let (n, w, tw) = (100u32, 50usize, 1.0e6);
        let mut errs: Vec<f64> = Vec::new();
        for _ in 0..1_000 {
            let mut st = EstimatorState::new(w, SimTime::from_secs(1), 1.0);
            for _ in 0..w {
                st.push_sample_us(tw * beta_first_order(&mut rng, n));
            }
            let n_hat = st.t_estimate().unwrap();
            errs.push((n_hat - n as f64).abs() / n as f64);
        }
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = errs[errs.len() / 2];
        assert!(median <= 0.10, "median relative error {median}");
    }

    #[test]
    fn window_means_match_beta_expectation() {
        // Mean of window means over 10^4 windows within 2% of t_w/(n+1).
        let mut rng = RngStream::new(12, 0, StreamPurpose::Contention);
        let (n, w, tw) = (50u32, 50usize, 1.0e6);
        let mut acc = 0.0;
        let windows = 10_000;
        for _ in 0..windows {
            let mut st = EstimatorState::new(w, SimTime::from_secs(1), 1.0);
            for _ in 0..w {
                st.push_sample_us(tw * beta_first_order(&mut rng, n));
            }
            acc += st.window_mean_us().unwrap();
        }
        let mean = acc / windows as f64;
        let expect = tw / (n as f64 + 1.0);
        assert!(
            (mean - expect).abs() / expect < 0.02,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn positive_delay_biases_estimate_low() {
        let mut rng = RngStream::new(13, 0, StreamPurpose::Contention);
        let (n, w, tw) = (100u32, 50usize, 1.0e6);
        for eps_us in [200.0, 500.0, 1_000.0, 2_000.0] {
            let mut sum = 0.0;
            let repeats = 400;
            for _ in 0..repeats {
                let mut st = EstimatorState::new(w, SimTime::from_secs(1), 1.0);
                for _ in 0..w {
                    st.push_sample_us(tw * beta_first_order(&mut rng, n) + eps_us);
                }
                sum += st.t_estimate().unwrap();
            }
            let mean = sum / repeats as f64;
            assert!(mean < n as f64, "eps {eps_us}: mean {mean} not below n");
        }
    }

    #[test]
    fn error_bound_matches_worked_example() {
        // eps = 1 ms, n = 100, t_w = 1 s: rho = 0.101, phi ~ -0.0917
        let phi = expected_error_bound(
            SimTime::from_millis(1),
            100,
            SimTime::from_secs(1),
        );
        assert!((phi + 0.0917).abs() < 0.0005, "phi {phi}");
        assert_eq!(
            expected_error_bound(SimTime::ZERO, 100, SimTime::from_secs(1)),
            0.0
        );
    }

    #[test]
    fn exact_error_within_k1_k2_of_bound() {
        let eps = SimTime::from_millis(1);
        let tw = SimTime::from_secs(1);
        for n in 1..=1_000u32 {
            let phi = expected_error_bound(eps, n, tw);
            let exact = exact_expected_error(eps, n, tw);
            let ratio = exact / phi;
            let lo = n as f64 / (n as f64 + 1.0);
            let hi = (n as f64 + 1.0) / n as f64;
            assert!(
                ratio >= lo - 1e-12 && ratio <= hi + 1e-12,
                "n={n} ratio {ratio}"
            );
        }
    }

    #[test]
    fn collision_probability_reproduces_reported_values() {
        // The calibrated default inter-beacon interval reproduces the
        // reported collision probabilities 0.02 / 0.11 / 0.22.
        let t_b = SimTime::from_micros(4_750);
        let t_w = SimTime::from_secs(1);
        for (n, target) in [(10, 0.02), (50, 0.11), (100, 0.22)] {
            let p = collision_probability(n, t_b, t_w);
            assert!(
                (p - target).abs() <= 0.005,
                "n={n}: {p} vs target {target}"
            );
        }
    }

    #[test]
    fn collision_probability_vanishes_with_tiny_interval() {
        let p = collision_probability(2, SimTime::from_micros(10), SimTime::from_secs(1));
        assert!(p < 1e-4, "p {p}");
    }

    #[test]
    fn completion_probability_peaks_at_one_over_nc() {
        for n_c in 2..=10u32 {
            let step = 0.001;
            let argmax = optimal_retransmit_p(n_c, step);
            assert!(
                (argmax - 1.0 / n_c as f64).abs() <= step + 1e-9,
                "n_c={n_c}: argmax {argmax}"
            );
        }
    }
}
