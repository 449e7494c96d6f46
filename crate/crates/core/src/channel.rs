//! Seeded generation of correlated primary-gain traces.
//!
//! Two generators are provided: the AR(1) Gauss-Markov recursion the policies
//! are designed against, and a Clarke/Jakes sum-of-sinusoids comparator whose
//! normalized Doppler is chosen so that its lag-1 amplitude correlation matches
//! the AR(1) value `1 - α`. Traces are deterministic functions of a 64-bit
//! seed; per-realization seeds come from [`stream_seed`] so Monte Carlo runs
//! can be farmed out in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fading::FadingParams;
use crate::{Error, Result};

/// Complex amplitude gain of the primary link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGain {
    pub re: f64,
    pub im: f64,
}

impl ComplexGain {
    /// Squared magnitude `γ = re² + im²`.
    #[inline]
    pub fn power(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Which fading generator produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    /// First-order autoregressive Gauss-Markov recursion.
    Ar1,
    /// Clarke/Jakes sum-of-sinusoids with matched lag-1 correlation.
    Jakes,
}

/// An ordered sequence of primary power gains `γ_t`.
#[derive(Debug, Clone)]
pub struct ChannelTrace {
    pub gains: Vec<f64>,
    pub alpha: FadingParams,
    pub seed: u64,
    pub model: ChannelModel,
}

/// Derive a per-realization RNG seed from a master seed and a realization
/// index (SplitMix64 finalizer over the mixed pair).
pub fn stream_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_complex_gaussian(rng: &mut ChaCha8Rng) -> ComplexGain {
    // Each component has variance 1/2 so the squared magnitude is Exp(1).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexGain { re: re * s, im: im * s }
}

/// Advance the AR(1) recursion one packet:
/// `h_t = (1-α) h_{t-1} + √(2α-α²) w_t` with `w_t` a unit-variance circularly
/// symmetric complex Gaussian.
pub fn ar1_step(h_prev: ComplexGain, fp: FadingParams, rng: &mut ChaCha8Rng) -> ComplexGain {
    let om = 1.0 - fp.alpha();
    let scale = fp.innovation_variance().sqrt();
    let w = unit_complex_gaussian(rng);
    ComplexGain {
        re: om * h_prev.re + scale * w.re,
        im: om * h_prev.im + scale * w.im,
    }
}

/// Number of packets after which the AR(1) correlation between the first and
/// last packet drops to `1e-5`: `ceil(-5 ln 10 / ln(1-α))`.
///
/// Rejects `α = 1`, where the formula degenerates; i.i.d. runs take an
/// explicit packet count instead.
pub fn packets_for_decorrelation(fp: FadingParams) -> Result<usize> {
    let alpha = fp.alpha();
    if alpha >= 1.0 {
        return Err(Error::invalid(
            "packets_for_decorrelation requires alpha < 1; supply an explicit packet count",
        ));
    }
    let n = (-5.0 * 10.0f64.ln() / (1.0 - alpha).ln()).ceil();
    Ok((n as usize).max(1))
}

/// Generate a gain trace of `n` packets, deterministic in `(fp, n, seed, model)`.
pub fn gen_trace(fp: FadingParams, n: usize, seed: u64, model: ChannelModel) -> Result<ChannelTrace> {
    if n == 0 {
        return Err(Error::invalid("trace length must be at least 1"));
    }
    let gains = match model {
        ChannelModel::Ar1 => ar1_gains(fp, n, seed),
        ChannelModel::Jakes => jakes_gains(fp, n, seed),
    };
    Ok(ChannelTrace { gains, alpha: fp, seed, model })
}

fn ar1_gains(fp: FadingParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = unit_complex_gaussian(&mut rng); // stationary start
    let mut gains = Vec::with_capacity(n);
    gains.push(h.power());
    for _ in 1..n {
        h = ar1_step(h, fp, &mut rng);
        gains.push(h.power());
    }
    gains
}

/// Number of sinusoid rays in the Jakes generator.
const JAKES_RAYS: usize = 64;

fn jakes_gains(fp: FadingParams, n: usize, seed: u64) -> Vec<f64> {
    let omega_d = 2.0 * std::f64::consts::PI * jakes_normalized_doppler(fp.alpha());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = JAKES_RAYS;
    // Equally spaced arrival angles over (0, pi) pin the lag-1 correlation at
    // J0(omega_d) and keep every Doppler frequency distinct, so cross terms
    // time-average away; the random phases make realizations independent.
    let rays: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let angle = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            let phase: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            (omega_d * angle.cos(), phase)
        })
        .collect();
    let norm = 1.0 / (m as f64).sqrt();
    (0..n)
        .map(|t| {
            let tf = t as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for &(omega, phase) in &rays {
                let arg = omega * tf + phase;
                re += arg.cos();
                im += arg.sin();
            }
            let h = ComplexGain { re: re * norm, im: im * norm };
            h.power()
        })
        .collect()
}

/// Normalized Doppler `f_d T` solving `J₀(2π f_d T) = 1 - α`, so the Jakes
/// lag-1 amplitude correlation matches the AR(1) one.
pub fn jakes_normalized_doppler(alpha: f64) -> f64 {
    // First zero of J0; J0 decreases monotonically on [0, that zero].
    const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0f64, J0_FIRST_ZERO);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (2.0 * std::f64::consts::PI)
}

/// Bessel J0 by power series; only needed on [0, 2.41] where it converges in
/// a handful of terms.
fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(alpha: f64) -> FadingParams {
        FadingParams::new(alpha).unwrap()
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        for model in [ChannelModel::Ar1, ChannelModel::Jakes] {
            let a = gen_trace(fp(0.2), 500, 7, model).unwrap();
            let b = gen_trace(fp(0.2), 500, 7, model).unwrap();
            assert_eq!(a.gains, b.gains);
            let c = gen_trace(fp(0.2), 500, 8, model).unwrap();
            assert_ne!(a.gains, c.gains);
        }
        assert!(gen_trace(fp(0.2), 0, 7, ChannelModel::Ar1).is_err());
    }

    #[test]
    fn stream_seeds_distinct() {
        let seeds: std::collections::HashSet<u64> =
            (0..1000).map(|i| stream_seed(123, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(stream_seed(1, 0), stream_seed(2, 0));
    }

    #[test]
    fn ar1_alpha_one_is_iid_exponential() {
        // Kolmogorov-Smirnov distance of the empirical gain CDF from 1-e^{-g}
        let n = 1_000_000;
        let trace = gen_trace(fp(1.0), n, 11, ChannelModel::Ar1).unwrap();
        let mut gains = trace.gains;
        gains.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, g) in gains.iter().enumerate() {
            let cdf = 1.0 - (-g).exp();
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 0.002, "KS statistic {ks}");
    }

    #[test]
    fn ar1_stationary_moments() {
        // E[|h|^2] = 1 and E[h_t h*_{t-1}] = 1 - alpha under stationarity
        let alpha = 0.3;
        let n = 1_000_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h = unit_complex_gaussian(&mut rng);
        let (mut sum_p, mut sum_corr) = (0.0, 0.0);
        let mut prev = h;
        for t in 0..n {
            if t > 0 {
                sum_corr += h.re * prev.re + h.im * prev.im;
            }
            sum_p += h.power();
            prev = h;
            h = ar1_step(h, fp(alpha), &mut rng);
        }
        let mean_p = sum_p / n as f64;
        let corr = sum_corr / (n - 1) as f64;
        // var(|h|^2) = 1, and lag-k gain autocorrelation (1-alpha)^{2k}
        // inflates the variance of the time-averaged mean by
        // (1+rho)/(1-rho) with rho = 0.49, so 3 sigma is about 5.2e-3
        assert!((mean_p - 1.0).abs() < 5.2e-3, "mean power {mean_p}");
        assert!((corr - (1.0 - alpha)).abs() < 4e-3, "lag-1 correlation {corr}");
    }

    #[test]
    fn gains_match_complex_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut h = unit_complex_gaussian(&mut rng);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let trace = gen_trace(fp(0.4), 64, 3, ChannelModel::Ar1).unwrap();
        let mut expect = Vec::new();
        let h0 = unit_complex_gaussian(&mut rng2);
        assert_eq!(h.power(), h0.power());
        expect.push(h.power());
        for _ in 1..64 {
            h = ar1_step(h, fp(0.4), &mut rng);
            expect.push(h.power());
        }
        assert_eq!(trace.gains, expect);
        assert!(trace.gains.iter().all(|g| *g >= 0.0));
    }

    #[test]
    fn decorrelation_packet_counts() {
        assert_eq!(packets_for_decorrelation(fp(0.1)).unwrap(), 110);
        assert_eq!(packets_for_decorrelation(fp(0.5)).unwrap(), 17);
        let near_one = packets_for_decorrelation(fp(0.99999)).unwrap();
        assert!((1..=3).contains(&near_one), "got {near_one}");
        assert!(packets_for_decorrelation(fp(1.0)).is_err());
    }

    #[test]
    fn jakes_doppler_mapping() {
        // J0(2 pi fdT) must reproduce 1 - alpha
        for &alpha in &[0.01, 0.05, 0.1, 0.5, 1.0] {
            let fdt = jakes_normalized_doppler(alpha);
            let back = bessel_j0(2.0 * std::f64::consts::PI * fdt);
            assert!((back - (1.0 - alpha)).abs() < 1e-10, "alpha={alpha}");
        }
    }

    #[test]
    fn jakes_lag1_correlation_and_power() {
        for &alpha in &[0.05, 0.1, 0.5] {
            let n = 40_000;
            // average the time-averaged statistic over a few realizations
            let (mut corr_sum, mut pow_sum) = (0.0, 0.0);
            let reps = 4;
            for seed in 0..reps {
                let trace = gen_trace(fp(alpha), n, 100 + seed, ChannelModel::Jakes).unwrap();
                pow_sum += trace.gains.iter().sum::<f64>() / n as f64;
                // amplitude-level correlation needs the complex states; the
                // squared-gain trace gives it through sqrt since phases are
                // uniform. Regenerate the complex trace inline instead.
                corr_sum += jakes_complex_lag1(fp(alpha), n, 100 + seed);
            }
            let corr = corr_sum / reps as f64;
            let mean_pow = pow_sum / reps as f64;
            assert!(
                (corr - (1.0 - alpha)).abs() < 0.02,
                "alpha={alpha}: lag-1 {corr}"
            );
            assert!((mean_pow - 1.0).abs() < 0.05, "alpha={alpha}: power {mean_pow}");
        }
    }

    // Time-averaged lag-1 correlation of the complex Jakes process.
    fn jakes_complex_lag1(fp_: FadingParams, n: usize, seed: u64) -> f64 {
        let omega_d = 2.0 * std::f64::consts::PI * jakes_normalized_doppler(fp_.alpha());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = JAKES_RAYS;
        let rays: Vec<(f64, f64)> = (0..m)
            .map(|k| {
                let angle = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                let phase: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                (omega_d * angle.cos(), phase)
            })
            .collect();
        let norm = 1.0 / (m as f64).sqrt();
        let state = |t: usize| {
            let tf = t as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for &(omega, phase) in &rays {
                let arg = omega * tf + phase;
                re += arg.cos();
                im += arg.sin();
            }
            (re * norm, im * norm)
        };
        let mut acc = 0.0;
        let mut prev = state(0);
        for t in 1..n {
            let cur = state(t);
            acc += cur.0 * prev.0 + cur.1 * prev.1;
            prev = cur;
        }
        acc / (n - 1) as f64
    }
}
