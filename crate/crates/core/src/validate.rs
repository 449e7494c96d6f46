//! Desk-scale invariant suite behind `cogpower validate`.
//!
//! Each check is a self-contained cross-check of one contract: closed forms
//! against quadrature, filters against brute-force Bayes, generators against
//! their stationary statistics. Checks are sized to finish in seconds each; the
//! full suite is the fast regression gate for the numerical core.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{self, ArqObservation, Belief, GammaGrid, TransitionKernel};
use crate::channel::{self, ChannelModel};
use crate::fading::{self, FadingParams, LinkBudget};
use crate::policy::{self, PowerGrid};
use crate::quad::simpson;
use crate::sim::{PacketCount, PolicyKind, SimConfig, Simulator};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub duration: Duration,
}

fn run(name: &'static str, body: impl FnOnce() -> Result<String, String>) -> Check {
    let start = Instant::now();
    let outcome = body();
    let duration = start.elapsed();
    match outcome {
        Ok(detail) => Check { name, passed: true, detail, duration },
        Err(detail) => Check { name, passed: false, detail, duration },
    }
}

fn ensure(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fp(alpha: f64) -> FadingParams {
    FadingParams::new(alpha).unwrap()
}

fn grid801() -> Arc<GammaGrid> {
    Arc::new(GammaGrid::uniform(801, 8.0).unwrap())
}

/// Run the whole suite.
pub fn run_all() -> Vec<Check> {
    vec![
        run("bessel-series-oracle", bessel_series_oracle),
        run("bessel-asymptotic-oracle", bessel_asymptotic_oracle),
        run("bessel-monotone", bessel_monotone),
        run("marcum-quadrature-oracle", marcum_quadrature_oracle),
        run("marcum-equal-argument-identity", marcum_equal_argument),
        run("cond-pdf-normalization", cond_pdf_normalization),
        run("outage-cdf-vs-quadrature", outage_cdf_vs_quadrature),
        run("cond-pdf-stationarity", cond_pdf_stationarity),
        run("cond-pdf-conditional-mean", cond_pdf_conditional_mean),
        run("threshold-affine", threshold_affine),
        run("weighted-sum-monotone", weighted_sum_monotone),
        run("grid-exponential-quadrature", grid_exponential_quadrature),
        run("kernel-column-mass", kernel_column_mass),
        run("predict-stationary-fixed-point", predict_stationary_fixed_point),
        run("predict-point-mass-mean", predict_point_mass_mean),
        run("likelihood-mixture-identity", likelihood_mixture_identity),
        run("filter-three-state-oracle", filter_three_state_oracle),
        run("outage-mass-endpoints", outage_mass_endpoints),
        run("ar1-stationary-moments", ar1_stationary_moments),
        run("ar1-iid-ks", ar1_iid_ks),
        run("jakes-lag1-correlation", jakes_lag1_correlation),
        run("decorrelation-packet-counts", decorrelation_packet_counts),
        run("argmax-scale-invariance", argmax_scale_invariance),
        run("greedy-cg-arq-point-mass", greedy_cg_arq_point_mass),
        run("dual-policy-weighted-sum-consistency", dual_policy_consistency),
        run("cg-dominates-arq-dominates-nocsi", dominance_ordering),
    ]
}

fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..500 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

fn bessel_series_oracle() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &x in &[0.0f64, 0.3, 1.0, 2.7, 5.0, 8.0] {
        let expect = (-x).exp() * i0_series(x);
        let got = fading::bessel_i0_scaled(x).map_err(|e| e.to_string())?;
        worst = worst.max((got - expect).abs() / expect.max(1e-300));
    }
    ensure(worst < 1e-9, format!("worst relative error {worst:.2e}"))
}

fn bessel_asymptotic_oracle() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &x in &[20.0, 1e2, 1e3, 1e4, 1e5] {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12u32 {
            let num = (2 * k - 1) as f64;
            term *= num * num / (k as f64 * 8.0 * x);
            sum += term;
        }
        let expect = sum / (2.0 * std::f64::consts::PI * x).sqrt();
        let got = fading::bessel_i0_scaled(x).map_err(|e| e.to_string())?;
        worst = worst.max((got - expect).abs() / expect);
    }
    ensure(worst < 1e-9, format!("worst relative error {worst:.2e}"))
}

fn bessel_monotone() -> Result<String, String> {
    let mut prev = fading::bessel_i0_scaled(0.0).unwrap();
    let mut x = 1e-3;
    while x < 1e5 {
        let v = fading::bessel_i0_scaled(x).unwrap();
        if v >= prev {
            return Err(format!("not decreasing at x = {x}"));
        }
        prev = v;
        x *= 1.9;
    }
    Ok("decreasing over [0, 1e5]".into())
}

fn marcum_quadrature_oracle() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 1.0), (2.0, 5.0), (10.0, 12.0)] {
        let upper = (a + 14.0f64).max(b + 14.0);
        let expect = simpson(
            |t| {
                let z = a * t;
                (z + fading::bessel_i0_scaled(z).unwrap().ln() - 0.5 * (t * t + a * a)).exp() * t
            },
            b,
            upper,
            100_000,
        );
        let got = fading::marcum_q1(a, b).map_err(|e| e.to_string())?;
        worst = worst.max((got - expect).abs());
    }
    ensure(worst < 1e-8, format!("worst absolute error {worst:.2e}"))
}

fn marcum_equal_argument() -> Result<String, String> {
    // Q1(a, a) = (1 + e^{-a^2} I0(a^2)) / 2, valid in both summation regimes
    let mut worst: f64 = 0.0;
    for &a in &[0.5, 1.0, 4.0, 20.0, 45.0] {
        let got = fading::marcum_q1(a, a).unwrap();
        let expect = 0.5 * (1.0 + fading::bessel_i0_scaled(a * a).unwrap());
        worst = worst.max((got - expect).abs());
    }
    ensure(worst < 1e-9, format!("worst absolute error {worst:.2e}"))
}

fn conditional_quadrature(fp_: FadingParams, gamma_prev: f64, upper: f64) -> f64 {
    let c = fp_.innovation_variance();
    let om2 = (1.0 - fp_.alpha()).powi(2);
    let std = (c * c + 2.0 * c * om2 * gamma_prev).sqrt();
    let h = (c.min(std) / 10.0).min(0.01);
    let n = ((upper / h).ceil() as usize).clamp(2000, 400_000);
    simpson(|g| fading::cond_pdf(g, gamma_prev, fp_).unwrap(), 0.0, upper, n)
}

fn cond_pdf_normalization() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.01, 0.05, 0.1, 0.5, 1.0] {
        for &gp in &[0.1, 1.0, 4.0, 8.0] {
            let f = fp(alpha);
            let mut upper = (1.0 - alpha) * (1.0 - alpha) * gp + f.innovation_variance() + 1.0;
            while 1.0 - fading::outage_cdf(upper, gp, f).unwrap() > 1e-9 {
                upper += 1.0;
            }
            let mass = conditional_quadrature(f, gp, upper);
            worst = worst.max((mass - 1.0).abs());
        }
    }
    ensure(worst < 1e-6, format!("worst |mass - 1| = {worst:.2e} over 5x4 grid"))
}

fn outage_cdf_vs_quadrature() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = rng.random_range(0.01..=1.0);
        let gp = rng.random_range(0.0..8.0);
        let th = rng.random_range(0.0..4.0);
        let f = fp(alpha);
        let direct = fading::outage_cdf(th, gp, f).unwrap();
        let by_quad = if th == 0.0 { 0.0 } else { conditional_quadrature(f, gp, th) };
        worst = worst.max((direct - by_quad).abs());
    }
    ensure(worst < 1e-6, format!("worst gap {worst:.2e} over 100 random triples"))
}

fn cond_pdf_stationarity() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.05, 0.1, 0.5, 1.0] {
        let f = fp(alpha);
        let c = f.innovation_variance();
        let n = ((40.0 / (c / 6.0)).ceil() as usize).clamp(4000, 80_000);
        for &g in &[0.0, 0.5, 2.0, 6.0] {
            let v = simpson(|gp| fading::cond_pdf(g, gp, f).unwrap() * (-gp).exp(), 0.0, 40.0, n);
            worst = worst.max((v - (-g).exp()).abs());
        }
    }
    ensure(worst < 1e-4, format!("worst deviation {worst:.2e}"))
}

fn cond_pdf_conditional_mean() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.05, 0.3, 1.0] {
        let f = fp(alpha);
        let c = f.innovation_variance();
        let om2 = (1.0 - alpha) * (1.0 - alpha);
        for &gp in &[0.2, 1.0, 5.0] {
            let expect = om2 * gp + c;
            let std = (c * c + 2.0 * c * om2 * gp).sqrt();
            let upper = expect + 45.0 * std + 20.0;
            let h = (c.min(std) / 10.0).min(0.01);
            let n = ((upper / h).ceil() as usize).clamp(4000, 400_000);
            let mean = simpson(|g| g * fading::cond_pdf(g, gp, f).unwrap(), 0.0, upper, n);
            worst = worst.max((mean - expect).abs());
        }
    }
    ensure(worst < 1e-4, format!("worst deviation {worst:.2e}"))
}

fn threshold_affine() -> Result<String, String> {
    let budget = LinkBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p1 = rng.random_range(0.0..10.0);
        let p2 = rng.random_range(0.0..10.0);
        let lhs = fading::gamma_threshold(p1, &budget).unwrap()
            + fading::gamma_threshold(p2, &budget).unwrap();
        let rhs = fading::gamma_threshold(0.0, &budget).unwrap()
            + fading::gamma_threshold(p1 + p2, &budget).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    ensure(worst < 1e-12, format!("worst affine defect {worst:.2e}"))
}

fn weighted_sum_monotone() -> Result<String, String> {
    let budget = LinkBudget::default();
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=400 {
        let p = 20.0 * k as f64 / 400.0;
        let v = fading::weighted_sum_throughput(p, 0.4, 0.0, &budget).unwrap();
        if v <= prev {
            return Err(format!("not increasing at p = {p}"));
        }
        prev = v;
    }
    Ok("strictly increasing in p at beta = 0".into())
}

fn grid_exponential_quadrature() -> Result<String, String> {
    let grid = grid801();
    let vals: Vec<f64> = grid.nodes().iter().map(|x| (-x).exp()).collect();
    let mass = grid.integrate(&vals);
    let expect = 1.0 - (-8.0f64).exp();
    let gap = (mass - expect).abs();
    ensure(gap < 1e-6, format!("|quadrature - (1 - e^-8)| = {gap:.2e}"))
}

fn kernel_column_mass() -> Result<String, String> {
    let grid = grid801();
    for &alpha in &[0.01, 0.1, 1.0] {
        let k = TransitionKernel::new(Arc::clone(&grid), fp(alpha));
        for j in (0..grid.len()).step_by(40) {
            let tail = 1.0 - fading::outage_cdf(grid.gamma_max(), grid.nodes()[j], fp(alpha)).unwrap();
            let mass = k.column_mass(j);
            if !(mass >= 1.0 - tail - 1e-4 && mass <= 1.0 + 1e-12) {
                return Err(format!("alpha={alpha} column {j}: mass {mass}, tail {tail}"));
            }
        }
    }
    Ok("columns within [1 - tail - 1e-4, 1] for alpha in {0.01, 0.1, 1}".into())
}

fn predict_stationary_fixed_point() -> Result<String, String> {
    let grid = grid801();
    let mut worst: f64 = 0.0;
    for &alpha in &[0.01, 0.05, 0.1, 0.5, 1.0] {
        let kernel = TransitionKernel::new(Arc::clone(&grid), fp(alpha));
        let prior = belief::init_prior(&grid);
        let out = belief::predict(&prior, &kernel).map_err(|e| e.to_string())?;
        let sup = out
            .density()
            .iter()
            .zip(prior.density())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(sup);
    }
    ensure(worst < 1e-3, format!("worst sup-norm {worst:.2e}"))
}

fn predict_point_mass_mean() -> Result<String, String> {
    let grid = grid801();
    let alpha = 0.3;
    let kernel = TransitionKernel::new(Arc::clone(&grid), fp(alpha));
    let j = 250;
    let gp = grid.nodes()[j];
    let mut density = vec![0.0; grid.len()];
    density[j] = 1.0 / grid.weights()[j];
    let b = Belief::from_unnormalized(Arc::clone(&grid), density);
    let out = belief::predict(&b, &kernel).map_err(|e| e.to_string())?;
    let expect = (1.0 - alpha) * (1.0 - alpha) * gp + fp(alpha).innovation_variance();
    let gap = (out.mean() - expect).abs();
    ensure(gap < 5e-3, format!("|mean - noncentral mean| = {gap:.2e}"))
}

fn likelihood_mixture_identity() -> Result<String, String> {
    let grid = grid801();
    let budget = LinkBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let density: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let b = Belief::from_unnormalized(Arc::clone(&grid), density);
        let power = rng.random_range(0.0..20.0);
        let th = fading::gamma_threshold(power, &budget).unwrap();
        let p_ack: f64 = grid
            .weights()
            .iter()
            .zip(grid.nodes())
            .zip(b.density())
            .filter(|((_, g), _)| **g >= th)
            .map(|((w, _), d)| w * d)
            .sum();
        let p_nack = b.mass() - p_ack;
        let (ba, _) = belief::likelihood_update(
            &b,
            &ArqObservation { ack: true, power_used: power },
            &budget,
        )
        .unwrap();
        let (bn, _) = belief::likelihood_update(
            &b,
            &ArqObservation { ack: false, power_used: power },
            &budget,
        )
        .unwrap();
        for i in 0..grid.len() {
            let mix = p_ack * ba.density()[i] + p_nack * bn.density()[i];
            worst = worst.max((mix - b.density()[i]).abs());
        }
    }
    ensure(worst < 1e-9, format!("worst nodewise defect {worst:.2e}"))
}

fn filter_three_state_oracle() -> Result<String, String> {
    let grid = Arc::new(GammaGrid::from_parts(vec![0.0, 4.0, 8.0], vec![1.0, 1.0, 1.0]).unwrap());
    let values = vec![0.6, 0.2, 0.1, 0.3, 0.5, 0.3, 0.1, 0.3, 0.6];
    let kernel = TransitionKernel::from_matrix(Arc::clone(&grid), values, fp(0.5)).unwrap();
    let budget = LinkBudget::new(1.0, 10.0, 1.0, 1.0, 1.0, 1.0, 2.0f64.ln()).unwrap();
    let prior: Vec<f64> = {
        let raw: Vec<f64> = grid.nodes().iter().map(|g| (-g).exp()).collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / z).collect()
    };
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for t in 1..=6usize {
        for bits in 0..(1u32 << t) {
            let acks: Vec<bool> = (0..t).map(|s| bits >> s & 1 == 1).collect();
            let thresholds: Vec<f64> =
                (0..t).map(|s| if s % 2 == 0 { 2.0 } else { 6.0 }).collect();

            // brute force over the discrete chain
            let mut dist = prior.clone();
            let mut impossible = false;
            for (&ack, &th) in acks.iter().zip(&thresholds) {
                let mut next = vec![0.0; 3];
                for (i, nx) in next.iter_mut().enumerate() {
                    let gi = grid.nodes()[i];
                    let ind = if ack { gi >= th } else { gi < th };
                    if ind {
                        *nx = (0..3).map(|j| kernel.value(i, j) * dist[j]).sum();
                    }
                }
                let z: f64 = next.iter().sum();
                if z < 1e-300 {
                    impossible = true;
                    break;
                }
                dist = next.into_iter().map(|v| v / z).collect();
            }

            // grid filter
            let mut b = Belief::from_unnormalized(Arc::clone(&grid), prior.clone());
            let mut reset = false;
            for (&ack, &th) in acks.iter().zip(&thresholds) {
                b = belief::predict(&b, &kernel).unwrap();
                let (nb, r) = belief::likelihood_update(
                    &b,
                    &ArqObservation { ack, power_used: th - 1.0 },
                    &budget,
                )
                .unwrap();
                b = nb;
                reset |= r;
            }

            if impossible {
                if !reset {
                    return Err(format!("sequence {bits:b} (T={t}): filter missed a dead end"));
                }
            } else {
                if reset {
                    return Err(format!("sequence {bits:b} (T={t}): spurious reset"));
                }
                for (got, expect) in b.density().iter().zip(&dist) {
                    worst = worst.max((got - expect).abs());
                }
                compared += 1;
            }
        }
    }
    ensure(
        worst < 1e-6,
        format!("worst posterior gap {worst:.2e} over {compared} feasible sequences"),
    )
}

fn outage_mass_endpoints() -> Result<String, String> {
    let grid = grid801();
    let prior = belief::init_prior(&grid);
    let at_zero = belief::outage_mass(&prior, 0.0);
    let at_max = belief::outage_mass(&prior, 8.0);
    let mid = belief::outage_mass(&prior, 10.0 / 95.0);
    let expect_mid = 0.099_945_759_695_825_92;
    ensure(
        at_zero == 0.0 && (at_max - 1.0).abs() < 1e-9 && (mid - expect_mid).abs() < 1e-4,
        format!("mass(0) = {at_zero}, mass(gamma_max) = {at_max}, mass(th0) = {mid}"),
    )
}

fn ar1_stationary_moments() -> Result<String, String> {
    // autocorrelation inflates the variance of the time average; 8e-3 is the
    // 3 sigma band at alpha = 0.3 over 4e5 packets
    let trace = channel::gen_trace(fp(0.3), 400_000, 5, ChannelModel::Ar1).unwrap();
    let mean: f64 = trace.gains.iter().sum::<f64>() / trace.gains.len() as f64;
    ensure((mean - 1.0).abs() < 8e-3, format!("mean gain {mean:.5}"))
}

fn ar1_iid_ks() -> Result<String, String> {
    let n = 200_000;
    let trace = channel::gen_trace(fp(1.0), n, 11, ChannelModel::Ar1).unwrap();
    let mut gains = trace.gains;
    gains.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ks: f64 = 0.0;
    for (i, g) in gains.iter().enumerate() {
        let cdf = 1.0 - (-g).exp();
        ks = ks.max((cdf - i as f64 / n as f64).abs());
        ks = ks.max((cdf - (i + 1) as f64 / n as f64).abs());
    }
    ensure(ks < 0.004, format!("KS statistic {ks:.5} over {n} samples"))
}

fn jakes_lag1_correlation() -> Result<String, String> {
    // squared-magnitude autocovariance of a Rayleigh process with amplitude
    // correlation rho has lag-1 autocorrelation rho^2
    for &alpha in &[0.1, 0.5] {
        let n = 30_000;
        let mut acc = 0.0;
        let reps = 4;
        for seed in 0..reps {
            let trace = channel::gen_trace(fp(alpha), n, 50 + seed, ChannelModel::Jakes).unwrap();
            let g = &trace.gains;
            let mean = g.iter().sum::<f64>() / n as f64;
            let var = g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
            let cov = g
                .windows(2)
                .map(|w| (w[0] - mean) * (w[1] - mean))
                .sum::<f64>()
                / (n - 1) as f64;
            acc += cov / var;
        }
        let rho2 = acc / reps as f64;
        let expect = (1.0 - alpha) * (1.0 - alpha);
        if (rho2 - expect).abs() > 0.04 {
            return Err(format!("alpha={alpha}: gain lag-1 autocorr {rho2:.4} vs {expect:.4}"));
        }
    }
    Ok("gain autocorrelation matches (1 - alpha)^2 for alpha in {0.1, 0.5}".into())
}

fn decorrelation_packet_counts() -> Result<String, String> {
    let a = channel::packets_for_decorrelation(fp(0.1)).unwrap();
    let b = channel::packets_for_decorrelation(fp(0.5)).unwrap();
    ensure(
        a == 110 && b == 17 && channel::packets_for_decorrelation(fp(1.0)).is_err(),
        format!("alpha 0.1 -> {a}, alpha 0.5 -> {b}"),
    )
}

fn argmax_scale_invariance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let vals: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let base = policy::argmax_strict(vals.iter().copied());
        for &k in &[1e-3, 0.7, 42.0] {
            if policy::argmax_strict(vals.iter().map(|v| v * k)) != base {
                return Err(format!("argmax moved under scale {k}"));
            }
        }
    }
    Ok("argmax invariant under positive scaling".into())
}

fn greedy_cg_arq_point_mass() -> Result<String, String> {
    let grid = grid801();
    let kernel = TransitionKernel::new(Arc::clone(&grid), fp(0.1));
    let budget = LinkBudget::default();
    let pg = PowerGrid::uniform(201, budget.p_max).unwrap();
    for &j in &[20usize, 150, 400] {
        let gp = grid.nodes()[j];
        let mut density = vec![0.0; grid.len()];
        density[j] = 1.0 / grid.weights()[j];
        let point = Belief::from_unnormalized(Arc::clone(&grid), density);
        let predicted = belief::predict(&point, &kernel).unwrap();
        for &beta in &[0.4, 0.9] {
            let (p_cg, _) = policy::greedy_power_cg(gp, beta, fp(0.1), &budget, &pg).unwrap();
            let (p_arq, _) = policy::greedy_power_arq(&predicted, beta, &budget, &pg).unwrap();
            if (p_cg - p_arq).abs() > pg.step() + 1e-12 {
                return Err(format!("node {j} beta {beta}: cg {p_cg} vs arq {p_arq}"));
            }
        }
    }
    Ok("delayed-gain and predicted-point-mass choices agree within one step".into())
}

fn dual_policy_consistency() -> Result<String, String> {
    let grid = grid801();
    let budget = LinkBudget::default();
    let pg = PowerGrid::uniform(201, budget.p_max).unwrap();
    let policy = policy::solve_cg_constrained(fp(0.1), 0.25, &budget, &grid, &pg)
        .map_err(|e| e.to_string())?;
    let beta = policy.lambda / (policy.lambda + budget.r_o);
    let mut disagreements = 0usize;
    for (j, &g) in grid.nodes().iter().enumerate().step_by(10) {
        let (p, _) = policy::greedy_power_cg(g, beta, fp(0.1), &budget, &pg).unwrap();
        if (p - policy.powers()[j]).abs() > pg.step() + 1e-12 {
            disagreements += 1;
        }
    }
    ensure(
        disagreements == 0,
        format!(
            "lambda {:.4} (beta {:.4}); {} sampled nodes disagree",
            policy.lambda, beta, disagreements
        ),
    )
}

fn dominance_ordering() -> Result<String, String> {
    let cfg = SimConfig {
        budget: LinkBudget::default(),
        fading: fp(0.1),
        betas: vec![0.5],
        realizations: 12,
        packets: PacketCount::Auto,
        master_seed: 9,
        policy: PolicyKind::Cg,
        model: ChannelModel::Ar1,
        grid: Default::default(),
    };
    let sim = Simulator::new(cfg).map_err(|e| e.to_string())?;
    let cg = sim.run_realizations(PolicyKind::Cg, 0.5).map_err(|e| e.to_string())?;
    let arq = sim.run_realizations(PolicyKind::Arq, 0.5).map_err(|e| e.to_string())?;
    let nocsi = sim.run_realizations(PolicyKind::NoCsi, 0.5).map_err(|e| e.to_string())?;
    let mean = |v: &[crate::sim::TraceStats]| {
        v.iter().map(|s| s.weighted_tp).sum::<f64>() / v.len() as f64
    };
    let se_diff = |hi: &[crate::sim::TraceStats], lo: &[crate::sim::TraceStats]| {
        let diffs: Vec<f64> = hi
            .iter()
            .zip(lo)
            .map(|(a, b)| a.weighted_tp - b.weighted_tp)
            .collect();
        let m = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - m) * (d - m)).sum::<f64>()
            / (diffs.len() - 1) as f64;
        (m, (var / diffs.len() as f64).sqrt())
    };
    let (d1, s1) = se_diff(&cg, &arq);
    let (d2, s2) = se_diff(&arq, &nocsi);
    ensure(
        d1 >= -2.0 * s1 && d2 >= -2.0 * s2,
        format!(
            "cg {:.4} >= arq {:.4} >= nocsi {:.4} (paired gaps {d1:.4}, {d2:.4})",
            mean(&cg),
            mean(&arq),
            mean(&nocsi)
        ),
    )
}
