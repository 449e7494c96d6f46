//! End-to-end acceptance suite.
//!
//! One test per criterion; each prints a `criterion N PASS/FAIL` line with the
//! measured evidence (run with `-- --nocapture` to see them). Criterion 10
//! (byte-identical CLI reruns) lives in the CLI crate's acceptance tests.

use std::sync::Arc;
use std::time::{Duration, Instant};

use cogpower_core::{
    belief, fading, policy, ChannelModel, FadingParams, GammaGrid, LinkBudget,
    PacketCount, ParetoPoint, PolicyKind, PowerGrid, SimConfig, Simulator, TraceStats,
    TransitionKernel,
};

fn fp(alpha: f64) -> FadingParams {
    FadingParams::new(alpha).unwrap()
}

fn budget() -> LinkBudget {
    LinkBudget::default()
}

fn base_config(alpha: f64, policy: PolicyKind, model: ChannelModel) -> SimConfig {
    SimConfig {
        budget: budget(),
        fading: fp(alpha),
        betas: SimConfig::default_betas(),
        realizations: 100,
        packets: PacketCount::Auto,
        master_seed: 2024,
        policy,
        model,
        grid: Default::default(),
    }
}

/// Run a criterion body, print its pass/fail line, enforce the time budget.
fn criterion(
    number: u32,
    name: &str,
    budget: Duration,
    body: impl FnOnce() -> Result<String, String>,
) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match &outcome {
        Ok(detail) => println!(
            "criterion {number} PASS ({elapsed:.1?}): {name}: {detail}"
        ),
        Err(detail) => println!(
            "criterion {number} FAIL ({elapsed:.1?}): {name}: {detail}"
        ),
    }
    assert!(outcome.is_ok(), "criterion {number} {name}: {}", outcome.unwrap_err());
    assert!(
        elapsed < budget,
        "criterion {number} exceeded its {budget:?} runtime budget: {elapsed:?}"
    );
}

// Composite Simpson; the oracles here stay independent of the library's
// internal quadrature helpers.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        sum += f(a + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn conditional_mass(f: FadingParams, gamma_prev: f64, upper: f64) -> f64 {
    let c = f.innovation_variance();
    let om2 = (1.0 - f.alpha()).powi(2);
    let std = (c * c + 2.0 * c * om2 * gamma_prev).sqrt();
    let h = (c.min(std) / 10.0).min(0.01);
    let n = ((upper / h).ceil() as usize).clamp(2000, 400_000);
    simpson(|g| fading::cond_pdf(g, gamma_prev, f).unwrap(), 0.0, upper, n)
}

#[test]
fn criterion_01_transition_pdf_exactness() {
    criterion(1, "transition pdf exactness", Duration::from_secs(5), || {
        let mut worst_mass: f64 = 0.0;
        let mut worst_cdf: f64 = 0.0;
        for &alpha in &[0.01, 0.05, 0.1, 0.5, 1.0] {
            for &gp in &[0.1, 1.0, 4.0, 8.0] {
                let f = fp(alpha);
                let c = f.innovation_variance();
                let om2 = (1.0 - alpha) * (1.0 - alpha);
                let mut upper = om2 * gp + c + 1.0;
                while 1.0 - fading::outage_cdf(upper, gp, f).unwrap() > 1e-9 {
                    upper += 1.0;
                }
                let mass = conditional_mass(f, gp, upper);
                worst_mass = worst_mass.max((mass - 1.0).abs());
                // CDF agreement at thresholds below, at, and above the mode
                let mean = om2 * gp + c;
                for th in [0.5 * mean, mean, (mean + 1.0).min(upper)] {
                    let quad = conditional_mass(f, gp, th);
                    let marcum = fading::outage_cdf(th, gp, f).unwrap();
                    worst_cdf = worst_cdf.max((quad - marcum).abs());
                }
            }
        }
        if worst_mass < 1e-6 && worst_cdf < 1e-6 {
            Ok(format!("|mass-1| <= {worst_mass:.2e}, |quad-marcum| <= {worst_cdf:.2e} on the 5x4 grid"))
        } else {
            Err(format!("mass defect {worst_mass:.2e}, cdf defect {worst_cdf:.2e}"))
        }
    });
}

#[test]
fn criterion_02_stationarity_fixed_point() {
    criterion(2, "predict fixes the exponential prior", Duration::from_secs(10), || {
        let grid = Arc::new(GammaGrid::uniform(801, 8.0).unwrap());
        let mut worst: f64 = 0.0;
        for &alpha in &[0.01, 0.05, 0.1, 0.5, 1.0] {
            let kernel = TransitionKernel::new(Arc::clone(&grid), fp(alpha));
            let prior = belief::init_prior(&grid);
            let out = belief::predict(&prior, &kernel).unwrap();
            let sup = out
                .density()
                .iter()
                .zip(prior.density())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(sup);
        }
        if worst < 1e-3 {
            Ok(format!("worst sup-norm {worst:.2e} over alpha in {{0.01,0.05,0.1,0.5,1}}"))
        } else {
            Err(format!("sup-norm {worst:.2e} exceeds 1e-3"))
        }
    });
}

#[test]
fn criterion_03_belief_filter_oracle() {
    criterion(3, "grid filter matches brute-force Bayes", Duration::from_secs(30), || {
        let grid = Arc::new(
            GammaGrid::from_parts(vec![0.0, 4.0, 8.0], vec![1.0, 1.0, 1.0]).unwrap(),
        );
        let matrix = vec![0.55, 0.25, 0.05, 0.35, 0.5, 0.35, 0.1, 0.25, 0.6];
        let kernel =
            TransitionKernel::from_matrix(Arc::clone(&grid), matrix.clone(), fp(0.5)).unwrap();
        // threshold t maps to power t - 1 under this budget
        let chain_budget = LinkBudget::new(1.0, 10.0, 1.0, 1.0, 1.0, 1.0, 2.0f64.ln()).unwrap();
        let prior = vec![0.5, 0.3, 0.2];

        let mut worst: f64 = 0.0;
        let mut feasible = 0usize;
        for t in 1..=8usize {
            for bits in 0..(1u32 << t) {
                let acks: Vec<bool> = (0..t).map(|s| bits >> s & 1 == 1).collect();
                let thresholds: Vec<f64> =
                    (0..t).map(|s| if s % 3 == 2 { 6.0 } else { 2.0 }).collect();

                // brute force over all state paths, folded
                let mut dist = prior.clone();
                let mut impossible = false;
                for (&ack, &th) in acks.iter().zip(&thresholds) {
                    let mut next = vec![0.0; 3];
                    for (i, nx) in next.iter_mut().enumerate() {
                        let keep = if ack { grid.nodes()[i] >= th } else { grid.nodes()[i] < th };
                        if keep {
                            *nx = (0..3).map(|j| matrix[i * 3 + j] * dist[j]).sum();
                        }
                    }
                    let z: f64 = next.iter().sum();
                    if z < 1e-300 {
                        impossible = true;
                        break;
                    }
                    dist = next.into_iter().map(|v| v / z).collect();
                }

                let mut b = belief::Belief::from_density(&grid, prior.clone()).unwrap();
                let mut reset = false;
                for (&ack, &th) in acks.iter().zip(&thresholds) {
                    b = belief::predict(&b, &kernel).unwrap();
                    let (nb, r) = belief::likelihood_update(
                        &b,
                        &belief::ArqObservation { ack, power_used: th - 1.0 },
                        &chain_budget,
                    )
                    .unwrap();
                    b = nb;
                    reset |= r;
                }

                if impossible {
                    if !reset {
                        return Err(format!("T={t} bits={bits:b}: filter missed a dead end"));
                    }
                } else {
                    if reset {
                        return Err(format!("T={t} bits={bits:b}: spurious filter reset"));
                    }
                    for (got, want) in b.density().iter().zip(&dist) {
                        worst = worst.max((got - want).abs());
                    }
                    feasible += 1;
                }
            }
        }
        if worst <= 1e-6 {
            Ok(format!("worst posterior error {worst:.2e} over {feasible} feasible ARQ sequences, T <= 8"))
        } else {
            Err(format!("posterior error {worst:.2e} over {feasible} sequences"))
        }
    });
}

#[test]
fn criterion_04_constrained_policy_reproduction() {
    criterion(4, "constrained policy shape and constraint", Duration::from_secs(60), || {
        let grid = Arc::new(GammaGrid::uniform(801, 8.0).unwrap());
        let pg = PowerGrid::uniform(201, 20.0).unwrap();
        let policy = policy::solve_cg_constrained(fp(0.1), 0.25, &budget(), &grid, &pg)
            .map_err(|e| e.to_string())?;
        let powers = policy.powers();
        let p_max = pg.p_max();
        if powers[0] != p_max {
            return Err(format!("power at smallest gain is {} not p_max", powers[0]));
        }
        if *powers.last().unwrap() != p_max {
            return Err(format!("power at largest gain is {} not p_max", powers.last().unwrap()));
        }
        let interior_min = powers.iter().cloned().fold(f64::INFINITY, f64::min);
        if interior_min >= p_max {
            return Err("no interior dip below p_max".into());
        }
        let gap = (policy.achieved_outage - 0.25).abs();
        if gap > 5e-4 {
            return Err(format!("expected outage {} misses 0.25 by {gap:.2e}", policy.achieved_outage));
        }
        Ok(format!(
            "p(0) = p(gamma_max) = {p_max}, interior min {interior_min:.1}, outage {:.6} (lambda {:.3})",
            policy.achieved_outage, policy.lambda
        ))
    });
}

#[test]
fn criterion_05_natural_outage_anchor() {
    criterion(5, "natural outage anchors primary throughput", Duration::from_secs(900), || {
        let r_o = budget().r_o;
        let mut details = Vec::new();
        for &alpha in &[0.05, 0.1] {
            let sim = Simulator::new(base_config(alpha, PolicyKind::Cg, ChannelModel::Ar1))
                .map_err(|e| e.to_string())?;
            let stats = sim.run_realizations(PolicyKind::Cg, 0.99).map_err(|e| e.to_string())?;
            let mean_primary =
                stats.iter().map(|s| s.primary_tp).sum::<f64>() / stats.len() as f64;
            let ratio = mean_primary / r_o;
            if !(0.85..=0.95).contains(&ratio) {
                return Err(format!("alpha={alpha}: primary/R_o = {ratio:.4} outside [0.85, 0.95]"));
            }
            details.push(format!("alpha={alpha}: primary/R_o = {ratio:.4}"));
        }
        Ok(details.join("; "))
    });
}

fn paired_se(hi: &[TraceStats], lo: &[TraceStats]) -> (f64, f64) {
    let diffs: Vec<f64> =
        hi.iter().zip(lo).map(|(a, b)| a.weighted_tp - b.weighted_tp).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn curve_area(points: &[ParetoPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].primary_tp - w[0].primary_tp) * 0.5 * (w[0].secondary_tp + w[1].secondary_tp))
        .sum()
}

#[test]
fn criterion_06_cg_dominates_arq() {
    criterion(6, "delayed CSI dominates ARQ feedback", Duration::from_secs(600), || {
        let sim = Simulator::new(base_config(0.05, PolicyKind::Cg, ChannelModel::Ar1))
            .map_err(|e| e.to_string())?;
        let betas = SimConfig::default_betas();
        let mut cg_points = Vec::new();
        let mut arq_points = Vec::new();
        let mut worst_margin = f64::INFINITY;
        for &beta in &betas {
            let cg = sim.run_realizations(PolicyKind::Cg, beta).map_err(|e| e.to_string())?;
            let arq = sim.run_realizations(PolicyKind::Arq, beta).map_err(|e| e.to_string())?;
            let (diff, se) = paired_se(&cg, &arq);
            worst_margin = worst_margin.min(diff + 2.0 * se);
            if diff < -2.0 * se {
                return Err(format!(
                    "beta={beta:.3}: ARQ beats CG by {:.4} (paired SE {se:.4})",
                    -diff
                ));
            }
            cg_points.push(cogpower_core::sim::aggregate(beta, &cg));
            arq_points.push(cogpower_core::sim::aggregate(beta, &arq));
        }
        let a_cg = curve_area(&cg_points);
        let a_arq = curve_area(&arq_points);
        let area_gap = (a_cg - a_arq).abs() / a_cg.abs();
        if area_gap > 0.10 {
            return Err(format!("Pareto area gap {:.1}% exceeds 10%", 100.0 * area_gap));
        }
        Ok(format!(
            "CG >= ARQ - 2SE at all 20 betas (tightest margin {worst_margin:.4}); area gap {:.2}% of CG area {a_cg:.3}",
            100.0 * area_gap
        ))
    });
}

#[test]
fn criterion_07_correlation_monotonicity() {
    criterion(7, "slower fading helps the ARQ policy", Duration::from_secs(1800), || {
        let beta = 0.5;
        let alphas = [0.01, 0.05, 0.1, 1.0];
        let mut results = Vec::new();
        for &alpha in &alphas {
            let mut cfg = base_config(alpha, PolicyKind::Arq, ChannelModel::Ar1);
            cfg.betas = vec![beta];
            let sim = Simulator::new(cfg).map_err(|e| e.to_string())?;
            let stats = sim.run_realizations(PolicyKind::Arq, beta).map_err(|e| e.to_string())?;
            let n = stats.len() as f64;
            let mean = stats.iter().map(|s| s.weighted_tp).sum::<f64>() / n;
            let var = stats
                .iter()
                .map(|s| (s.weighted_tp - mean) * (s.weighted_tp - mean))
                .sum::<f64>()
                / (n - 1.0);
            results.push((alpha, mean, (var / n).sqrt()));
        }
        let mut flagged = Vec::new();
        for w in results.windows(2) {
            let (a_lo, m_lo, se_lo) = w[0];
            let (a_hi, m_hi, se_hi) = w[1];
            let se = (se_lo * se_lo + se_hi * se_hi).sqrt();
            if m_lo < m_hi - 2.0 * se {
                return Err(format!(
                    "alpha {a_lo} ({m_lo:.4}) below alpha {a_hi} ({m_hi:.4}) beyond 2 SE"
                ));
            }
            if m_lo - m_hi <= 2.0 * se {
                flagged.push(format!("gap {a_lo} vs {a_hi} within 2 SE"));
            }
        }
        let chain = results
            .iter()
            .map(|(a, m, _)| format!("alpha {a}: {m:.4}"))
            .collect::<Vec<_>>()
            .join(" >= ");
        let note = if flagged.is_empty() {
            "all gaps positive beyond 2 SE".to_string()
        } else {
            format!("flagged: {}", flagged.join(", "))
        };
        Ok(format!("{chain}; {note}"))
    });
}

#[test]
fn criterion_08_alpha_one_degeneracy() {
    criterion(8, "ARQ equals no-CSI under i.i.d. gains", Duration::from_secs(3600), || {
        let mut cfg = base_config(1.0, PolicyKind::Arq, ChannelModel::Ar1);
        cfg.packets = PacketCount::Fixed(500);
        let sim = Simulator::new(cfg).map_err(|e| e.to_string())?;
        let mut worst_gap: f64 = 0.0;
        for &beta in &SimConfig::default_betas() {
            let arq = sim.run_realizations(PolicyKind::Arq, beta).map_err(|e| e.to_string())?;
            let nocsi =
                sim.run_realizations(PolicyKind::NoCsi, beta).map_err(|e| e.to_string())?;
            let (diff, se) = paired_se(&arq, &nocsi);
            if diff.abs() > 2.0 * se.max(1e-300) && diff.abs() > 1e-12 {
                return Err(format!("beta={beta:.3}: |ARQ - noCSI| = {:.3e} beyond 2 SE", diff.abs()));
            }
            worst_gap = worst_gap.max(diff.abs());
        }
        Ok(format!("sweeps agree at all 20 betas, worst |gap| = {worst_gap:.2e} nats"))
    });
}

#[test]
fn criterion_09_jakes_cross_check() {
    criterion(9, "AR(1) and Jakes traces give matching CG curves", Duration::from_secs(1800), || {
        let mut details = Vec::new();
        for &(alpha, tol) in &[(0.1, 0.05), (0.05, 0.15)] {
            let ar1 = Simulator::new(base_config(alpha, PolicyKind::Cg, ChannelModel::Ar1))
                .map_err(|e| e.to_string())?
                .sweep()
                .map_err(|e| e.to_string())?;
            let jakes = Simulator::new(base_config(alpha, PolicyKind::Cg, ChannelModel::Jakes))
                .map_err(|e| e.to_string())?
                .sweep()
                .map_err(|e| e.to_string())?;
            // pointwise gaps normalized by the curve scale on each axis
            let pri_scale = ar1.iter().map(|p| p.primary_tp).fold(0.0f64, f64::max);
            let sec_scale = ar1.iter().map(|p| p.secondary_tp).fold(0.0f64, f64::max);
            let mut worst: f64 = 0.0;
            for (a, j) in ar1.iter().zip(&jakes) {
                worst = worst.max((a.primary_tp - j.primary_tp).abs() / pri_scale);
                worst = worst.max((a.secondary_tp - j.secondary_tp).abs() / sec_scale);
            }
            if worst > tol {
                return Err(format!(
                    "alpha={alpha}: worst pointwise mismatch {:.1}% exceeds {:.0}%",
                    100.0 * worst,
                    100.0 * tol
                ));
            }
            details.push(format!("alpha={alpha}: worst mismatch {:.2}%", 100.0 * worst));
        }
        Ok(details.join("; "))
    });
}
