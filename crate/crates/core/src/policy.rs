//! Secondary power selection.
//!
//! Two greedy maximizers of the instantaneous weighted-sum throughput, one fed
//! by the delayed gain itself and one by the ARQ belief, plus the constrained
//! delayed-CSI policy: maximize the expected secondary rate subject to an
//! expected primary outage cap, solved by per-node exhaustive search inside a
//! Lagrangian dual bisection. The per-node problem is non-convex in the power,
//! so the search scans the whole candidate grid rather than following
//! gradients.

use std::io::Write;
use std::sync::Arc;

use crate::belief::{self, Belief, GammaGrid};
use crate::fading::{self, FadingParams, LinkBudget};
use crate::par;
use crate::{Error, Result};

/// Candidate secondary powers spanning `[0, p_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerGrid {
    values: Vec<f64>,
}

impl PowerGrid {
    /// `n` uniformly spaced candidates from 0 to `p_max` inclusive.
    pub fn uniform(n: usize, p_max: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("power grid needs at least two candidates"));
        }
        if !p_max.is_finite() || p_max <= 0.0 {
            return Err(Error::invalid(format!("p_max must be positive, got {p_max}")));
        }
        let mut values: Vec<f64> =
            (0..n).map(|k| k as f64 * p_max / (n - 1) as f64).collect();
        values[n - 1] = p_max;
        Ok(Self { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn p_max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.values[1] - self.values[0]
    }
}

/// Index of the largest value, scanning in order and keeping the first
/// maximum, so ties resolve to the smallest power.
#[inline]
pub(crate) fn argmax_strict(values: impl Iterator<Item = f64>) -> usize {
    let mut best_idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    best_idx
}

/// Greedy weighted-sum power choice given the delayed gain.
///
/// Returns the maximizing candidate power and the attained weighted-sum
/// throughput; the outage term is the Marcum-Q conditional CDF at that
/// power's threshold.
pub fn greedy_power_cg(
    gamma_prev: f64,
    beta: f64,
    fp: FadingParams,
    budget: &LinkBudget,
    pg: &PowerGrid,
) -> Result<(f64, f64)> {
    if !gamma_prev.is_finite() || gamma_prev < 0.0 {
        return Err(Error::invalid(format!("gamma_prev must be nonnegative, got {gamma_prev}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::invalid(format!("beta must lie in [0, 1], got {beta}")));
    }
    let mut best_p = pg.values[0];
    let mut best_v = f64::NEG_INFINITY;
    for &p in &pg.values {
        let th = fading::gamma_threshold_raw(p, budget);
        let out = fading::outage_cdf_raw(th, gamma_prev, fp);
        let v = fading::weighted_sum_raw(p, out, beta, budget);
        if v > best_v {
            best_v = v;
            best_p = p;
        }
    }
    Ok((best_p, best_v))
}

/// Greedy weighted-sum power choice given the predicted ARQ belief.
///
/// The outage term is the belief mass below each candidate's threshold.
pub fn greedy_power_arq(
    predicted: &Belief,
    beta: f64,
    budget: &LinkBudget,
    pg: &PowerGrid,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::invalid(format!("beta must lie in [0, 1], got {beta}")));
    }
    let thresholds: Vec<f64> =
        pg.values.iter().map(|&p| fading::gamma_threshold_raw(p, budget)).collect();
    let outages = belief::outage_masses_sorted(predicted, &thresholds);
    let mut best_p = pg.values[0];
    let mut best_v = f64::NEG_INFINITY;
    for (&p, &out) in pg.values.iter().zip(&outages) {
        let v = fading::weighted_sum_raw(p, out, beta, budget);
        if v > best_v {
            best_v = v;
            best_p = p;
        }
    }
    Ok((best_p, best_v))
}

/// A delayed-gain to secondary-power mapping together with the dual multiplier
/// and the expectations it achieves under the stationary gain distribution.
#[derive(Debug, Clone)]
pub struct PowerPolicy {
    grid: Arc<GammaGrid>,
    powers: Vec<f64>,
    /// Dual multiplier on the outage constraint (0 when slack).
    pub lambda: f64,
    /// Expected primary outage probability of the policy.
    pub achieved_outage: f64,
    /// Expected secondary rate of the policy in nats.
    pub achieved_rate: f64,
}

impl PowerPolicy {
    #[inline]
    pub fn grid(&self) -> &Arc<GammaGrid> {
        &self.grid
    }

    /// One power per grid node.
    #[inline]
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Dump the policy as `gamma,power` CSV rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"gamma,power\n")?;
        for (g, p) in self.grid.nodes().iter().zip(&self.powers) {
            writeln!(out, "{g},{p}")?;
        }
        Ok(())
    }
}

/// Outage constraint tolerance of the dual bisection.
pub const DUAL_TOLERANCE: f64 = 5e-4;

/// Solve the constrained delayed-CSI problem: maximize the expected secondary
/// rate over per-node powers subject to expected primary outage at most
/// `p_out`, the expectation running over the stationary exponential gain.
///
/// For each multiplier the per-node maximizer of
/// `rate(p) - lambda * outage(p, gamma')` is found by exhaustive scan over the
/// power grid; the multiplier is bisected until the expected outage lands
/// within [`DUAL_TOLERANCE`] of the target or the bracket is exhausted (the
/// feasible endpoint is returned in that case). Gains above the grid occur
/// with probability `e^{-gamma_max}` and are assigned maximum power.
///
/// Returns [`Error::Infeasible`] when even zero secondary power exceeds the
/// target, reporting the natural outage floor.
pub fn solve_cg_constrained(
    fp: FadingParams,
    p_out: f64,
    budget: &LinkBudget,
    grid: &Arc<GammaGrid>,
    pg: &PowerGrid,
) -> Result<PowerPolicy> {
    if !(p_out > 0.0 && p_out <= 1.0) {
        return Err(Error::invalid(format!("P_out must lie in (0, 1], got {p_out}")));
    }
    let n = grid.len();
    let np = pg.values.len();
    let rates: Vec<f64> = pg.values.iter().map(|&p| budget.secondary_rate(p)).collect();
    let thresholds: Vec<f64> =
        pg.values.iter().map(|&p| fading::gamma_threshold_raw(p, budget)).collect();

    // outage[j * np + k]: conditional outage at node j under power candidate k
    let outage_rows = par::map_indexed(n, |j| {
        let gp = grid.nodes()[j];
        thresholds.iter().map(|&th| fading::outage_cdf_raw(th, gp, fp)).collect::<Vec<f64>>()
    });
    let mut outage = Vec::with_capacity(n * np);
    for row in outage_rows {
        outage.extend(row);
    }

    // quadrature weights against the exponential gain density, plus the
    // analytic tail above gamma_max where the policy is pinned at p_max
    let eweights: Vec<f64> = grid
        .weights()
        .iter()
        .zip(grid.nodes())
        .map(|(w, g)| w * (-g).exp())
        .collect();
    let tail_mass = (-grid.gamma_max()).exp();
    let tail_rate = tail_mass * rates[np - 1];
    let tail_outage = tail_mass * outage[(n - 1) * np + (np - 1)];

    let natural_outage: f64 = (0..n).map(|j| eweights[j] * outage[j * np]).sum::<f64>()
        + tail_mass * outage[(n - 1) * np];
    if p_out < natural_outage {
        return Err(Error::Infeasible { natural_outage, target: p_out });
    }

    let eval = |lambda: f64| -> (Vec<usize>, f64, f64) {
        let idx: Vec<usize> = par::map_indexed(n, |j| {
            let row = &outage[j * np..(j + 1) * np];
            argmax_strict(rates.iter().zip(row).map(|(r, o)| r - lambda * o))
        });
        let mut e_rate = tail_rate;
        let mut e_out = tail_outage;
        for j in 0..n {
            e_rate += eweights[j] * rates[idx[j]];
            e_out += eweights[j] * outage[j * np + idx[j]];
        }
        (idx, e_rate, e_out)
    };

    let (idx, rate, out) = eval(0.0);
    if out <= p_out {
        return Ok(finish(grid, pg, idx, 0.0, rate, out));
    }

    // bracket: double lambda until the constraint is met
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut feasible;
    loop {
        let (idx, rate, out) = eval(hi);
        if out <= p_out {
            feasible = (idx, rate, out, hi);
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Infeasible { natural_outage, target: p_out });
        }
    }

    for _ in 0..60 {
        if (feasible.2 - p_out).abs() <= DUAL_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (idx, rate, out) = eval(mid);
        if out <= p_out {
            hi = mid;
            feasible = (idx, rate, out, mid);
        } else {
            lo = mid;
        }
    }

    let (idx, rate, out, lambda) = feasible;
    Ok(finish(grid, pg, idx, lambda, rate, out))
}

fn finish(
    grid: &Arc<GammaGrid>,
    pg: &PowerGrid,
    idx: Vec<usize>,
    lambda: f64,
    rate: f64,
    out: f64,
) -> PowerPolicy {
    PowerPolicy {
        grid: Arc::clone(grid),
        powers: idx.into_iter().map(|k| pg.values[k]).collect(),
        lambda,
        achieved_outage: out,
        achieved_rate: rate,
    }
}
