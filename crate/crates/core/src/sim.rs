//! Monte Carlo harness: run power policies over generated gain traces and
//! sweep the weighting parameter to trace primary/secondary throughput
//! trade-off curves.
//!
//! Realizations are independent and run in parallel (ordered collection keeps
//! the aggregate bit-identical for a fixed master seed regardless of the
//! thread count); each realization is strictly sequential because the ARQ
//! belief recursion feeds forward.

use std::sync::Arc;

use crate::belief::{self, Belief, GammaGrid, TransitionKernel};
use crate::channel::{self, ChannelModel, ChannelTrace};
use crate::fading::{self, FadingParams, LinkBudget};
use crate::policy::{self, PowerGrid};
use crate::{par, Error, Result};

/// Which feedback the power policy consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Perfect one-packet-delayed gain.
    Cg,
    /// One-bit ACK/NACK through the belief filter.
    Arq,
    /// No feedback: the stationary prior every packet.
    NoCsi,
}

/// Packets per realization: a fixed count or the decorrelation length of the
/// fading process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketCount {
    /// `packets_for_decorrelation` for the configured alpha; 500 when
    /// alpha = 1 (the formula degenerates for i.i.d. gains).
    Auto,
    Fixed(usize),
}

/// Discretization sizes for the gain and power axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub gamma_max: f64,
    pub gamma_nodes: usize,
    pub power_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { gamma_max: 8.0, gamma_nodes: 801, power_nodes: 201 }
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub budget: LinkBudget,
    pub fading: FadingParams,
    /// Weighting parameter values, strictly increasing within [0, 0.99].
    pub betas: Vec<f64>,
    pub realizations: usize,
    pub packets: PacketCount,
    pub master_seed: u64,
    pub policy: PolicyKind,
    pub model: ChannelModel,
    pub grid: GridSpec,
}

impl SimConfig {
    /// 20 uniformly spaced weights on [0, 0.99].
    pub fn default_betas() -> Vec<f64> {
        (0..20).map(|i| i as f64 * (0.99 / 19.0)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::invalid("at least one beta value is required"));
        }
        for &b in &self.betas {
            if !(0.0..=0.99).contains(&b) {
                return Err(Error::invalid(format!("beta {b} outside [0, 0.99]")));
            }
        }
        if self.betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("beta values must be strictly increasing"));
        }
        if self.realizations == 0 {
            return Err(Error::invalid("realizations must be at least 1"));
        }
        if let PacketCount::Fixed(0) = self.packets {
            return Err(Error::invalid("packet count must be at least 1"));
        }
        Ok(())
    }

    fn resolve_packets(&self) -> Result<usize> {
        match self.packets {
            PacketCount::Fixed(n) => Ok(n),
            PacketCount::Auto => {
                if self.fading.alpha() >= 1.0 {
                    Ok(500)
                } else {
                    channel::packets_for_decorrelation(self.fading)
                }
            }
        }
    }
}

/// Per-realization accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStats {
    /// Time average of the per-packet weighted-sum throughput (nats), with
    /// the model outage probability inside each term.
    pub weighted_tp: f64,
    /// Realized primary throughput `R_o (1 - outage fraction)` in nats.
    pub primary_tp: f64,
    /// Mean secondary Shannon rate in nats.
    pub secondary_rate: f64,
    /// Fraction of packets whose gain fell below the active threshold.
    pub outage_frac: f64,
    /// Belief-filter restarts triggered by numerically impossible feedback.
    pub belief_resets: u64,
}

/// Mean and standard error of every [`TraceStats`] field across realizations
/// at one beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub beta: f64,
    pub weighted_tp: f64,
    pub weighted_tp_se: f64,
    pub primary_tp: f64,
    pub primary_tp_se: f64,
    pub secondary_tp: f64,
    pub secondary_tp_se: f64,
    pub outage_frac: f64,
    pub outage_frac_se: f64,
    pub belief_resets: u64,
}

/// One row of a per-packet trace dump.
#[derive(Debug, Clone, Copy)]
pub struct PacketRecord {
    pub t: usize,
    pub gamma: f64,
    pub power: f64,
    pub gamma_th: f64,
    pub outage: bool,
    pub ack: bool,
    pub predicted_outage_prob: f64,
    pub weighted_tp: f64,
}

/// Shared immutable state for running traces under one configuration.
pub struct Simulator {
    cfg: SimConfig,
    grid: Arc<GammaGrid>,
    kernel: TransitionKernel,
    pgrid: PowerGrid,
    prior: Belief,
    packets: usize,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Arc::new(GammaGrid::uniform(cfg.grid.gamma_nodes, cfg.grid.gamma_max)?);
        let pgrid = PowerGrid::uniform(cfg.grid.power_nodes, cfg.budget.p_max)?;
        let kernel = TransitionKernel::new(Arc::clone(&grid), cfg.fading);
        let prior = belief::init_prior(&grid);
        let packets = cfg.resolve_packets()?;
        Ok(Self { cfg, grid, kernel, pgrid, prior, packets })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    pub fn grid(&self) -> &Arc<GammaGrid> {
        &self.grid
    }

    pub fn power_grid(&self) -> &PowerGrid {
        &self.pgrid
    }

    /// Trace for one realization index; seeds depend only on the master seed
    /// and the index, so traces match across policies and betas.
    pub fn trace_for(&self, realization: usize) -> ChannelTrace {
        let seed = channel::stream_seed(self.cfg.master_seed, realization as u64);
        channel::gen_trace(self.cfg.fading, self.packets, seed, self.cfg.model)
            .expect("packet count validated at construction")
    }

    pub fn run_trace(&self, kind: PolicyKind, beta: f64, trace: &ChannelTrace) -> Result<TraceStats> {
        self.run_internal(kind, beta, trace, None)
    }

    pub fn run_trace_cg(&self, beta: f64, trace: &ChannelTrace) -> Result<TraceStats> {
        self.run_trace(PolicyKind::Cg, beta, trace)
    }

    pub fn run_trace_arq(&self, beta: f64, trace: &ChannelTrace) -> Result<TraceStats> {
        self.run_trace(PolicyKind::Arq, beta, trace)
    }

    pub fn run_trace_nocsi(&self, beta: f64, trace: &ChannelTrace) -> Result<TraceStats> {
        self.run_trace(PolicyKind::NoCsi, beta, trace)
    }

    /// As [`Simulator::run_trace`], also returning one record per packet.
    pub fn run_trace_recorded(
        &self,
        kind: PolicyKind,
        beta: f64,
        trace: &ChannelTrace,
    ) -> Result<(TraceStats, Vec<PacketRecord>)> {
        let mut records = Vec::with_capacity(trace.gains.len());
        let stats = self.run_internal(kind, beta, trace, Some(&mut records))?;
        Ok((stats, records))
    }

    fn run_internal(
        &self,
        kind: PolicyKind,
        beta: f64,
        trace: &ChannelTrace,
        mut records: Option<&mut Vec<PacketRecord>>,
    ) -> Result<TraceStats> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!("beta must lie in [0, 1], got {beta}")));
        }
        let budget = &self.cfg.budget;
        let fp = self.cfg.fading;
        let n = trace.gains.len();

        let mut weighted_sum = 0.0;
        let mut secondary_sum = 0.0;
        let mut outages = 0u64;
        let mut resets = 0u64;

        // The stationary decision serves three roles: the no-feedback policy,
        // the first delayed-CSI packet, and the ARQ filter start.
        let stationary_decision = {
            let (p, _) = policy::greedy_power_arq(&self.prior, beta, budget, &self.pgrid)?;
            let th = fading::gamma_threshold_raw(p, budget);
            let out = belief::outage_mass(&self.prior, th);
            (p, th, out)
        };

        let mut arq_belief = match kind {
            PolicyKind::Arq => Some(self.prior.clone()),
            _ => None,
        };

        for t in 0..n {
            let (p, th, model_out) = match kind {
                PolicyKind::NoCsi => stationary_decision,
                PolicyKind::Cg => {
                    if t == 0 {
                        stationary_decision
                    } else {
                        let gp = trace.gains[t - 1];
                        let (p, _) = policy::greedy_power_cg(gp, beta, fp, budget, &self.pgrid)?;
                        let th = fading::gamma_threshold_raw(p, budget);
                        (p, th, fading::outage_cdf_raw(th, gp, fp))
                    }
                }
                PolicyKind::Arq => {
                    let b = arq_belief.take().expect("belief present in ARQ mode");
                    let predicted = belief::predict(&b, &self.kernel)?;
                    let (p, _) =
                        policy::greedy_power_arq(&predicted, beta, budget, &self.pgrid)?;
                    let th = fading::gamma_threshold_raw(p, budget);
                    let out = belief::outage_mass(&predicted, th);
                    arq_belief = Some(predicted);
                    (p, th, out)
                }
            };

            let w = fading::weighted_sum_raw(p, model_out, beta, budget);
            let outage = trace.gains[t] < th;
            weighted_sum += w;
            secondary_sum += budget.secondary_rate(p);
            outages += outage as u64;

            if let Some(rec) = records.as_deref_mut() {
                rec.push(PacketRecord {
                    t,
                    gamma: trace.gains[t],
                    power: p,
                    gamma_th: th,
                    outage,
                    ack: !outage,
                    predicted_outage_prob: model_out,
                    weighted_tp: w,
                });
            }

            if let Some(b) = arq_belief.take() {
                let obs = belief::ArqObservation { ack: !outage, power_used: p };
                let (updated, reset) = belief::likelihood_update(&b, &obs, budget)?;
                resets += reset as u64;
                arq_belief = Some(updated);
            }
        }

        let nf = n as f64;
        let outage_frac = outages as f64 / nf;
        Ok(TraceStats {
            weighted_tp: weighted_sum / nf,
            primary_tp: budget.r_o * (1.0 - outage_frac),
            secondary_rate: secondary_sum / nf,
            outage_frac,
            belief_resets: resets,
        })
    }

    /// Run every realization at one beta; entries are ordered by realization
    /// index regardless of the parallelism degree.
    pub fn run_realizations(&self, kind: PolicyKind, beta: f64) -> Result<Vec<TraceStats>> {
        let results = par::map_indexed(self.cfg.realizations, |i| {
            let trace = self.trace_for(i);
            self.run_trace(kind, beta, &trace)
        });
        results.into_iter().collect()
    }

    /// Full sweep over the configured betas with the configured policy.
    pub fn sweep(&self) -> Result<Vec<ParetoPoint>> {
        self.cfg
            .betas
            .iter()
            .map(|&beta| {
                let stats = self.run_realizations(self.cfg.policy, beta)?;
                Ok(aggregate(beta, &stats))
            })
            .collect()
    }
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Collapse per-realization stats into one Pareto point.
pub fn aggregate(beta: f64, stats: &[TraceStats]) -> ParetoPoint {
    let (weighted_tp, weighted_tp_se) = mean_se(stats.iter().map(|s| s.weighted_tp));
    let (primary_tp, primary_tp_se) = mean_se(stats.iter().map(|s| s.primary_tp));
    let (secondary_tp, secondary_tp_se) = mean_se(stats.iter().map(|s| s.secondary_rate));
    let (outage_frac, outage_frac_se) = mean_se(stats.iter().map(|s| s.outage_frac));
    ParetoPoint {
        beta,
        weighted_tp,
        weighted_tp_se,
        primary_tp,
        primary_tp_se,
        secondary_tp,
        secondary_tp_se,
        outage_frac,
        outage_frac_se,
        belief_resets: stats.iter().map(|s| s.belief_resets).sum(),
    }
}
