//! Grid-discretized Bayesian belief over the primary gain.
//!
//! The belief is the filter's sufficient statistic for the ACK/NACK history:
//! a nonnegative density on a fixed gain grid, renormalized to unit quadrature
//! mass after every operation. One-bit observations enter through indicator
//! likelihoods (an ACK is possible only at gains at or above the outage
//! threshold of the power that was used), and the gain evolves through a
//! discretized Chapman-Kolmogorov step.

use std::io::Write;
use std::sync::Arc;

use crate::fading::{self, FadingParams, LinkBudget};
use crate::par;
use crate::{Error, Result};

/// Quadrature grid on the gain axis `[0, gamma_max]`.
///
/// [`GammaGrid::uniform`] builds the production grid: uniformly spaced nodes
/// with composite Simpson weights, which keep the truncated exponential
/// quadrature error near machine precision. [`GammaGrid::from_parts`] admits
/// arbitrary nodes and weights for small hand-built chains.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GammaGrid {
    /// Uniform grid with composite Simpson weights. `n_nodes` must be odd and
    /// at least 3 so the interval count is even.
    pub fn uniform(n_nodes: usize, gamma_max: f64) -> Result<Self> {
        if n_nodes < 3 || n_nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "gamma grid needs an odd node count >= 3, got {n_nodes}"
            )));
        }
        if !gamma_max.is_finite() || gamma_max <= 0.0 {
            return Err(Error::invalid(format!("gamma_max must be positive, got {gamma_max}")));
        }
        let n = n_nodes - 1;
        let h = gamma_max / n as f64;
        // multiply before dividing so grid nodes land on exactly
        // representable values where they exist (1.0, not 100 * 0.01)
        let nodes: Vec<f64> = (0..n_nodes).map(|i| i as f64 * gamma_max / n as f64).collect();
        let weights: Vec<f64> = (0..n_nodes)
            .map(|i| {
                if i == 0 || i == n {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    /// Grid from explicit nodes and weights. Nodes must start at 0, increase
    /// strictly, and weights must be positive.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != weights.len() {
            return Err(Error::invalid("grid needs matching node/weight vectors of length >= 2"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid("grid must start at gamma = 0"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid nodes must be strictly increasing"));
        }
        if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
            return Err(Error::invalid("grid weights must be positive"));
        }
        Ok(Self { nodes, weights })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn gamma_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Quadrature of a nodewise-sampled function.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Discretized Markov kernel of the gain process on a [`GammaGrid`].
///
/// Entry `(i, j)` holds the conditional density of landing at node `i` given
/// node `j`, scaled per column so that the column quadrature equals the exact
/// Marcum-Q mass the continuous kernel places on `[0, gamma_max]`.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    grid: Arc<GammaGrid>,
    /// Row-major `n x n`: values[i * n + j] = K(node_i | node_j).
    values: Vec<f64>,
    alpha: FadingParams,
}

impl TransitionKernel {
    pub fn new(grid: Arc<GammaGrid>, fp: FadingParams) -> Self {
        let n = grid.len();
        let nodes = grid.nodes();
        let rows = par::map_indexed(n, |i| {
            let gi = nodes[i];
            nodes.iter().map(|&gj| fading::cond_pdf_raw(gi, gj, fp)).collect::<Vec<f64>>()
        });
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            values.extend(row);
        }
        // Scale columns to the exact truncated mass.
        let weights = grid.weights();
        let mut scale = vec![0.0; n];
        for (j, s) in scale.iter_mut().enumerate() {
            let mut quad = 0.0;
            for i in 0..n {
                quad += weights[i] * values[i * n + j];
            }
            let mass = fading::outage_cdf_raw(grid.gamma_max(), nodes[j], fp);
            *s = if quad > 0.0 { mass / quad } else { 0.0 };
        }
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] *= scale[j];
            }
        }
        Self { grid, values, alpha: fp }
    }

    /// Kernel from an explicit row-major matrix (for small hand-built chains).
    pub fn from_matrix(grid: Arc<GammaGrid>, values: Vec<f64>, fp: FadingParams) -> Result<Self> {
        if values.len() != grid.len() * grid.len() {
            return Err(Error::invalid("kernel matrix must be n x n for the grid"));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::invalid("kernel entries must be nonnegative"));
        }
        Ok(Self { grid, values, alpha: fp })
    }

    #[inline]
    pub fn grid(&self) -> &Arc<GammaGrid> {
        &self.grid
    }

    #[inline]
    pub fn alpha(&self) -> FadingParams {
        self.alpha
    }

    /// Quadrature mass of column `j`.
    pub fn column_mass(&self, j: usize) -> f64 {
        let n = self.grid.len();
        let weights = self.grid.weights();
        (0..n).map(|i| weights[i] * self.values[i * n + j]).sum()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }
}

/// Normalized probability density over the gain grid.
#[derive(Debug, Clone)]
pub struct Belief {
    grid: Arc<GammaGrid>,
    density: Vec<f64>,
}

/// One-bit link-layer feedback for a transmitted packet, together with the
/// secondary power that was active while it was received.
#[derive(Debug, Clone, Copy)]
pub struct ArqObservation {
    /// `true` for an ACK (correct reception), `false` for a NACK.
    pub ack: bool,
    /// Secondary power in effect for the acknowledged packet.
    pub power_used: f64,
}

impl Belief {
    /// Normalized belief from raw nonnegative node values.
    pub fn from_density(grid: &Arc<GammaGrid>, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::invalid("density length must match the grid"));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("density values must be finite and nonnegative"));
        }
        if grid.integrate(&density) <= 0.0 {
            return Err(Error::invalid("density must carry positive mass"));
        }
        Ok(Self::from_unnormalized(Arc::clone(grid), density))
    }

    pub(crate) fn from_unnormalized(grid: Arc<GammaGrid>, mut density: Vec<f64>) -> Self {
        let mass = grid.integrate(&density);
        let inv = 1.0 / mass;
        for d in &mut density {
            *d *= inv;
        }
        Self { grid, density }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<GammaGrid> {
        &self.grid
    }

    #[inline]
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Total quadrature mass; 1 up to rounding after every public operation.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.density)
    }

    /// Mean gain under the belief.
    pub fn mean(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.grid.nodes())
            .zip(&self.density)
            .map(|((w, g), d)| w * g * d)
            .sum()
    }

    /// Dump the belief as `node,density` CSV rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"node,density\n")?;
        for (g, d) in self.grid.nodes().iter().zip(&self.density) {
            writeln!(out, "{g},{d}")?;
        }
        Ok(())
    }
}

/// Stationary prior: the unit-mean exponential density truncated to the grid.
pub fn init_prior(grid: &Arc<GammaGrid>) -> Belief {
    let density: Vec<f64> = grid.nodes().iter().map(|g| (-g).exp()).collect();
    Belief::from_unnormalized(Arc::clone(grid), density)
}

/// Condition the belief on one ACK/NACK bit.
///
/// An ACK zeroes the density at nodes strictly below the outage threshold of
/// the power that was used; a NACK zeroes nodes at or above it. The result is
/// renormalized. If the surviving mass is below `1e-12` the observation was
/// numerically impossible under the current belief; the filter restarts from
/// the stationary prior and the returned flag is set.
pub fn likelihood_update(
    belief: &Belief,
    obs: &ArqObservation,
    budget: &LinkBudget,
) -> Result<(Belief, bool)> {
    let gamma_th = fading::gamma_threshold(obs.power_used, budget)?;
    let grid = &belief.grid;
    let mut density: Vec<f64> = belief
        .density
        .iter()
        .zip(grid.nodes())
        .map(|(d, g)| {
            let survives = if obs.ack { *g >= gamma_th } else { *g < gamma_th };
            if survives {
                *d
            } else {
                0.0
            }
        })
        .collect();
    let mass = grid.integrate(&density);
    if mass < 1e-12 {
        return Ok((init_prior(grid), true));
    }
    let inv = 1.0 / mass;
    for d in &mut density {
        *d *= inv;
    }
    Ok((Belief { grid: Arc::clone(grid), density }, false))
}

/// Dot product with eight independent accumulators. The summation order is
/// fixed, so results stay bit-identical run to run; the split accumulators
/// break the serial add dependency that a naive fold would pin the loop to.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += xa[k] * xb[k];
        }
    }
    let mut tail = 0.0;
    for (xa, xb) in ca.remainder().iter().zip(cb.remainder()) {
        tail += xa * xb;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Propagate the belief one packet ahead through the transition kernel and
/// renormalize, folding the mass that escaped above `gamma_max` back in.
pub fn predict(belief: &Belief, kernel: &TransitionKernel) -> Result<Belief> {
    if !Arc::ptr_eq(&belief.grid, &kernel.grid) && *belief.grid != *kernel.grid {
        return Err(Error::GridMismatch);
    }
    let n = belief.grid.len();
    let weights = belief.grid.weights();
    let weighted: Vec<f64> = belief.density.iter().zip(weights).map(|(d, w)| d * w).collect();
    let density: Vec<f64> =
        kernel.values.chunks_exact(n).map(|row| dot(row, &weighted)).collect();
    Ok(Belief::from_unnormalized(Arc::clone(&belief.grid), density))
}

/// Probability mass the belief assigns to gains below `gamma_th`.
///
/// Computed from cumulative trapezoid cell masses with the final cell entered
/// fractionally through the linear interpolant, then normalized by the total
/// so the value reaches exactly 1 at `gamma_max`. Continuous and monotone in
/// the threshold.
pub fn outage_mass(belief: &Belief, gamma_th: f64) -> f64 {
    outage_masses_sorted(belief, &[gamma_th])[0]
}

/// [`outage_mass`] evaluated at a nondecreasing sequence of thresholds in one
/// sweep over the grid cells.
pub(crate) fn outage_masses_sorted(belief: &Belief, thresholds: &[f64]) -> Vec<f64> {
    let nodes = belief.grid.nodes();
    let d = &belief.density;
    let ncells = nodes.len() - 1;
    let cell_mass =
        |k: usize| 0.5 * (nodes[k + 1] - nodes[k]) * (d[k] + d[k + 1]);
    let total: f64 = (0..ncells).map(cell_mass).sum();
    if total <= 0.0 {
        return vec![0.0; thresholds.len()];
    }
    let inv = 1.0 / total;
    debug_assert!(thresholds.windows(2).all(|w| w[0] <= w[1]));
    let mut out = Vec::with_capacity(thresholds.len());
    let mut below = 0.0;
    let mut k = 0usize;
    for &th in thresholds {
        if th <= 0.0 {
            out.push(0.0);
            continue;
        }
        while k < ncells && nodes[k + 1] <= th {
            below += cell_mass(k);
            k += 1;
        }
        let mut v = below;
        if k < ncells && th > nodes[k] {
            let h = nodes[k + 1] - nodes[k];
            let u = th - nodes[k];
            v += d[k] * u + 0.5 * (d[k + 1] - d[k]) / h * u * u;
        }
        out.push((v * inv).clamp(0.0, 1.0));
    }
    out
}
