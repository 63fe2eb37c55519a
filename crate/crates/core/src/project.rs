//! Weighted projection onto the simple-order cone and the nodal-first
//! estimator for arbitrary order restrictions.
//!
//! The simple-order projection is available through the min-max formula
//! (a literal evaluation over all segment averages) and through
//! pool-adjacent-violators; the two agree to [`EQUALITY_TOL`] relative.
//! [`hp_estimate`] extends the projection to any restriction with nodal
//! parameters: nodal parameters are estimated first along a concatenation
//! of their chains, pinned with a large weight, and the remaining
//! parameters are read off per-chain projections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::OrderRestriction;

/// Absolute slack allowed when checking chain feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Relative agreement required between the two simple-order routes.
pub const EQUALITY_TOL: f64 = 1e-12;

/// Pinned elements carry `PIN_WEIGHT_FACTOR * sum(weights)`. Large enough
/// that pin leakage stays below the oracle tolerances, small enough that
/// segment sums keep full double precision.
const PIN_WEIGHT_FACTOR: f64 = 1e12;

/// Estimates with strictly positive finite weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedVector {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values vs {} weights",
                values.len(),
                weights.len()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index, value });
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(Self { values, weights })
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; values.len()];
        Self::new(values, weights)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Output of [`hp_estimate`]. `fixed_mask` marks the components pinned
/// during the nodal phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub values: Vec<f64>,
    pub fixed_mask: Vec<bool>,
}

#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Componentwise `min over s >= i` of `max over t <= i` of the weighted
/// average over `[t, s]`. Output is nondecreasing.
pub fn project_simple_order_minmax(v: &WeightedVector) -> Vec<f64> {
    minmax_raw(v.values(), v.weights())
}

fn minmax_raw(x: &[f64], w: &[f64]) -> Vec<f64> {
    let p = x.len();
    if p <= 1 {
        return x.to_vec();
    }
    // avg[t][s] = weighted mean of x[t..=s], accumulated with compensation
    let mut avg = vec![vec![0.0; p]; p];
    for t in 0..p {
        let mut sw = KahanSum::default();
        let mut swx = KahanSum::default();
        for s in t..p {
            sw.add(w[s]);
            swx.add(w[s] * x[s]);
            avg[t][s] = swx.value() / sw.value();
        }
    }
    let mut out = vec![0.0; p];
    for i in 0..p {
        let mut best = f64::INFINITY;
        for s in i..p {
            let mut inner = f64::NEG_INFINITY;
            for row in avg.iter().take(i + 1) {
                inner = inner.max(row[s]);
            }
            best = best.min(inner);
        }
        out[i] = best;
    }
    out
}

/// Pool-adjacent-violators route to the same projection. Pooling triggers
/// on strict violations only, so ties are left untouched.
pub fn project_simple_order_pava(v: &WeightedVector) -> Vec<f64> {
    pava_raw(v.values(), v.weights())
}

pub(crate) fn pava_raw(x: &[f64], w: &[f64]) -> Vec<f64> {
    let p = x.len();
    let mut mean: Vec<f64> = Vec::with_capacity(p);
    let mut swx: Vec<f64> = Vec::with_capacity(p);
    let mut sw: Vec<f64> = Vec::with_capacity(p);
    let mut count: Vec<usize> = Vec::with_capacity(p);
    for i in 0..p {
        mean.push(x[i]);
        swx.push(w[i] * x[i]);
        sw.push(w[i]);
        count.push(1);
        while mean.len() > 1 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let n = mean.len();
            let pooled_swx = swx[n - 2] + swx[n - 1];
            let pooled_sw = sw[n - 2] + sw[n - 1];
            let pooled_count = count[n - 2] + count[n - 1];
            mean.pop();
            swx.pop();
            sw.pop();
            count.pop();
            let last = mean.len() - 1;
            mean[last] = pooled_swx / pooled_sw;
            swx[last] = pooled_swx;
            sw[last] = pooled_sw;
            count[last] = pooled_count;
        }
    }
    let mut out = Vec::with_capacity(p);
    for (value, c) in mean.iter().zip(count.iter()) {
        out.extend(std::iter::repeat(*value).take(*c));
    }
    out
}

/// First violated adjacent chain pair, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityViolation {
    pub lower: usize,
    pub upper: usize,
    pub gap: f64,
}

/// Checks every adjacent pair of every chain with slack `tol`. Reports the
/// first violated pair; never panics on infeasible input.
pub fn verify_feasible(
    values: &[f64],
    r: &OrderRestriction,
    tol: f64,
) -> std::result::Result<(), FeasibilityViolation> {
    assert_eq!(values.len(), r.p(), "value length must match the restriction");
    for g in r.subgraphs() {
        for pair in g.chain().windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let gap = values[lo] - values[hi];
            if gap > tol {
                return Err(FeasibilityViolation { lower: lo, upper: hi, gap });
            }
        }
    }
    Ok(())
}

/// Nodal-first estimate of a vector under an arbitrary restriction.
///
/// Each nodal parameter is estimated by the simple-order formula along the
/// concatenation of its chains (prefixes before it, the parameter, then the
/// chain suffixes), then replaced and pinned with a large weight for all
/// later calculations. Non-nodal parameters take their positions in the
/// per-chain projections that follow, chains in listing order.
pub fn hp_estimate(v: &WeightedVector, r: &OrderRestriction) -> Result<ProjectionResult> {
    hp_estimate_with_pin(v, r, PIN_WEIGHT_FACTOR)
}

pub(crate) fn hp_estimate_with_pin(
    v: &WeightedVector,
    r: &OrderRestriction,
    pin_factor: f64,
) -> Result<ProjectionResult> {
    let p = v.len();
    if p != r.p() {
        return Err(Error::LengthMismatch(format!(
            "vector has {} elements but the restriction covers {}",
            p,
            r.p()
        )));
    }
    let mut values = v.values().to_vec();
    let mut fixed_mask = vec![false; p];
    if r.is_trivial() {
        return Ok(ProjectionResult { values, fixed_mask });
    }
    let mut weights = v.weights().to_vec();
    let pin = pin_factor * weights.iter().sum::<f64>();
    let mut pinned = vec![false; p];
    let closure = r.closure();

    for component in r.connected_components() {
        if component.len() < 2 {
            continue;
        }
        // A component covered by one chain is totally ordered: everything is
        // nodal and the sequential pinned estimates reduce to the plain
        // projection, so apply it directly. This also keeps ties exact
        // instead of leaking pin weight into them.
        let covering: Vec<&crate::order::LinkedSubgraph> = r
            .subgraphs()
            .iter()
            .filter(|g| g.chain().iter().any(|&e| component.contains(&e)))
            .collect();
        if covering.len() == 1 && covering[0].len() == component.len() {
            let chain = covering[0].chain();
            let chain_values: Vec<f64> = chain.iter().map(|&i| values[i]).collect();
            let chain_weights: Vec<f64> = chain.iter().map(|&i| weights[i]).collect();
            let fit = pava_raw(&chain_values, &chain_weights);
            for (k, &i) in chain.iter().enumerate() {
                values[i] = fit[k];
                weights[i] = pin;
                pinned[i] = true;
                fixed_mask[i] = true;
            }
            continue;
        }
        let mut nodal: Vec<usize> = component
            .iter()
            .copied()
            .filter(|&i| {
                component.iter().all(|&j| j == i || closure.le(i, j) || closure.le(j, i))
            })
            .collect();
        if nodal.is_empty() {
            return Err(Error::NoNodalParameter { component });
        }
        // Nodal parameters are mutually linked; process in ascending order.
        nodal.sort_by(|&a, &b| {
            if closure.le(a, b) && !closure.le(b, a) {
                std::cmp::Ordering::Less
            } else if closure.le(b, a) && !closure.le(a, b) {
                std::cmp::Ordering::Greater
            } else {
                a.cmp(&b)
            }
        });
        for &nu in &nodal {
            let mut sequence: Vec<usize> = Vec::new();
            for g in r.subgraphs() {
                if let Some(pos) = g.position(nu) {
                    sequence.extend_from_slice(&g.chain()[..pos]);
                }
            }
            let nu_pos = sequence.len();
            sequence.push(nu);
            for g in r.subgraphs() {
                if let Some(pos) = g.position(nu) {
                    sequence.extend_from_slice(&g.chain()[pos + 1..]);
                }
            }
            let mut seen = vec![false; p];
            for &e in &sequence {
                if seen[e] {
                    return Err(Error::UnsupportedRestriction(format!(
                        "chains through nodal parameter {nu} overlap at element {e}; \
                         decompose the restriction into chains that share only \
                         nodal parameters"
                    )));
                }
                seen[e] = true;
            }
            let seq_values: Vec<f64> = sequence.iter().map(|&e| values[e]).collect();
            let seq_weights: Vec<f64> = sequence.iter().map(|&e| weights[e]).collect();
            let fit = pava_raw(&seq_values, &seq_weights);
            values[nu] = fit[nu_pos];
            weights[nu] = pin;
            pinned[nu] = true;
            fixed_mask[nu] = true;
        }
    }

    for g in r.subgraphs() {
        let members = g.chain();
        if members.iter().all(|&i| pinned[i]) {
            continue;
        }
        let chain_values: Vec<f64> = members.iter().map(|&i| values[i]).collect();
        let chain_weights: Vec<f64> = members.iter().map(|&i| weights[i]).collect();
        let fit = pava_raw(&chain_values, &chain_weights);
        let newly: Vec<(usize, f64)> = members
            .iter()
            .enumerate()
            .filter(|(_, &i)| !pinned[i])
            .map(|(k, &i)| (i, fit[k]))
            .collect();
        for (i, value) in newly {
            values[i] = value;
            weights[i] = pin;
            pinned[i] = true;
        }
    }

    Ok(ProjectionResult { values, fixed_mask })
}
