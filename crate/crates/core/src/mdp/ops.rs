//! Elementary operators on value vectors and Q-tables.

use super::{MdpError, QTable, ValueVector};

/// Variance of `v` under the distribution `p`: `Σ pᵢvᵢ² − (Σ pᵢvᵢ)²`, clamped at zero.
///
/// The definition is shift invariant, so callers holding large-magnitude
/// vectors should center them first to avoid cancellation.
pub fn variance(p: &[f64], v: &[f64]) -> Result<f64, MdpError> {
    if p.len() != v.len() {
        return Err(MdpError::LengthMismatch { left: p.len(), right: v.len() });
    }
    Ok(variance_unchecked(p, v))
}

#[inline]
pub(crate) fn variance_unchecked(p: &[f64], v: &[f64]) -> f64 {
    let mut first = 0.0;
    let mut second = 0.0;
    for (&pi, &vi) in p.iter().zip(v) {
        first += pi * vi;
        second += pi * vi * vi;
    }
    (second - first * first).max(0.0)
}

/// Span semi-norm `max(v) − min(v)`.
pub fn span(v: &[f64]) -> Result<f64, MdpError> {
    if v.is_empty() {
        return Err(MdpError::EmptyVector);
    }
    Ok(span_unchecked(v))
}

#[inline]
pub(crate) fn span_unchecked(v: &[f64]) -> f64 {
    let (lo, hi) = min_max(v);
    hi - lo
}

#[inline]
pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Caps every entry at `min(v) + h`.
pub fn clip(v: &[f64], h: f64) -> Result<ValueVector, MdpError> {
    if h.is_nan() || h < 0.0 {
        return Err(MdpError::NegativeH(h));
    }
    if v.is_empty() {
        return Ok(ValueVector::default());
    }
    let cap = min_max(v).0 + h;
    Ok(ValueVector(v.iter().map(|&x| x.min(cap)).collect()))
}

/// Index of the largest entry, lowest index on ties.
#[inline]
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Max over actions, with the lowest-index maximizing action per state.
pub fn greedy(q: &QTable) -> (ValueVector, Vec<usize>) {
    let mut values = Vec::with_capacity(q.n_states());
    let mut policy = Vec::with_capacity(q.n_states());
    for s in 0..q.n_states() {
        let row = q.row(s);
        let a = argmax(row);
        values.push(row[a]);
        policy.push(a);
    }
    (ValueVector(values), policy)
}
