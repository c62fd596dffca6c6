use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Temperature softmax with max-subtraction.
///
/// `out_i = exp(s_i / tau) / sum_j exp(s_j / tau)`, shifted by the maximum
/// score so the largest exponent is zero.
pub fn softmax_over_scores<T: Scalar>(scores: &[T], tau: T) -> Result<Vec<T>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::InvalidTau(tau.as_f64()));
    }
    let max = scores.iter().cloned().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = scores.iter().map(|&s| ((s - max) / tau).exp()).collect();
    let sum = out.iter().fold(T::zero(), |acc, &x| acc + x);
    for x in out.iter_mut() {
        *x = *x / sum;
    }
    Ok(out)
}
