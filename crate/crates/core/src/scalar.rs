use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Storage scalar for embedding data: f32 or f64.
///
/// Dot products and norms always accumulate in f64 regardless of the
/// storage type; `Scalar` only controls what sits in memory and on disk.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Inner product of two equal-length slices, accumulated in f64.
pub fn dot_f64<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| x.as_f64() * y.as_f64())
        .sum()
}

/// Euclidean norm of a slice, accumulated in f64.
pub fn norm_f64<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|&x| x.as_f64() * x.as_f64()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_accumulates_in_f64() {
        let a = vec![3.0f32, 4.0];
        let b = vec![1.0f32, 2.0];
        assert_eq!(dot_f64(&a, &b), 11.0);
    }

    #[test]
    fn norm_of_3_4_is_5() {
        assert_eq!(norm_f64(&[3.0f64, 4.0]), 5.0);
    }
}
