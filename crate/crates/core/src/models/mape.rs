use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean absolute percentage error, `mean |p - a| / a`; a uniform 20% deviation gives 0.2.
pub fn mape<T: Scalar>(predicted: &[T], actual: &[T]) -> Result<T> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} actual values",
            predicted.len(),
            actual.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Shape("no values to compare".into()));
    }
    let mut total = T::zero();
    for (&p, &a) in predicted.iter().zip(actual) {
        if !(a > T::zero()) {
            return Err(Error::Domain(format!("actual runtime must be positive, got {a}")));
        }
        total += (p - a).abs() / a;
    }
    Ok(total / T::of_usize(actual.len()))
}
