use crate::error::{Error, Result};
use crate::metric::{exp_map, log_map};
use crate::point::Point;
use crate::scalar::Scalar;

/// A self-map of (a subset of) the ambient space, the object the orbit
/// machinery iterates. Implementations decide their own domain and report
/// domain violations through `apply`.
pub trait ConeMap<S: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Point<S>) -> Result<Point<S>>;
}

/// Wrap a plain closure as a map; used for ad-hoc and counterexample maps.
pub struct FnConeMap<S, F>
where
    F: Fn(&Point<S>) -> Result<Point<S>>,
{
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar, F> FnConeMap<S, F>
where
    F: Fn(&Point<S>) -> Result<Point<S>>,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnConeMap {
            dim,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar, F> ConeMap<S> for FnConeMap<S, F>
where
    F: Fn(&Point<S>) -> Result<Point<S>>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        x.check_dim(self.dim)?;
        (self.f)(x)
    }
}

/// A map of R^n in log coordinates (e.g. a sup-norm nonexpansive map),
/// conjugated onto the interior of the positive orthant:
/// h(x) = exp(g(log x)). Float mode only, and undefined on the boundary.
pub struct LogConjugate<G>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    dim: usize,
    g: G,
}

/// Conjugate a map on R^n (log coordinates) into a map on int(R^n_+).
pub fn conjugate_log<G>(dim: usize, g: G) -> LogConjugate<G>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    LogConjugate { dim, g }
}

impl<G> ConeMap<f64> for LogConjugate<G>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point<f64>) -> Result<Point<f64>> {
        x.check_dim(self.dim)?;
        let u = log_map(x)?; // rejects boundary points
        let v = (self.g)(u.coords());
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        exp_map(&Point::new(v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_conjugation_turns_translation_into_scaling() {
        // g(u) = u + log 2 in log coordinates is multiplication by 2.
        let h = conjugate_log(2, |u: &[f64]| u.iter().map(|v| v + 2f64.ln()).collect());
        let x = Point::new(vec![1.0, 3.0]).unwrap();
        let y = h.apply(&x).unwrap();
        assert!(y.approx_eq(&Point::new(vec![2.0, 6.0]).unwrap(), 1e-12));
    }

    #[test]
    fn conjugated_maps_reject_the_boundary() {
        let h = conjugate_log(2, |u: &[f64]| u.to_vec());
        let x = Point::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            h.apply(&x),
            Err(Error::NonpositiveCoordinate { index: 2 })
        ));
    }
}
