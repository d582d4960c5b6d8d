use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// A point of the ambient space, in the coordinates the cone lives in.
/// Positivity is not enforced here: log coordinates and functional values
/// also travel as `Point`s.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    coords: Vec<S>,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        Ok(Point { coords })
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "zero point needs a positive dimension");
        Point {
            coords: vec![S::zero(); dim],
        }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        assert!(!v.is_empty());
        Point {
            coords: v.iter().map(|&x| S::from_int(x)).collect(),
        }
    }

    pub fn from_rationals(v: &[BigRational]) -> Self {
        assert!(!v.is_empty());
        Point {
            coords: v.iter().map(S::from_rational).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &S {
        &self.coords[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.coords.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        rhs.check_dim(self.dim())?;
        Ok(Point {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        rhs.check_dim(self.dim())?;
        Ok(Point {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, factor: &S) -> Self {
        Point {
            coords: self
                .coords
                .iter()
                .map(|c| factor.clone() * c.clone())
                .collect(),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }

    /// Sup-norm as f64, for divergence monitoring in either mode.
    pub fn sup_norm_f64(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance as f64.
    pub fn dist_sup_f64(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.approx_eq(b, tol))
    }
}

impl Point<BigRational> {
    pub fn convert<T: Scalar>(&self) -> Point<T> {
        Point {
            coords: self.coords.iter().map(T::from_rational).collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Largest coordinate: the additive analogue of the cone's top functional.
pub fn t_fn<S: Scalar>(u: &Point<S>) -> S {
    u.iter()
        .cloned()
        .reduce(scalar::max)
        .expect("points are nonempty by construction")
}

/// Sup norm expressed through `t_fn`: max of t(u) and t(-u).
pub fn sup_norm<S: Scalar>(u: &Point<S>) -> S {
    let neg = u.scale(&(-S::one()));
    scalar::max(t_fn(u), t_fn(&neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_points_are_rejected() {
        assert!(matches!(
            Point::<f64>::new(vec![]),
            Err(Error::EmptyPoint)
        ));
    }

    #[test]
    fn t_fn_takes_the_max_coordinate() {
        let u: Point<f64> = Point::from_ints(&[-3, -1]);
        assert_eq!(t_fn(&u), -1.0);
        let z: Point<f64> = Point::zero(3);
        assert_eq!(t_fn(&z), 0.0);
    }

    #[test]
    fn sup_norm_is_max_of_both_signs() {
        let u: Point<f64> = Point::from_ints(&[-3, -1]);
        assert_eq!(sup_norm(&u), 3.0);
        let v: Point<f64> = Point::from_ints(&[2, -1]);
        assert_eq!(sup_norm(&v), 2.0);
    }

    #[test]
    fn arithmetic_checks_dimensions() {
        let a: Point<f64> = Point::from_ints(&[1, 2]);
        let b: Point<f64> = Point::from_ints(&[1, 2, 3]);
        assert!(a.sub(&b).is_err());
        assert!(a.add(&b).is_err());
    }
}
