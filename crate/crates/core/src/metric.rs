use std::cmp::Ordering;
use std::fmt;

use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

/// Value of an M-ratio: a finite scalar or +infinity (supports differ).
#[derive(Clone, Debug, PartialEq)]
pub enum MRatio<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> MRatio<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, MRatio::Finite(_))
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            MRatio::Finite(v) => Some(v),
            MRatio::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MRatio::Finite(v) => v.to_f64(),
            MRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn partial_cmp_ratio(&self, other: &MRatio<S>) -> Option<Ordering> {
        match (self, other) {
            (MRatio::Infinite, MRatio::Infinite) => Some(Ordering::Equal),
            (MRatio::Infinite, MRatio::Finite(_)) => Some(Ordering::Greater),
            (MRatio::Finite(_), MRatio::Infinite) => Some(Ordering::Less),
            (MRatio::Finite(a), MRatio::Finite(b)) => a.partial_cmp(b),
        }
    }

    pub fn leq(&self, other: &MRatio<S>) -> bool {
        matches!(
            self.partial_cmp_ratio(other),
            Some(Ordering::Less) | Some(Ordering::Equal)
        )
    }

    pub fn max(self, other: MRatio<S>) -> MRatio<S> {
        if self.leq(&other) {
            other
        } else {
            self
        }
    }

    pub fn mul(&self, other: &MRatio<S>) -> MRatio<S> {
        match (self, other) {
            (MRatio::Finite(a), MRatio::Finite(b)) => MRatio::Finite(a.clone() * b.clone()),
            _ => MRatio::Infinite,
        }
    }
}

impl<S: Scalar> fmt::Display for MRatio<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MRatio::Finite(v) => write!(f, "{v}"),
            MRatio::Infinite => write!(f, "inf"),
        }
    }
}

/// M(y/x; K) = inf { beta > 0 : y <= beta x }, computed as the largest ratio
/// of facet values. Conventions at the boundary: facets where both values
/// vanish are skipped; a facet positive on y but zero on x forces +infinity;
/// y = 0 gives 0.
pub fn m_ratio<S: Scalar>(
    cone: &ConeSpec<S>,
    y: &Point<S>,
    x: &Point<S>,
) -> Result<MRatio<S>> {
    cone.ensure_member(x)?;
    cone.ensure_member(y)?;
    let zero = S::zero();
    let mut best: Option<S> = None;
    for i in 1..=cone.num_facets() {
        let px = cone.facet_value(i, x);
        let py = cone.facet_value(i, y);
        match (px == zero, py == zero) {
            (true, true) => continue,
            (true, false) => return Ok(MRatio::Infinite),
            (false, _) => {
                let r = py / px;
                best = Some(match best {
                    None => r,
                    Some(b) => crate::scalar::max(b, r),
                });
            }
        }
    }
    // All facets vanished on both points: y is 0 (and so is x).
    Ok(MRatio::Finite(best.unwrap_or(zero)))
}

/// max { M(y/x), M(x/y) }: the multiplicative form of the Thompson distance.
/// Exact in rational mode, so order comparisons between distances need no
/// logarithms. Both points zero gives 1 (distance 0).
pub fn thompson_factor<S: Scalar>(
    cone: &ConeSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
) -> Result<MRatio<S>> {
    let fwd = m_ratio(cone, y, x)?;
    let bwd = m_ratio(cone, x, y)?;
    let factor = fwd.max(bwd);
    match factor {
        MRatio::Finite(v) if v.is_zero() => Ok(MRatio::Finite(S::one())), // both points are 0
        other => Ok(other),
    }
}

/// Thompson distance log max{M(y/x), M(x/y)} as an f64; +infinity iff the
/// points lie in different parts. The exact-mode comparison form is
/// `thompson_factor`.
pub fn thompson<S: Scalar>(cone: &ConeSpec<S>, x: &Point<S>, y: &Point<S>) -> Result<f64> {
    Ok(match thompson_factor(cone, x, y)? {
        MRatio::Finite(v) => v.to_f64().ln(),
        MRatio::Infinite => f64::INFINITY,
    })
}

/// Coordinatewise log, defined for strictly positive points. Float mode only:
/// the result is irrational in general.
pub fn log_map<S: Scalar>(x: &Point<S>) -> Result<Point<S>> {
    if S::EXACT {
        return Err(Error::ExactModeUnsupported { op: "log_map" });
    }
    let zero = S::zero();
    let mut coords = Vec::with_capacity(x.dim());
    for (i, c) in x.iter().enumerate() {
        if !(c > &zero) {
            return Err(Error::NonpositiveCoordinate { index: i + 1 });
        }
        coords.push(c.ln_opt().expect("float mode has logs"));
    }
    Point::new(coords)
}

/// Coordinatewise exp; inverse of `log_map`. Float mode only.
pub fn exp_map<S: Scalar>(u: &Point<S>) -> Result<Point<S>> {
    if S::EXACT {
        return Err(Error::ExactModeUnsupported { op: "exp_map" });
    }
    Point::new(
        u.iter()
            .map(|c| c.exp_opt().expect("float mode has exps"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn std2() -> ConeSpec<BigRational> {
        ConeSpec::standard(2)
    }

    fn pt(v: &[i64]) -> Point<BigRational> {
        Point::from_ints(v)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn m_ratio_takes_the_largest_component_ratio() {
        // M((1,2)/(2,1)) on the orthant: max(1/2, 2/1) = 2.
        let m = m_ratio(&std2(), &pt(&[1, 2]), &pt(&[2, 1])).unwrap();
        assert_eq!(m, MRatio::Finite(rat(2, 1)));
    }

    #[test]
    fn m_ratio_boundary_conventions() {
        let k = std2();
        // Support of y exceeds support of x.
        assert_eq!(
            m_ratio(&k, &pt(&[1, 1]), &pt(&[1, 0])).unwrap(),
            MRatio::Infinite
        );
        // y = 0 gives 0, whatever x is.
        assert_eq!(
            m_ratio(&k, &Point::zero(2), &pt(&[1, 0])).unwrap(),
            MRatio::Finite(rat(0, 1))
        );
        assert_eq!(
            m_ratio(&k, &Point::zero(2), &Point::zero(2)).unwrap(),
            MRatio::Finite(rat(0, 1))
        );
        // Shared zero facets are skipped, the rest decide.
        assert_eq!(
            m_ratio(&k, &pt(&[3, 0]), &pt(&[1, 0])).unwrap(),
            MRatio::Finite(rat(3, 1))
        );
    }

    #[test]
    fn m_ratio_requires_membership() {
        let k = std2();
        assert!(m_ratio(&k, &pt(&[1, 1]), &pt(&[-1, 1])).is_err());
    }

    #[test]
    fn thompson_distance_values() {
        let k = std2();
        // d((1,1),(e,e)) would be 1; with rationals: d((1,1),(2,2)) = ln 2.
        let d = thompson(&k, &pt(&[1, 1]), &pt(&[2, 2])).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        // Different parts: infinite.
        assert_eq!(
            thompson(&k, &pt(&[1, 0]), &pt(&[1, 1])).unwrap(),
            f64::INFINITY
        );
        // The distance from the apex to itself is 0.
        assert_eq!(thompson(&k, &Point::zero(2), &Point::zero(2)).unwrap(), 0.0);
        assert_eq!(thompson(&k, &pt(&[1, 2]), &pt(&[1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn thompson_factor_is_symmetric_and_exact() {
        let k = std2();
        let a = pt(&[1, 3]);
        let b = pt(&[2, 1]);
        let f1 = thompson_factor(&k, &a, &b).unwrap();
        let f2 = thompson_factor(&k, &b, &a).unwrap();
        assert_eq!(f1, f2);
        // max(M(b/a), M(a/b)) = max(max(2, 1/3), max(1/2, 3)) = 3.
        assert_eq!(f1, MRatio::Finite(rat(3, 1)));
    }

    #[test]
    fn log_exp_are_float_only_and_inverse() {
        let x: Point<f64> = Point::new(vec![1.0, 2.0, 0.5]).unwrap();
        let u = log_map(&x).unwrap();
        let back = exp_map(&u).unwrap();
        assert!(back.approx_eq(&x, 1e-12));
        assert!(matches!(
            log_map(&Point::new(vec![1.0, 0.0]).unwrap()),
            Err(Error::NonpositiveCoordinate { index: 2 })
        ));
        let q: Point<BigRational> = pt(&[1, 2]);
        assert!(matches!(
            log_map(&q),
            Err(Error::ExactModeUnsupported { .. })
        ));
        assert!(matches!(
            exp_map(&q),
            Err(Error::ExactModeUnsupported { .. })
        ));
    }
}
