use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::ConeSpec;
use crate::error::Result;
use crate::map::ConeMap;
use crate::metric::thompson_factor;
use crate::point::Point;
use crate::scalar::Scalar;

/// Default slack for float-mode order comparisons in the checkers.
pub const CHECK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    OrderPreserving,
    Subhomogeneous,
    DtNonexpansive,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::OrderPreserving => "order-preserving",
            Property::Subhomogeneous => "subhomogeneous",
            Property::DtNonexpansive => "dT-nonexpansive",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub enum Witness<S> {
    Pair { x: Point<S>, y: Point<S> },
    Scaling { x: Point<S>, lambda: S },
}

impl<S: Scalar> fmt::Display for Witness<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Pair { x, y } => write!(f, "x = {x}, y = {y}"),
            Witness::Scaling { x, lambda } => write!(f, "x = {x}, lambda = {lambda}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum CheckOutcome<S> {
    /// Every sample satisfied the inequality; `exact_equality` records whether
    /// it was an equality on every sample (homogeneity resp. isometry).
    Pass { exact_equality: bool },
    Fail { witness: Witness<S>, detail: String },
}

#[derive(Clone, Debug)]
pub struct CheckReport<S> {
    pub property: Property,
    pub samples: usize,
    pub outcome: CheckOutcome<S>,
}

impl<S: Scalar> CheckReport<S> {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, CheckOutcome::Pass { .. })
    }
}

impl<S: Scalar> fmt::Display for CheckReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            CheckOutcome::Pass { exact_equality } => {
                write!(f, "{}: PASS ({} samples", self.property, self.samples)?;
                if *exact_equality {
                    write!(f, ", equality throughout")?;
                }
                write!(f, ")")
            }
            CheckOutcome::Fail { witness, detail } => {
                write!(
                    f,
                    "{}: FAIL after {} samples: {detail}; witness {witness}",
                    self.property, self.samples
                )
            }
        }
    }
}

/// Deterministic sample source for the checkers. Exact mode draws small
/// rationals, float mode bounded positive doubles.
pub struct Sampler<S> {
    rng: ChaCha8Rng,
    dim: usize,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> Sampler<S> {
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim >= 1);
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A point of R^n_+, boundary coordinates included.
    pub fn point(&mut self) -> Point<S> {
        Point::new((0..self.dim).map(|_| S::sample_nonneg(&mut self.rng)).collect())
            .expect("dim >= 1")
    }

    /// A strictly positive point.
    pub fn interior_point(&mut self) -> Point<S> {
        Point::new(
            (0..self.dim)
                .map(|_| S::sample_positive(&mut self.rng))
                .collect(),
        )
        .expect("dim >= 1")
    }

    /// A comparable pair x <= y (same support for x chosen interior or not).
    pub fn ordered_pair(&mut self) -> (Point<S>, Point<S>) {
        let x = self.point();
        let delta = self.point();
        let y = x.add(&delta).expect("same dim");
        (x, y)
    }

    /// Two strictly positive points: always in the interior part.
    pub fn interior_pair(&mut self) -> (Point<S>, Point<S>) {
        (self.interior_point(), self.interior_point())
    }

    pub fn lambda(&mut self) -> S {
        S::sample_unit(&mut self.rng)
    }
}

/// x <= y componentwise with float slack.
fn leq_componentwise<S: Scalar>(x: &Point<S>, y: &Point<S>, tol: f64) -> bool {
    x.iter().zip(y.iter()).all(|(a, b)| {
        if S::EXACT {
            a <= b
        } else {
            a.to_f64() <= b.to_f64() + tol
        }
    })
}

/// Sample x <= y and require f(x) <= f(y).
pub fn check_order_preserving<S: Scalar>(
    map: &dyn ConeMap<S>,
    sampler: &mut Sampler<S>,
    n_samples: usize,
) -> Result<CheckReport<S>> {
    let mut all_equal = true;
    for k in 0..n_samples {
        let (x, y) = sampler.ordered_pair();
        let fx = map.apply(&x)?;
        let fy = map.apply(&y)?;
        if !leq_componentwise(&fx, &fy, CHECK_TOL) {
            return Ok(CheckReport {
                property: Property::OrderPreserving,
                samples: k + 1,
                outcome: CheckOutcome::Fail {
                    witness: Witness::Pair { x, y },
                    detail: format!("f(x) = {fx} is not <= f(y) = {fy}"),
                },
            });
        }
        all_equal &= fx == fy;
    }
    Ok(CheckReport {
        property: Property::OrderPreserving,
        samples: n_samples,
        outcome: CheckOutcome::Pass {
            exact_equality: all_equal,
        },
    })
}

/// Sample x and lambda in (0,1), require lambda*f(x) <= f(lambda*x).
/// Equality on every sample flags homogeneity.
pub fn check_subhomogeneous<S: Scalar>(
    map: &dyn ConeMap<S>,
    sampler: &mut Sampler<S>,
    n_samples: usize,
) -> Result<CheckReport<S>> {
    let mut all_equal = true;
    for k in 0..n_samples {
        let x = sampler.interior_point();
        let lambda = sampler.lambda();
        let fx = map.apply(&x)?;
        let scaled = fx.scale(&lambda);
        let fsx = map.apply(&x.scale(&lambda))?;
        if !leq_componentwise(&scaled, &fsx, CHECK_TOL) {
            return Ok(CheckReport {
                property: Property::Subhomogeneous,
                samples: k + 1,
                outcome: CheckOutcome::Fail {
                    witness: Witness::Scaling { x, lambda },
                    detail: format!(
                        "lambda*f(x) = {scaled} is not <= f(lambda*x) = {fsx}"
                    ),
                },
            });
        }
        all_equal &= if S::EXACT {
            scaled == fsx
        } else {
            scaled.approx_eq(&fsx, CHECK_TOL)
        };
    }
    Ok(CheckReport {
        property: Property::Subhomogeneous,
        samples: n_samples,
        outcome: CheckOutcome::Pass {
            exact_equality: all_equal,
        },
    })
}

/// Sample same-part pairs (interior points) and require
/// d_T(f(x), f(y)) <= d_T(x, y). Exact mode compares the multiplicative
/// factors directly, so no logarithm enters the comparison.
pub fn check_dt_nonexpansive<S: Scalar>(
    cone: &ConeSpec<S>,
    map: &dyn ConeMap<S>,
    sampler: &mut Sampler<S>,
    n_samples: usize,
) -> Result<CheckReport<S>> {
    let mut all_equal = true;
    for k in 0..n_samples {
        let (x, y) = sampler.interior_pair();
        let before = thompson_factor(cone, &x, &y)?;
        let fx = map.apply(&x)?;
        let fy = map.apply(&y)?;
        let after = thompson_factor(cone, &fx, &fy)?;
        let ok = if S::EXACT {
            after.leq(&before)
        } else {
            after.to_f64().ln() <= before.to_f64().ln() + CHECK_TOL
        };
        if !ok {
            return Ok(CheckReport {
                property: Property::DtNonexpansive,
                samples: k + 1,
                outcome: CheckOutcome::Fail {
                    witness: Witness::Pair { x, y },
                    detail: format!(
                        "thompson factor grew from {before} to {after}"
                    ),
                },
            });
        }
        all_equal &= if S::EXACT {
            after == before
        } else {
            (after.to_f64().ln() - before.to_f64().ln()).abs() <= CHECK_TOL
        };
    }
    Ok(CheckReport {
        property: Property::DtNonexpansive,
        samples: n_samples,
        outcome: CheckOutcome::Pass {
            exact_equality: all_equal,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse_map;
    use crate::map::FnConeMap;
    use num_rational::BigRational;

    #[test]
    fn grammar_maps_pass_all_three_checks() {
        let m = parse_map("f1 = (3*x1 /\\ x2) \\/ (x2 + 1)\nf2 = 1/2*x1 /\\ x2\n").unwrap();
        let cone: ConeSpec<BigRational> = ConeSpec::standard(2);
        let mut s: Sampler<BigRational> = Sampler::new(7, 2);
        assert!(check_order_preserving(&m, &mut s, 200).unwrap().passed());
        assert!(check_subhomogeneous(&m, &mut s, 200).unwrap().passed());
        assert!(check_dt_nonexpansive(&cone, &m, &mut s, 200)
            .unwrap()
            .passed());
    }

    #[test]
    fn homogeneous_maps_pass_with_equality() {
        let m = parse_map("f1 = 2*x2\nf2 = x1 /\\ 3*x2\n").unwrap();
        let mut s: Sampler<BigRational> = Sampler::new(3, 2);
        let rep = check_subhomogeneous(&m, &mut s, 100).unwrap();
        match rep.outcome {
            CheckOutcome::Pass { exact_equality } => assert!(exact_equality),
            _ => panic!("homogeneous map must pass"),
        }
    }

    #[test]
    fn order_violation_is_caught_with_a_witness() {
        // x -> (1/(1+x1), x2) reverses order in the first coordinate.
        let bad = FnConeMap::new(2, |x: &Point<f64>| {
            Point::new(vec![1.0 / (1.0 + x.get(0)), *x.get(1)])
        });
        let mut s: Sampler<f64> = Sampler::new(11, 2);
        let rep = check_order_preserving(&bad, &mut s, 500).unwrap();
        match rep.outcome {
            CheckOutcome::Fail { witness, .. } => match witness {
                Witness::Pair { x, y } => {
                    assert!(x.get(0) < y.get(0) || x.get(1) <= y.get(1));
                }
                _ => panic!("pair witness expected"),
            },
            _ => panic!("expected a failure"),
        }
    }

    #[test]
    fn superhomogeneous_map_fails_scaling_check() {
        // x -> x^2 (coordinatewise) on the interior: lambda*x^2 > (lambda*x)^2
        // fails the other way; square is superhomogeneous: f(lambda x) =
        // lambda^2 x^2 < lambda x^2. So the inequality fails.
        let sq = FnConeMap::new(1, |x: &Point<f64>| {
            Point::new(vec![x.get(0) * x.get(0)])
        });
        let mut s: Sampler<f64> = Sampler::new(5, 1);
        let rep = check_subhomogeneous(&sq, &mut s, 200).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn expansion_fails_the_metric_check() {
        // x -> x^3 triples Thompson distances on the half line.
        let cube = FnConeMap::new(1, |x: &Point<f64>| {
            Point::new(vec![x.get(0).powi(3)])
        });
        let cone: ConeSpec<f64> = ConeSpec::standard(1);
        let mut s: Sampler<f64> = Sampler::new(13, 1);
        let rep = check_dt_nonexpansive(&cone, &cube, &mut s, 200).unwrap();
        assert!(!rep.passed());
    }
}
