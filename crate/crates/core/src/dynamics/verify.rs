//! Structural checks on detected cycles: every periodic orbit of an
//! order-preserving subhomogeneous map must be an antichain, preserve the
//! domination ratio pairwise, respect the facet-count period bound, and admit
//! the binomial factorization of its period.

use num_bigint::BigUint;

use crate::bounds;
use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::map::ConeMap;
use crate::metric::m_ratio;
use crate::point::Point;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct AntichainCheck {
    pub pass: bool,
    /// Indices of a comparable pair of distinct points, when one exists.
    pub witness: Option<(usize, usize)>,
}

/// No two distinct points of a periodic orbit are comparable in the cone
/// order; a comparable pair is returned as the witness.
pub fn verify_antichain<S: Scalar>(
    cone: &ConeSpec<S>,
    points: &[Point<S>],
) -> Result<AntichainCheck> {
    for p in points {
        cone.ensure_member(p)?;
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                continue;
            }
            if cone.leq(&points[i], &points[j])? || cone.leq(&points[j], &points[i])? {
                return Ok(AntichainCheck { pass: false, witness: Some((i, j)) });
            }
        }
    }
    Ok(AntichainCheck { pass: true, witness: None })
}

#[derive(Clone, Debug)]
pub struct MInvarianceCheck {
    pub pass: bool,
    /// Largest relative deviation |M_after/M_before - 1| seen over finite
    /// pairs; infinite when one side of a pair was infinite and the other not.
    pub max_deviation: f64,
    pub pairs: usize,
}

fn relative_deviation(before: f64, after: f64) -> f64 {
    if before == after {
        0.0
    } else if before == 0.0 || !before.is_finite() {
        (after - before).abs()
    } else {
        (after / before - 1.0).abs()
    }
}

/// The domination ratio is invariant along the orbit: M(f(y)/f(x)) = M(y/x)
/// for every ordered pair of cycle points. Pairs infinite on one side must be
/// infinite on the other. Exact scalars demand equality; float scalars allow
/// a relative deviation up to float_tol.
pub fn verify_m_invariance<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    cycle: &[Point<S>],
    float_tol: f64,
) -> Result<MInvarianceCheck> {
    let images = cycle
        .iter()
        .map(|x| map.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let mut pass = true;
    let mut max_deviation = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..cycle.len() {
        for j in 0..cycle.len() {
            if i == j {
                continue;
            }
            pairs += 1;
            let before = m_ratio(cone, &cycle[j], &cycle[i])?;
            let after = m_ratio(cone, &images[j], &images[i])?;
            match (before.finite(), after.finite()) {
                (None, None) => {}
                (Some(b), Some(a)) => {
                    let dev = relative_deviation(b.to_f64(), a.to_f64());
                    max_deviation = max_deviation.max(dev);
                    let ok = if S::EXACT { a == b } else { dev <= float_tol };
                    pass = pass && ok;
                }
                _ => {
                    pass = false;
                    max_deviation = f64::INFINITY;
                }
            }
        }
    }
    Ok(MInvarianceCheck { pass, max_deviation, pairs })
}

#[derive(Clone, Debug)]
pub struct DominanceCheck {
    pub pass: bool,
    /// An omega point no iterate of the cycle base sits below.
    pub undominated: Option<usize>,
    /// A periodic point found in the omega set outside the cycle.
    pub rogue_periodic: Option<usize>,
}

fn same_point<S: Scalar>(a: &Point<S>, b: &Point<S>, tol: f64) -> bool {
    if S::EXACT {
        a == b
    } else {
        a.approx_eq(b, tol)
    }
}

/// Every omega-limit point lies above some iterate of the cycle base point,
/// and the cycle is the only periodic orbit inside the omega set (candidate
/// periods up to the cycle length are probed).
pub fn verify_omega_dominance<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    omega: &[Point<S>],
    cycle: &[Point<S>],
    float_tol: f64,
) -> Result<DominanceCheck> {
    if cycle.is_empty() {
        return Err(Error::Domain("the cycle must be nonempty".into()));
    }
    let period = cycle.len();
    let mut iterates = Vec::with_capacity(period);
    let mut cur = cycle[0].clone();
    for _ in 0..period {
        iterates.push(cur.clone());
        cur = map.apply(&cur)?;
    }

    let mut undominated = None;
    'omega: for (yi, y) in omega.iter().enumerate() {
        for it in &iterates {
            if cone.leq(it, y)? {
                continue 'omega;
            }
        }
        undominated = Some(yi);
        break;
    }

    let mut rogue_periodic = None;
    for (yi, y) in omega.iter().enumerate() {
        if cycle.iter().any(|c| same_point(c, y, float_tol)) {
            continue;
        }
        let mut cur = y.clone();
        for _ in 0..period {
            cur = map.apply(&cur)?;
            if same_point(&cur, y, float_tol) {
                rogue_periodic = Some(yi);
                break;
            }
        }
        if rogue_periodic.is_some() {
            break;
        }
    }

    Ok(DominanceCheck {
        pass: undominated.is_none() && rogue_periodic.is_none(),
        undominated,
        rogue_periodic,
    })
}

#[derive(Clone, Debug)]
pub struct PeriodBoundCheck {
    pub pass: bool,
    pub period: usize,
    /// Largest period any point can have on a cone with this many facets.
    pub bound: BigUint,
}

#[derive(Clone, Debug)]
pub struct FactorizationCheck {
    pub pass: bool,
    /// Smallest support size |I| over the cycle.
    pub support_min: usize,
    pub witness: Option<(u64, u64)>,
}

#[derive(Clone, Debug)]
pub struct CycleChecks {
    pub antichain: AntichainCheck,
    pub m_invariance: MInvarianceCheck,
    pub period_bound: PeriodBoundCheck,
    pub factorization: FactorizationCheck,
}

impl CycleChecks {
    pub fn all_pass(&self) -> bool {
        self.antichain.pass
            && self.m_invariance.pass
            && self.period_bound.pass
            && self.factorization.pass
    }

    /// A failed structural check on a detected cycle contradicts a theorem
    /// (or exposes a detection bug) and must surface loudly.
    pub fn falsification(&self) -> bool {
        !self.all_pass()
    }
}

/// Run every structural check on a detected cycle.
pub fn run_cycle_checks<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    cycle: &[Point<S>],
    float_tol: f64,
) -> Result<CycleChecks> {
    if cycle.is_empty() {
        return Err(Error::Domain("the cycle must be nonempty".into()));
    }
    let antichain = verify_antichain(cone, cycle)?;
    let m_invariance = verify_m_invariance(cone, map, cycle, float_tol)?;

    let n = cone.num_facets() as u64;
    let period = cycle.len();
    let bound = bounds::beta(n)?;
    let period_bound = PeriodBoundCheck {
        pass: BigUint::from(period) <= bound,
        period,
        bound,
    };

    let support_min = cycle
        .iter()
        .map(|x| cone.part_index(x).map(|p| p.len()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("cycle is nonempty");
    let factorization = if support_min == 0 {
        // Only the zero point has empty support, and zero on a cycle is fixed.
        FactorizationCheck {
            pass: period == 1,
            support_min,
            witness: if period == 1 { Some((1, 1)) } else { None },
        }
    } else {
        let witness = bounds::thm41_factorization(period as u64, support_min as u64, n)?;
        FactorizationCheck { pass: witness.is_some(), support_min, witness }
    };

    Ok(CycleChecks { antichain, m_invariance, period_bound, factorization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_map;
    use num_rational::BigRational;

    fn pts(coords: &[[i64; 2]]) -> Vec<Point<BigRational>> {
        coords.iter().map(|c| Point::from_ints(c)).collect()
    }

    #[test]
    fn comparable_pair_is_flagged() {
        let cone = ConeSpec::<BigRational>::standard(2);
        let bad = pts(&[[1, 1], [2, 2]]);
        let r = verify_antichain(&cone, &bad).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness, Some((0, 1)));

        let good = pts(&[[1, 2], [2, 1]]);
        assert!(verify_antichain(&cone, &good).unwrap().pass);
        assert!(verify_antichain(&cone, &pts(&[[1, 1]])).unwrap().pass);
    }

    #[test]
    fn swap_cycle_preserves_ratios() {
        let g = parse_map("f1 = 3*x1 /\\ x2\nf2 = x1 /\\ 3*x2\n").unwrap();
        let cone = ConeSpec::<BigRational>::standard(2);
        let cycle = pts(&[[1, 2], [2, 1]]);
        let r = verify_m_invariance(&cone, &g, &cycle, 1e-9).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.pairs, 2);
    }

    #[test]
    fn squaring_breaks_ratio_invariance() {
        use crate::map::FnConeMap;
        let sq = FnConeMap::new(1, |x: &Point<BigRational>| {
            Ok(Point::new(vec![x.get(0) * x.get(0)]).unwrap())
        });
        let cone = ConeSpec::<BigRational>::standard(1);
        let fake_cycle = vec![
            Point::<BigRational>::from_ints(&[1]),
            Point::<BigRational>::from_ints(&[2]),
        ];
        let r = verify_m_invariance(&cone, &sq, &fake_cycle, 1e-9).unwrap();
        assert!(!r.pass);
        assert!(r.max_deviation > 0.5); // M doubles: 2 vs 4
    }

    #[test]
    fn dominance_holds_for_the_orbit_itself() {
        let map = parse_map(
            "f1 = (3*x1 /\\ x2) \\/ (3*x2 /\\ x3)\n\
             f2 = (3*x1 /\\ x3) \\/ (x2 /\\ 3*x3)\n\
             f3 = (x1 /\\ 3*x2) \\/ (x1 /\\ 3*x3)\n",
        )
        .unwrap();
        let cone = ConeSpec::<BigRational>::standard(3);
        let cycle: Vec<Point<BigRational>> =
            [[1, 2, 0], [2, 0, 1], [0, 1, 2], [2, 1, 0], [1, 0, 2], [0, 2, 1]]
                .iter()
                .map(|c| Point::from_ints(c))
                .collect();
        let ok = verify_omega_dominance(&cone, &map, &cycle, &cycle, 1e-9).unwrap();
        assert!(ok.pass);

        // A synthetic omega point below every iterate is not dominated.
        let mut omega = cycle.clone();
        omega.push(Point::from_rationals(&[
            "1/10".parse().unwrap(),
            "1/10".parse().unwrap(),
            "1/10".parse().unwrap(),
        ]));
        let bad = verify_omega_dominance(&cone, &map, &omega, &cycle, 1e-9).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.undominated, Some(6));
    }

    #[test]
    fn full_check_bundle_on_the_swap_cycle() {
        let g = parse_map("f1 = 3*x1 /\\ x2\nf2 = x1 /\\ 3*x2\n").unwrap();
        let cone = ConeSpec::<BigRational>::standard(2);
        let cycle = pts(&[[1, 2], [2, 1]]);
        let checks = run_cycle_checks(&cone, &g, &cycle, 1e-9).unwrap();
        assert!(checks.all_pass(), "{checks:?}");
        assert_eq!(checks.period_bound.bound, BigUint::from(2u32));
        assert_eq!(checks.factorization.support_min, 2);
        assert!(run_cycle_checks(&cone, &g, &[], 1e-9).is_err());
    }
}
