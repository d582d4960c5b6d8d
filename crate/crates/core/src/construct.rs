//! Builder for maps on the standard cone with a periodic point of period
//! lcm(p, q): q support vectors arrange m-dimensional inner dynamics around
//! the cone, an inner map supplies a certified period-p orbit, and the outer
//! assembly glues the two cycles together. Everything returned is re-verified
//! by evaluation and by exact orbit detection.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bounds::binomial;
use crate::cone::ConeSpec;
use crate::dsl::{Expr, MinMaxMap};
use crate::dynamics::{iterate_orbit, OrbitOptions, Outcome};
use crate::error::{Error, Result};
use crate::point::Point;

/// How support subsets are ordered when drawing the first q of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChooseStrategy {
    /// Colexicographic: {1,2}, {1,3}, {2,3}, {1,4}, ... (the default).
    #[default]
    Colex,
    /// Lexicographic on the sorted element lists: {1,2}, {1,3}, {1,4}, ...
    Lex,
}

/// q distinct m-element supports v^1..v^q inside {1..n}, with the cyclic
/// successor convention v^{q+1} = v^1.
#[derive(Clone, Debug)]
pub struct SupportScheme {
    n: usize,
    m: usize,
    /// supports[k-1] lists the positions of v^k, ascending, 1-based.
    supports: Vec<Vec<usize>>,
}

impl SupportScheme {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.supports.len()
    }

    /// Positions of v^k, 1-based, ascending; k is taken cyclically.
    pub fn support(&self, k: usize) -> &[usize] {
        let q = self.q();
        &self.supports[(k + q - 1) % q]
    }

    /// nu(k, i): position of the i-th nonzero coordinate of v^k (both
    /// 1-based; k cyclic).
    pub fn nu(&self, k: usize, i: usize) -> usize {
        self.support(k)[i - 1]
    }

    /// The supports as 0/1 vectors.
    pub fn vectors(&self) -> Vec<Vec<u8>> {
        self.supports
            .iter()
            .map(|s| {
                let mut v = vec![0u8; self.n];
                for &i in s {
                    v[i - 1] = 1;
                }
                v
            })
            .collect()
    }
}

fn next_colex(a: &mut [usize]) {
    // Smallest index whose value can grow without colliding with the next.
    let m = a.len();
    let mut i = 0;
    while i + 1 < m && a[i] + 1 == a[i + 1] {
        i += 1;
    }
    a[i] += 1;
    for (j, slot) in a.iter_mut().take(i).enumerate() {
        *slot = j + 1;
    }
}

fn next_lex(a: &mut [usize], n: usize) {
    let m = a.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if a[i] < n - (m - 1 - i) {
            a[i] += 1;
            for j in i + 1..m {
                a[j] = a[j - 1] + 1;
            }
            return;
        }
    }
    unreachable!("caller stops before the last subset");
}

/// The first q m-element subsets of {1..n} in the given order, as supports.
pub fn choose_vectors(
    n: usize,
    m: usize,
    q: usize,
    strategy: ChooseStrategy,
) -> Result<SupportScheme> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "support size m={m} must satisfy 1 <= m <= n={n}"
        )));
    }
    if q == 0 || BigUint::from(q) > binomial(n as u64, m as u64) {
        return Err(Error::Domain(format!(
            "q={q} supports requested but 1 <= q <= C({n},{m}) = {} is required",
            binomial(n as u64, m as u64)
        )));
    }
    let mut current: Vec<usize> = (1..=m).collect();
    let mut supports = Vec::with_capacity(q);
    for k in 0..q {
        supports.push(current.clone());
        if k + 1 < q {
            match strategy {
                ChooseStrategy::Colex => next_colex(&mut current),
                ChooseStrategy::Lex => next_lex(&mut current, n),
            }
        }
    }
    Ok(SupportScheme { n, m, supports })
}

/// An inner map with a machine-checked interior periodic orbit. When the base
/// map is structurally bounded by every coordinate, no clamp terms are added
/// and `effective` is the base itself; otherwise each component is capped by
/// C times every coordinate, with C raised until the certified orbit is
/// untouched.
#[derive(Clone, Debug)]
pub struct InnerMap {
    pub base: MinMaxMap,
    pub clamp: Option<BigRational>,
    pub effective: MinMaxMap,
    /// Certified periodic point, interior to the orthant.
    pub point: Point<BigRational>,
    pub period: usize,
}

impl InnerMap {
    pub fn dim(&self) -> usize {
        self.effective.dim()
    }
}

fn all_min_expr(m: usize) -> Expr {
    Expr::min((0..m).map(Expr::var).collect())
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// The catalog: period 1 is the all-min map fixing the ones vector; (2,2) is
/// the 3z1^z2 / z1^3z2 swap; longer periods cycle p half-size subsets, each
/// component taking the min over the subset that feeds it.
fn catalog_base(m: usize, p: usize) -> Result<(MinMaxMap, Point<BigRational>)> {
    if p == 1 {
        let components = vec![all_min_expr(m); m];
        return Ok((
            MinMaxMap::new(components)?,
            Point::from_ints(&vec![1; m]),
        ));
    }
    if (m, p) == (2, 2) {
        let components = vec![
            Expr::min(vec![Expr::scaled(int(3), 0), Expr::var(1)]),
            Expr::min(vec![Expr::var(0), Expr::scaled(int(3), 1)]),
        ];
        return Ok((MinMaxMap::new(components)?, Point::from_ints(&[1, 2])));
    }
    // p distinct half-size subsets S_0..S_{p-1}; component i is the max of
    // min over S_k for every k whose successor subset contains i. The point 2
    // on S_0 and 1 elsewhere then moves the "2" pattern along the subsets.
    let scheme = choose_vectors(m, m / 2, p, ChooseStrategy::Colex)?;
    let mut components = Vec::with_capacity(m);
    for i in 1..=m {
        let mut branches = Vec::new();
        for k in 1..=p {
            if scheme.support(k + 1).contains(&i) {
                branches.push(Expr::min(
                    scheme.support(k).iter().map(|&j| Expr::var(j - 1)).collect(),
                ));
            }
        }
        components.push(if branches.is_empty() {
            all_min_expr(m)
        } else {
            Expr::max(branches)
        });
    }
    let coords: Vec<i64> = (1..=m)
        .map(|i| if scheme.support(1).contains(&i) { 2 } else { 1 })
        .collect();
    Ok((MinMaxMap::new(components)?, Point::from_ints(&coords)))
}

fn clamped(base: &MinMaxMap, c: &BigRational) -> Result<MinMaxMap> {
    let m = base.dim();
    let components = base
        .components()
        .iter()
        .map(|e| {
            let mut terms = vec![e.clone()];
            terms.extend((0..m).map(|j| Expr::scaled(c.clone(), j)));
            Expr::min(terms)
        })
        .collect();
    MinMaxMap::new(components)
}

fn structurally_bounded(map: &MinMaxMap) -> bool {
    let m = map.dim();
    map.components()
        .iter()
        .all(|e| (0..m).all(|j| e.var_bound(j).is_some()))
}

/// Build an inner map with a certified interior orbit of period exactly p on
/// the m-dimensional orthant. `force_clamp` overrides the starting clamp
/// constant (still auto-raised when too small); by default clamp terms only
/// appear when the catalog map is not already bounded by every coordinate.
pub fn inner_map(m: usize, p: usize, force_clamp: Option<BigRational>) -> Result<InnerMap> {
    if m == 0 {
        return Err(Error::Domain("the inner dimension m must be at least 1".into()));
    }
    if p == 0 || BigUint::from(p) > binomial(m as u64, (m / 2) as u64) {
        return Err(Error::Infeasible(format!(
            "period p={p} is not in 1..=C({m},{}) = {}",
            m / 2,
            binomial(m as u64, (m / 2) as u64)
        )));
    }
    let (base, point) = catalog_base(m, p)?;

    // The designed orbit, from the unclamped base.
    let mut orbit = vec![point.clone()];
    for _ in 0..p {
        let next = base.eval(orbit.last().unwrap())?;
        orbit.push(next);
    }
    if orbit[p] != orbit[0] {
        return Err(Error::Invariant(format!(
            "catalog orbit for (m,p)=({m},{p}) does not close after {p} steps"
        )));
    }
    for a in 0..p {
        for b in a + 1..p {
            if orbit[a] == orbit[b] {
                return Err(Error::Invariant(format!(
                    "catalog orbit for (m,p)=({m},{p}) repeats before step {p}"
                )));
            }
        }
        if orbit[a].iter().any(|c| c.is_zero()) {
            return Err(Error::Invariant(format!(
                "catalog orbit for (m,p)=({m},{p}) touches the boundary"
            )));
        }
    }

    let needs_clamp = force_clamp.is_some() || !structurally_bounded(&base);
    let (clamp, effective) = if needs_clamp {
        // Start at twice (1 + the worst image-to-input ratio along the orbit),
        // which keeps the clamp inactive on the orbit; double on any miss.
        let mut c = force_clamp.unwrap_or_else(|| {
            let mut worst = BigRational::zero();
            for a in 0..p {
                let inp_min = orbit[a].iter().min().unwrap();
                let img_max = orbit[a + 1].iter().max().unwrap();
                let ratio = img_max / inp_min;
                if ratio > worst {
                    worst = ratio;
                }
            }
            (BigRational::one() + worst) * int(2)
        });
        let mut raised = 0;
        loop {
            let candidate = clamped(&base, &c)?;
            let untouched = (0..p).all(|a| {
                candidate
                    .eval(&orbit[a])
                    .map(|img| img == orbit[a + 1])
                    .unwrap_or(false)
            });
            if untouched {
                break (Some(c), candidate);
            }
            c = &c * int(2);
            raised += 1;
            if raised > 64 {
                return Err(Error::Invariant(format!(
                    "clamp constant for (m,p)=({m},{p}) would not stabilize"
                )));
            }
        }
    } else {
        (None, base.clone())
    };

    // Final certificate: exact orbit detection must see exactly period p with
    // no transient.
    let cone = ConeSpec::<BigRational>::standard(m);
    let opts = OrbitOptions {
        max_iters: (4 * p as u64).max(64),
        ..OrbitOptions::default()
    };
    let report = iterate_orbit(&cone, &effective, &point, &opts)?;
    match report.outcome {
        Outcome::Converged { transient: 0, period, ref cycle }
            if period == p && cycle[0] == point => {}
        ref other => {
            return Err(Error::Invariant(format!(
                "inner map certification for (m,p)=({m},{p}) failed: {}",
                match other {
                    Outcome::Converged { transient, period, .. } =>
                        format!("detected transient {transient}, period {period}"),
                    o => o.label().to_string(),
                }
            )))
        }
    }

    Ok(InnerMap { base, clamp, effective, point, period: p })
}

fn subst_vars(e: &Expr, positions: &[usize]) -> Expr {
    match e {
        Expr::Atom { coeff, var, offset } => Expr::Atom {
            coeff: coeff.clone(),
            var: positions[*var],
            offset: offset.clone(),
        },
        Expr::Min(children) => {
            Expr::Min(children.iter().map(|c| subst_vars(c, positions)).collect())
        }
        Expr::Max(children) => {
            Expr::Max(children.iter().map(|c| subst_vars(c, positions)).collect())
        }
    }
}

/// Glue the inner map around the supports: component i is the max, over every
/// (k, r) with nu(k+1, r) = i, of the r-th inner component applied to the
/// coordinates selected by v^k. Coordinates no support touches fall back to
/// the min of all variables, which vanishes wherever the orbit lives.
pub fn outer_map(scheme: &SupportScheme, inner: &InnerMap) -> Result<MinMaxMap> {
    if inner.dim() != scheme.m() {
        return Err(Error::DimensionMismatch {
            expected: scheme.m(),
            got: inner.dim(),
        });
    }
    let n = scheme.n();
    let m = scheme.m();
    let q = scheme.q();
    let mut components = Vec::with_capacity(n);
    for i in 1..=n {
        let mut branches = Vec::new();
        for k in 1..=q {
            for r in 1..=m {
                if scheme.nu(k + 1, r) == i {
                    let positions: Vec<usize> =
                        scheme.support(k).iter().map(|&pos| pos - 1).collect();
                    branches.push(subst_vars(
                        &inner.effective.components()[r - 1],
                        &positions,
                    ));
                }
            }
        }
        components.push(if branches.is_empty() {
            Expr::min((0..n).map(Expr::var).collect())
        } else {
            Expr::max(branches)
        });
    }
    MinMaxMap::new(components)
}

/// The p*q points y^{a,b}: the a-th inner orbit point planted on support v^b.
/// Stored flat, index a*q + (b-1).
#[derive(Clone, Debug)]
pub struct OrbitFamily {
    pub p: usize,
    pub q: usize,
    points: Vec<Point<BigRational>>,
}

impl OrbitFamily {
    /// y^{a,b} with 0 <= a < p and 1 <= b <= q.
    pub fn get(&self, a: usize, b: usize) -> &Point<BigRational> {
        &self.points[a * self.q + (b - 1)]
    }

    /// y^{0,1}, the canonical starting point.
    pub fn start(&self) -> &Point<BigRational> {
        self.get(0, 1)
    }

    pub fn all(&self) -> &[Point<BigRational>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Materialize and verify the y^{a,b} family: all p*q points distinct, and
/// the outer map sends y^{a,b} to y^{a+1,b+1} (indices cyclic) under direct
/// evaluation. Failure means the clamp constant or the certificate is broken.
pub fn orbit_points(
    scheme: &SupportScheme,
    inner: &InnerMap,
    outer: &MinMaxMap,
) -> Result<OrbitFamily> {
    let p = inner.period;
    let q = scheme.q();
    let n = scheme.n();
    let mut inner_orbit = vec![inner.point.clone()];
    for _ in 1..p {
        let next = inner.effective.eval(inner_orbit.last().unwrap())?;
        inner_orbit.push(next);
    }

    let mut points = Vec::with_capacity(p * q);
    for a in 0..p {
        for b in 1..=q {
            let mut coords = vec![BigRational::zero(); n];
            for (r, &pos) in scheme.support(b).iter().enumerate() {
                coords[pos - 1] = inner_orbit[a].get(r).clone();
            }
            points.push(Point::new(coords)?);
        }
    }
    let family = OrbitFamily { p, q, points };

    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family.points[i] == family.points[j] {
                return Err(Error::Invariant(format!(
                    "orbit family points {i} and {j} coincide"
                )));
            }
        }
    }
    for a in 0..p {
        for b in 1..=q {
            let image = outer.eval(family.get(a, b))?;
            let expected = family.get((a + 1) % p, b % q + 1);
            if &image != expected {
                return Err(Error::Invariant(format!(
                    "outer map sends y^{{{a},{b}}} to {image}, expected y^{{{},{}}} = {expected}",
                    (a + 1) % p,
                    b % q + 1
                )));
            }
        }
    }
    Ok(family)
}

/// A fully assembled and confirmed construction.
#[derive(Clone, Debug)]
pub struct Construction {
    pub scheme: SupportScheme,
    pub inner: InnerMap,
    pub map: MinMaxMap,
    pub family: OrbitFamily,
    pub start: Point<BigRational>,
    /// lcm(p, q), confirmed by exact orbit detection.
    pub period: usize,
}

/// Compose support choice, inner map, and outer assembly into a map with a
/// verified periodic point of period lcm(p, q) on the standard cone.
pub fn build_period_map(n: usize, m: usize, p: usize, q: usize) -> Result<Construction> {
    if m == 0 || m > n {
        return Err(Error::Infeasible(format!(
            "support size m={m} must satisfy 1 <= m <= n={n}"
        )));
    }
    let p_cap = binomial(m as u64, (m / 2) as u64);
    if p == 0 || BigUint::from(p) > p_cap {
        return Err(Error::Infeasible(format!(
            "inner period p={p} is not in 1..=C({m},{}) = {p_cap}",
            m / 2
        )));
    }
    let q_cap = binomial(n as u64, m as u64);
    if q == 0 || BigUint::from(q) > q_cap {
        return Err(Error::Infeasible(format!(
            "support count q={q} is not in 1..=C({n},{m}) = {q_cap}"
        )));
    }

    let scheme = choose_vectors(n, m, q, ChooseStrategy::Colex)?;
    let inner = inner_map(m, p, None)?;
    let map = outer_map(&scheme, &inner)?;
    let family = orbit_points(&scheme, &inner, &map)?;
    let start = family.start().clone();

    let expected = p.lcm(&q);
    let cone = ConeSpec::<BigRational>::standard(n);
    let opts = OrbitOptions {
        max_iters: (4 * expected as u64).max(64),
        ..OrbitOptions::default()
    };
    let report = iterate_orbit(&cone, &map, &start, &opts)?;
    match report.outcome {
        Outcome::Converged { transient: 0, period, .. } if period == expected => {}
        ref other => {
            return Err(Error::Invariant(format!(
                "construction ({n},{m},{p},{q}) expected period {expected}, got {}",
                match other {
                    Outcome::Converged { transient, period, .. } =>
                        format!("transient {transient}, period {period}"),
                    o => o.label().to_string(),
                }
            )))
        }
    }

    Ok(Construction { scheme, inner, map, family, start, period: expected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_supports() {
        let s = choose_vectors(3, 2, 3, ChooseStrategy::Colex).unwrap();
        assert_eq!(s.vectors(), vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(s.nu(1, 2), 2);
        assert_eq!(s.nu(3, 1), 2);
        assert_eq!(s.nu(4, 1), 1); // cyclic wrap: v^4 = v^1
        let six = choose_vectors(4, 2, 6, ChooseStrategy::Colex).unwrap();
        assert_eq!(
            six.supports,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1, 4],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert!(choose_vectors(3, 2, 4, ChooseStrategy::Colex).is_err());
        assert_eq!(
            choose_vectors(2, 2, 1, ChooseStrategy::Colex)
                .unwrap()
                .vectors(),
            vec![vec![1, 1]]
        );
    }

    #[test]
    fn lex_supports() {
        let s = choose_vectors(4, 2, 3, ChooseStrategy::Lex).unwrap();
        assert_eq!(s.supports, vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
    }

    #[test]
    fn swap_inner_map_is_the_unclamped_catalog_entry() {
        let g = inner_map(2, 2, None).unwrap();
        assert!(g.clamp.is_none());
        assert_eq!(
            g.effective.to_string(),
            "f1 = 3*x1 /\\ x2\nf2 = x1 /\\ 3*x2"
        );
        assert_eq!(g.point, Point::from_ints(&[1, 2]));
        assert_eq!(g.period, 2);
    }

    #[test]
    fn fixed_point_inner_maps() {
        let g = inner_map(1, 1, None).unwrap();
        assert_eq!(g.effective.to_string(), "f1 = x1");
        assert_eq!(g.point, Point::from_ints(&[1]));

        let g2 = inner_map(2, 1, None).unwrap();
        assert_eq!(g2.effective.to_string(), "f1 = x1 /\\ x2\nf2 = x1 /\\ x2");
        assert!(g2.clamp.is_none());
    }

    #[test]
    fn rotation_inner_map_needs_its_clamp() {
        let g = inner_map(3, 3, None).unwrap();
        assert!(g.clamp.is_some());
        assert_eq!(g.period, 3);
        // Orbit rotates the doubled coordinate.
        let o1 = g.effective.eval(&g.point).unwrap();
        let o2 = g.effective.eval(&o1).unwrap();
        let o3 = g.effective.eval(&o2).unwrap();
        assert_eq!(g.point, Point::from_ints(&[2, 1, 1]));
        assert_eq!(o1, Point::from_ints(&[1, 2, 1]));
        assert_eq!(o2, Point::from_ints(&[1, 1, 2]));
        assert_eq!(o3, g.point);
        // Off the designed orbit the clamp kills components fed by a dead
        // coordinate: with x1 = 0 every component is capped at C*0 = 0.
        let img = g
            .effective
            .eval(&Point::<BigRational>::from_ints(&[0, 5, 5]))
            .unwrap();
        assert!(img.is_zero());
    }

    #[test]
    fn infeasible_periods_are_rejected() {
        assert!(matches!(inner_map(2, 3, None), Err(Error::Infeasible(_))));
        assert!(matches!(inner_map(1, 2, None), Err(Error::Infeasible(_))));
    }

    #[test]
    fn forced_clamp_is_raised_until_inactive() {
        let g = inner_map(2, 2, Some(int(1))).unwrap();
        // C = 1 would cap the image (1,2) -> (2,1) at min = 1; doubling once
        // suffices.
        assert_eq!(g.clamp, Some(int(2)));
        assert_eq!(g.period, 2);
    }

    #[test]
    fn outer_assembly_reproduces_the_worked_example() {
        let scheme = choose_vectors(3, 2, 3, ChooseStrategy::Colex).unwrap();
        let inner = inner_map(2, 2, None).unwrap();
        let f = outer_map(&scheme, &inner).unwrap();
        assert_eq!(
            f.to_string(),
            "f1 = (3*x1 /\\ x2) \\/ (3*x2 /\\ x3)\n\
             f2 = (3*x1 /\\ x3) \\/ (x2 /\\ 3*x3)\n\
             f3 = (x1 /\\ 3*x2) \\/ (x1 /\\ 3*x3)"
        );
    }

    #[test]
    fn orbit_family_of_the_worked_example() {
        let scheme = choose_vectors(3, 2, 3, ChooseStrategy::Colex).unwrap();
        let inner = inner_map(2, 2, None).unwrap();
        let f = outer_map(&scheme, &inner).unwrap();
        let family = orbit_points(&scheme, &inner, &f).unwrap();
        assert_eq!(family.len(), 6);
        assert_eq!(family.start(), &Point::from_ints(&[1, 2, 0]));
        let mut all: Vec<Point<BigRational>> = family.all().to_vec();
        let mut expected: Vec<Point<BigRational>> =
            [[1, 2, 0], [1, 0, 2], [0, 1, 2], [2, 1, 0], [2, 0, 1], [0, 2, 1]]
                .iter()
                .map(|c| Point::from_ints(c))
                .collect();
        all.sort_by_key(|p| p.to_string());
        expected.sort_by_key(|p| p.to_string());
        assert_eq!(all, expected);
    }

    #[test]
    fn full_construction_of_the_worked_example() {
        let c = build_period_map(3, 2, 2, 3).unwrap();
        assert_eq!(c.period, 6);
        assert_eq!(c.start, Point::from_ints(&[1, 2, 0]));
        assert!(c.map.is_homogeneous());
    }

    #[test]
    fn single_support_fixed_point() {
        let c = build_period_map(2, 2, 1, 1).unwrap();
        assert_eq!(c.period, 1);
        assert_eq!(c.start, Point::from_ints(&[1, 1]));
        assert_eq!(c.map.to_string(), "f1 = x1 /\\ x2\nf2 = x1 /\\ x2");
    }

    #[test]
    fn min_only_inner_maps_produce_pure_lattice_outer_maps() {
        // Inner period 1 uses the all-min map; the assembled map must be
        // built from bare variables under /\ and \/ alone.
        let c = build_period_map(4, 2, 1, 3).unwrap();
        assert!(c.map.components().iter().all(|e| e.is_bare()));
        assert_eq!(c.period, 3);
    }

    #[test]
    fn mixed_period_construction() {
        let c = build_period_map(4, 2, 2, 4).unwrap();
        assert_eq!(c.period, 4); // lcm(2, 4)
        assert_eq!(c.family.len(), 8);
    }

    #[test]
    fn infeasible_grid_corners() {
        assert!(matches!(build_period_map(3, 3, 2, 2), Err(Error::Infeasible(_))));
        assert!(matches!(build_period_map(3, 4, 1, 1), Err(Error::Infeasible(_))));
        assert!(matches!(build_period_map(3, 2, 3, 1), Err(Error::Infeasible(_))));
    }
}
