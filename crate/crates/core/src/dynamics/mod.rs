//! Orbit iteration and periodic-orbit detection for order-preserving maps on
//! polyhedral cones. Exact mode (rational scalars) is the oracle: a reported
//! cycle really is one, re-verified by evaluation. Float mode trades certainty
//! for speed and reports within a tolerance.

use crate::cone::{ConeSpec, PartIndex};
use crate::error::{Error, Result};
use crate::map::ConeMap;
use crate::point::Point;
use crate::scalar::Scalar;

pub mod report;
pub mod verify;

pub use report::orbit_report_json;
pub use verify::{
    run_cycle_checks, verify_antichain, verify_m_invariance, verify_omega_dominance,
    AntichainCheck, CycleChecks, DominanceCheck, FactorizationCheck, MInvarianceCheck,
    PeriodBoundCheck,
};

/// Leading parts recorded for orbits that did not converge.
const PART_PREFIX_CAP: usize = 512;
/// Largest omega-set estimate returned for inconclusive orbits.
const OMEGA_SET_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct OrbitOptions {
    /// Map applications allowed before the orbit is declared inconclusive.
    pub max_iters: u64,
    /// Sup-norm tolerance for float-mode convergence; also the cluster radius
    /// for omega-set estimation.
    pub float_tol: f64,
    /// Sup-norm threshold beyond which the orbit is declared unbounded.
    pub divergence_norm_bound: f64,
    /// Float mode only accepts a period whose witnessing pairs start at or
    /// after this iterate.
    pub burn_in: u64,
    /// Consecutive base indices the gap criterion must hold for (float mode).
    pub consecutive_hits: u32,
    /// Total gap comparisons float mode may spend; the scan over candidate
    /// gaps is quadratic in the worst case, and this keeps it finite.
    pub pair_check_budget: u64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            max_iters: 100_000,
            float_tol: 1e-9,
            divergence_norm_bound: 1e12,
            burn_in: 1_000,
            consecutive_hits: 3,
            pair_check_budget: 50_000_000,
        }
    }
}

impl OrbitOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.float_tol > 0.0) {
            return Err(Error::Domain("float_tol must be positive".into()));
        }
        if !(self.divergence_norm_bound > 0.0) {
            return Err(Error::Domain("divergence_norm_bound must be positive".into()));
        }
        if self.consecutive_hits == 0 {
            return Err(Error::Domain("consecutive_hits must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Outcome<S> {
    Converged {
        transient: usize,
        period: usize,
        /// f^transient(x0), f^(transient+1)(x0), ... — one full period.
        cycle: Vec<Point<S>>,
    },
    Unbounded { at_iter: u64, sup_norm: f64 },
    Inconclusive { iters: u64 },
}

impl<S> Outcome<S> {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::Unbounded { .. } => "unbounded",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Clone, Debug)]
pub struct OrbitReport<S> {
    pub outcome: Outcome<S>,
    /// Parts of x0, f(x0), ...: the full pre-cycle prefix plus one period when
    /// converged, a bounded prefix otherwise.
    pub part_trajectory: Vec<PartIndex>,
    pub part_preperiod: Option<usize>,
    pub part_period: Option<usize>,
    /// Structural checks, run automatically on every detected cycle.
    pub checks: Option<CycleChecks>,
}

impl<S> OrbitReport<S> {
    /// A detected cycle violating a structural guarantee (antichain,
    /// M-invariance, period bound, factorization) — never to pass silently.
    pub fn falsification(&self) -> bool {
        self.checks.as_ref().map_or(false, |c| c.falsification())
    }
}

enum Step<S> {
    Point(Point<S>),
    Diverged { sup_norm: f64 },
}

fn step<S: Scalar, M: ConeMap<S> + ?Sized>(
    map: &M,
    x: &Point<S>,
    bound: f64,
) -> Result<Step<S>> {
    let y = map.apply(x)?;
    let norm = y.sup_norm_f64();
    if !norm.is_finite() || norm > bound {
        Ok(Step::Diverged { sup_norm: norm })
    } else {
        Ok(Step::Point(y))
    }
}

/// Classify the orbit of x0 under the map. Exact scalars: Brent cycle
/// detection on the exact iterate sequence, reduced to the minimal period by
/// divisor checks. Float scalars: gap detection with a sustained-hit
/// criterion after burn-in. Budget exhaustion yields Inconclusive, never an
/// error; structural checks run automatically on every detected cycle.
pub fn iterate_orbit<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    x0: &Point<S>,
    opts: &OrbitOptions,
) -> Result<OrbitReport<S>> {
    opts.validate()?;
    if map.dim() != cone.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.ambient_dim(),
            got: map.dim(),
        });
    }
    cone.ensure_member(x0)?;

    let (outcome, prefix) = if S::EXACT {
        iterate_exact(map, x0, opts)?
    } else {
        iterate_float(map, x0, opts)?
    };

    let (part_trajectory, part_preperiod, part_period) = match &outcome {
        Outcome::Converged { transient, period, .. } => {
            let pts = prefix.as_ref().expect("converged orbits carry their prefix");
            let parts = pts
                .iter()
                .map(|p| cone.part_index(p))
                .collect::<Result<Vec<_>>>()?;
            let (pre, per) = converged_part_period(&parts, *transient, *period);
            (parts, Some(pre), Some(per))
        }
        Outcome::Unbounded { at_iter, .. } => {
            let parts = bounded_part_prefix(cone, map, x0, &prefix, *at_iter as usize)?;
            split_tail(parts)
        }
        Outcome::Inconclusive { iters } => {
            let parts = bounded_part_prefix(cone, map, x0, &prefix, *iters as usize)?;
            split_tail(parts)
        }
    };

    let checks = match &outcome {
        Outcome::Converged { cycle, .. } => {
            Some(run_cycle_checks(cone, map, cycle, opts.float_tol)?)
        }
        _ => None,
    };

    Ok(OrbitReport {
        outcome,
        part_trajectory,
        part_preperiod,
        part_period,
        checks,
    })
}

fn split_tail(parts: Vec<PartIndex>) -> (Vec<PartIndex>, Option<usize>, Option<usize>) {
    match detect_tail_period(&parts) {
        Some((pre, per)) => (parts, Some(pre), Some(per)),
        None => (parts, None, None),
    }
}

fn bounded_part_prefix<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    x0: &Point<S>,
    prefix: &Option<Vec<Point<S>>>,
    visited: usize,
) -> Result<Vec<PartIndex>> {
    let take = visited.saturating_add(1).min(PART_PREFIX_CAP);
    if let Some(history) = prefix {
        return history
            .iter()
            .take(take)
            .map(|p| cone.part_index(p))
            .collect();
    }
    // No stored history (exact mode): replay the already-classified prefix.
    let mut parts = Vec::with_capacity(take);
    let mut cur = x0.clone();
    for k in 0..take {
        parts.push(cone.part_index(&cur)?);
        if k + 1 < take {
            cur = map.apply(&cur)?;
        }
    }
    Ok(parts)
}

fn iterate_exact<S: Scalar, M: ConeMap<S> + ?Sized>(
    map: &M,
    x0: &Point<S>,
    opts: &OrbitOptions,
) -> Result<(Outcome<S>, Option<Vec<Point<S>>>)> {
    let bound = opts.divergence_norm_bound;

    // Phase 1 (Brent): find some period lam of the eventual cycle. Only this
    // phase consumes the budget; the later phases replay known-visited ground.
    let mut hare = match step(map, x0, bound)? {
        Step::Point(p) => p,
        Step::Diverged { sup_norm } => {
            return Ok((Outcome::Unbounded { at_iter: 1, sup_norm }, None))
        }
    };
    let mut applied: u64 = 1;
    let mut tortoise = x0.clone();
    let mut power: u64 = 1;
    let mut lam: u64 = 1;
    while tortoise != hare {
        if applied >= opts.max_iters {
            return Ok((Outcome::Inconclusive { iters: applied }, None));
        }
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = match step(map, &hare, bound)? {
            Step::Point(p) => p,
            Step::Diverged { sup_norm } => {
                return Ok((
                    Outcome::Unbounded { at_iter: applied + 1, sup_norm },
                    None,
                ))
            }
        };
        applied += 1;
        lam += 1;
    }
    let lam = lam as usize;

    // Phase 2: transient length, by sliding a lam-separated pair from x0.
    let mut lead = x0.clone();
    for _ in 0..lam {
        lead = map.apply(&lead)?;
    }
    let mut tail = x0.clone();
    let mut mu: usize = 0;
    while tail != lead {
        tail = map.apply(&tail)?;
        lead = map.apply(&lead)?;
        mu += 1;
    }

    // Phase 3: reconstruct the prefix and reduce lam to the minimal period.
    let total = mu + lam;
    let mut pts = Vec::with_capacity(total);
    let mut cur = x0.clone();
    for _ in 0..total {
        pts.push(cur.clone());
        cur = map.apply(&cur)?;
    }
    debug_assert!(cur == pts[mu], "cycle must close exactly");
    let cycle_full = &pts[mu..];
    let period = (1..=lam)
        .find(|d| {
            lam % d == 0 && (0..lam).all(|i| cycle_full[(i + d) % lam] == cycle_full[i])
        })
        .unwrap_or(lam);
    let cycle = cycle_full[..period].to_vec();
    pts.truncate(mu + period);
    Ok((
        Outcome::Converged { transient: mu, period, cycle },
        Some(pts),
    ))
}

fn iterate_float<S: Scalar, M: ConeMap<S> + ?Sized>(
    map: &M,
    x0: &Point<S>,
    opts: &OrbitOptions,
) -> Result<(Outcome<S>, Option<Vec<Point<S>>>)> {
    let mut history = vec![x0.clone()];
    let mut run: Vec<u32> = Vec::new(); // run[p-1]: consecutive hits for gap p
    let mut pair_checks: u64 = 0;
    let mut applied: u64 = 0;
    loop {
        if applied >= opts.max_iters {
            return Ok((Outcome::Inconclusive { iters: applied }, Some(history)));
        }
        let next = match step(map, history.last().unwrap(), opts.divergence_norm_bound)? {
            Step::Point(p) => p,
            Step::Diverged { sup_norm } => {
                return Ok((
                    Outcome::Unbounded { at_iter: applied + 1, sup_norm },
                    Some(history),
                ))
            }
        };
        applied += 1;
        history.push(next);
        let j = history.len() - 1;
        for p in 1..=j {
            if run.len() < p {
                run.push(0);
            }
            let hit = history[j].dist_sup_f64(&history[j - p]) < opts.float_tol;
            run[p - 1] = if hit { run[p - 1] + 1 } else { 0 };
            pair_checks += 1;
            if hit
                && run[p - 1] >= opts.consecutive_hits
                && (j - p) as u64 >= opts.burn_in
            {
                // Smallest gap wins: smaller p at this step was scanned first,
                // and earlier steps found nothing.
                let mut t = j - p;
                while t > 0 && history[t - 1].dist_sup_f64(&history[t - 1 + p]) < opts.float_tol
                {
                    t -= 1;
                }
                let cycle = history[t..t + p].to_vec();
                history.truncate(t + p);
                return Ok((
                    Outcome::Converged { transient: t, period: p, cycle },
                    Some(history),
                ));
            }
            if pair_checks >= opts.pair_check_budget {
                return Ok((Outcome::Inconclusive { iters: applied }, Some(history)));
            }
        }
    }
}

/// Minimal period of the cycle's part sequence (a divisor of the orbit
/// period) and how far back its pattern extends into the transient.
fn converged_part_period(parts: &[PartIndex], transient: usize, period: usize) -> (usize, usize) {
    let cycle_parts = &parts[transient..transient + period];
    let rho = (1..=period)
        .find(|d| {
            period % d == 0 && (0..period).all(|i| cycle_parts[(i + d) % period] == cycle_parts[i])
        })
        .unwrap_or(period);
    let mut t = transient;
    while t > 0 && parts[t - 1] == parts[t - 1 + rho] {
        t -= 1;
    }
    (t, rho)
}

/// Eventual period of a finite part sequence, accepted only when at least two
/// full periods are witnessed at the tail; preperiod by walking back.
fn detect_tail_period(seq: &[PartIndex]) -> Option<(usize, usize)> {
    let l = seq.len();
    for rho in 1..=l / 2 {
        if (l - 2 * rho..l - rho).all(|k| seq[k] == seq[k + rho]) {
            let mut t = l - 2 * rho;
            while t > 0 && seq[t - 1] == seq[t - 1 + rho] {
                t -= 1;
            }
            return Some((t, rho));
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct PartTrajectory {
    pub parts: Vec<PartIndex>,
    pub preperiod: Option<usize>,
    pub period: Option<usize>,
}

/// Parts of f^k(x0) for k = 0..=kmax, with the eventual period of the
/// sequence in the finite facet-subset lattice, detected directly by equality
/// on part indices.
pub fn part_trajectory<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    x0: &Point<S>,
    kmax: usize,
) -> Result<PartTrajectory> {
    if map.dim() != cone.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cone.ambient_dim(),
            got: map.dim(),
        });
    }
    cone.ensure_member(x0)?;
    let mut parts = Vec::with_capacity(kmax + 1);
    let mut cur = x0.clone();
    for k in 0..=kmax {
        parts.push(cone.part_index(&cur)?);
        if k < kmax {
            cur = map.apply(&cur)?;
        }
    }
    let (preperiod, period) = match detect_tail_period(&parts) {
        Some((t, rho)) => (Some(t), Some(rho)),
        None => (None, None),
    };
    Ok(PartTrajectory { parts, preperiod, period })
}

/// Estimate of the orbit's limit set: the exact cycle when detection
/// converged; a float-tolerance clustering of the post-burn-in iterates in
/// float mode; a deduplicated iterate set (capped) when exact detection was
/// inconclusive. Unbounded orbits have no limit points in the cone.
pub fn omega_limit_estimate<S: Scalar, M: ConeMap<S> + ?Sized>(
    cone: &ConeSpec<S>,
    map: &M,
    x0: &Point<S>,
    opts: &OrbitOptions,
) -> Result<Vec<Point<S>>> {
    opts.validate()?;
    cone.ensure_member(x0)?;
    if S::EXACT {
        let rep = iterate_orbit(cone, map, x0, opts)?;
        match rep.outcome {
            Outcome::Converged { cycle, .. } => Ok(cycle),
            Outcome::Unbounded { .. } => Err(Error::Domain(
                "the orbit is unbounded; it has no limit points in the cone".into(),
            )),
            Outcome::Inconclusive { .. } => {
                let mut set: Vec<Point<S>> = Vec::new();
                let mut cur = x0.clone();
                for _ in 0..opts.max_iters {
                    if !set.contains(&cur) {
                        if set.len() >= OMEGA_SET_CAP {
                            break;
                        }
                        set.push(cur.clone());
                    }
                    cur = map.apply(&cur)?;
                }
                Ok(set)
            }
        }
    } else {
        let mut history = vec![x0.clone()];
        for _ in 0..opts.max_iters {
            match step(map, history.last().unwrap(), opts.divergence_norm_bound)? {
                Step::Point(p) => history.push(p),
                Step::Diverged { .. } => {
                    return Err(Error::Domain(
                        "the orbit is unbounded; it has no limit points in the cone".into(),
                    ))
                }
            }
        }
        let start = (opts.burn_in as usize).min(history.len() - 1);
        let mut reps: Vec<Point<S>> = Vec::new();
        for p in &history[start..] {
            if !reps.iter().any(|r| r.dist_sup_f64(p) <= opts.float_tol) {
                if reps.len() >= OMEGA_SET_CAP {
                    break;
                }
                reps.push(p.clone());
            }
        }
        Ok(reps)
    }
}
