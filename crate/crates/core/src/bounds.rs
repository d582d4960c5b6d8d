use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Enumeration cap for the period-set builders; the pair count explodes past
/// this.
pub const SET_ENUM_MAX_N: u64 = 12;

/// Candidate budget for the pruned lcm search in `alpha`.
pub const ALPHA_BUDGET: u64 = 50_000_000;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        num /= BigUint::from(i + 1);
    }
    num
}

fn factorials(n: u64) -> Vec<BigUint> {
    let mut f = Vec::with_capacity(n as usize + 1);
    f.push(BigUint::one());
    for i in 1..=n {
        let prev = f.last().unwrap().clone();
        f.push(prev * BigUint::from(i));
    }
    f
}

/// Largest trinomial coefficient n!/(q!r!s!) over q+r+s=n, by the closed form
/// with the three parts as balanced as possible.
fn beta_closed(n: u64) -> BigUint {
    let f = factorials(n);
    let (q, r, s) = (n / 3, (n + 1) / 3, (n + 2) / 3);
    debug_assert_eq!(q + r + s, n);
    &f[n as usize] / (&f[q as usize] * &f[r as usize] * &f[s as usize])
}

/// Brute maximum of the trinomial coefficient over all splits q+r+s=n.
fn beta_brute(n: u64) -> BigUint {
    let f = factorials(n);
    let mut best = BigUint::zero();
    for q in 0..=n {
        for r in 0..=(n - q) {
            let s = n - q - r;
            let v = &f[n as usize] / (&f[q as usize] * &f[r as usize] * &f[s as usize]);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Maximum of C(n, max(m, floor(n/2))) * C(m, floor(m/2)) over 1 <= m <= n,
/// together with its value at a given m.
fn beta_max_form_term(n: u64, m: u64) -> BigUint {
    binomial(n, m.max(n / 2)) * binomial(m, m / 2)
}

fn beta_max_form(n: u64) -> BigUint {
    (1..=n).map(|m| beta_max_form_term(n, m)).max().unwrap()
}

/// The largest possible period of a periodic point on a cone with n facets.
/// Three independent computations must agree; disagreement is an internal
/// error, never a silent answer.
pub fn beta(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Domain("beta is defined for n >= 1".into()));
    }
    let closed = beta_closed(n);
    let brute = beta_brute(n);
    let max_form = beta_max_form(n);
    if closed != brute || closed != max_form {
        return Err(Error::Invariant(format!(
            "beta({n}) cross-check failed: closed={closed}, brute={brute}, max-form={max_form}"
        )));
    }
    Ok(closed)
}

/// Verification record for the three-way identity behind `beta`.
#[derive(Clone, Debug)]
pub struct Lemma42 {
    pub n: u64,
    pub closed: BigUint,
    pub brute: BigUint,
    pub max_form: BigUint,
    /// m that balances the two binomial factors: floor((n+1)/3) + floor((n+2)/3).
    pub m_star: u64,
    /// The max-form value at m_star equals the maximum.
    pub m_star_attains: bool,
}

impl Lemma42 {
    pub fn agrees(&self) -> bool {
        self.closed == self.brute && self.closed == self.max_form && self.m_star_attains
    }
}

pub fn lemma42_identity(n: u64) -> Result<Lemma42> {
    if n == 0 {
        return Err(Error::Domain("the identity is stated for n >= 1".into()));
    }
    let closed = beta_closed(n);
    let brute = beta_brute(n);
    let max_form = beta_max_form(n);
    let m_star = (n + 1) / 3 + (n + 2) / 3;
    let m_star_attains = beta_max_form_term(n, m_star) == max_form;
    Ok(Lemma42 {
        n,
        closed,
        brute,
        max_form,
        m_star,
        m_star_attains,
    })
}

/// Largest lcm(p, q) over 1 <= m <= n, 1 <= p <= C(m, floor(m/2)),
/// 1 <= q <= C(n, m). Pruned search: scanning q downward stops as soon as
/// even p*q cannot beat the best, and likewise for p at fixed q.
pub fn alpha(n: u64) -> Result<BigUint> {
    alpha_with_budget(n, ALPHA_BUDGET)
}

pub fn alpha_with_budget(n: u64, budget: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Domain("alpha is defined for n >= 1".into()));
    }
    let mut best = BigUint::one();
    let mut steps: u64 = 0;
    for m in 1..=n {
        let pmax = binomial(m, m / 2);
        let qmax = binomial(n, m);
        let mut q = qmax.clone();
        while !q.is_zero() {
            if &pmax * &q <= best {
                break;
            }
            let mut p = pmax.clone();
            while !p.is_zero() {
                if &p * &q <= best {
                    break;
                }
                steps += 1;
                if steps > budget {
                    return Err(Error::Budget {
                        what: format!("alpha({n}) lcm search"),
                        limit: budget,
                    });
                }
                let l = p.lcm(&q);
                if l > best {
                    best = l;
                }
                p -= BigUint::one();
            }
            q -= BigUint::one();
        }
    }
    Ok(best)
}

/// All values lcm(q1, q2) over the admissible rectangle of (m, q1, q2).
pub fn set_a(n: u64) -> Result<BTreeSet<u64>> {
    enumerate_periods(n, |q1, q2| q1.lcm(&q2))
}

/// All values q1 * q2 over the same rectangle.
pub fn set_b(n: u64) -> Result<BTreeSet<u64>> {
    enumerate_periods(n, |q1, q2| q1 * q2)
}

fn enumerate_periods(n: u64, combine: impl Fn(u64, u64) -> u64) -> Result<BTreeSet<u64>> {
    if n == 0 {
        return Err(Error::Domain("period sets are defined for n >= 1".into()));
    }
    if n > SET_ENUM_MAX_N {
        return Err(Error::Budget {
            what: format!("period-set enumeration for n={n}"),
            limit: SET_ENUM_MAX_N,
        });
    }
    let mut out = BTreeSet::new();
    for m in 1..=n {
        let q1max = binomial(n, m).to_u64().expect("small for n <= 12");
        let q2max = binomial(m, m / 2).to_u64().expect("small for n <= 12");
        for q1 in 1..=q1max {
            for q2 in 1..=q2max {
                out.insert(combine(q1, q2));
            }
        }
    }
    Ok(out)
}

/// Does p factor as q1*q2 with q1 <= C(n, max(m, floor(n/2))) and
/// q2 <= C(m, floor(m/2))? Returns a witness pair when it does.
pub fn thm41_factorization(p: u64, m: u64, n: u64) -> Result<Option<(u64, u64)>> {
    if p == 0 {
        return Err(Error::Domain("the period must be >= 1".into()));
    }
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "support size m={m} must satisfy 1 <= m <= n={n}"
        )));
    }
    let q1_cap = binomial(n, m.max(n / 2));
    let q2_cap = binomial(m, m / 2);
    let mut d = 1u64;
    while d * d <= p {
        if p % d == 0 {
            for (q1, q2) in [(d, p / d), (p / d, d)] {
                if BigUint::from(q1) <= q1_cap && BigUint::from(q2) <= q2_cap {
                    return Ok(Some((q1, q2)));
                }
            }
        }
        d += 1;
    }
    Ok(None)
}

/// Deterministic Miller-Rabin with the 12-witness base set, conclusive for
/// everything below 3.3 * 10^24 (far beyond any value this crate produces).
fn is_prime(k: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if k < &two {
        return false;
    }
    let small: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for s in small {
        let s = BigUint::from(s);
        if k == &s {
            return true;
        }
        if (k % &s).is_zero() {
            return false;
        }
    }
    // k - 1 = d * 2^r with d odd
    let one = BigUint::one();
    let km1 = k - &one;
    let r = km1.trailing_zeros().expect("k > 1 so k-1 > 0");
    let d = &km1 >> r;
    'witness: for a in small {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, k);
        if x == one || x == km1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = x.modpow(&two, k);
            if x == km1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime <= k, scanning downward with deterministic primality tests.
pub fn largest_prime_le(k: &BigUint) -> Result<BigUint> {
    if k < &BigUint::from(2u32) {
        return Err(Error::Domain(
            "no prime exists below 2; the argument must be >= 2".into(),
        ));
    }
    let mut c = k.clone();
    loop {
        if is_prime(&c) {
            return Ok(c);
        }
        c -= BigUint::one();
    }
}

/// ln of a big natural via its high bits; accurate to ~1e-15 relative.
fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().expect("fits").ln();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_f64().expect("53 bits fit");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// beta(n) * 2*pi*n / (3^(n+1) * sqrt(3)), computed in the log domain.
/// Tends to 1, quantifying how sharp the balanced-trinomial form is.
pub fn stirling_ratio(n: u64) -> Result<f64> {
    let b = beta(n)?;
    let ln_b = ln_biguint(&b);
    let ln3 = 3f64.ln();
    let log_ratio = ln_b + (std::f64::consts::TAU * n as f64).ln()
        - (n as f64 + 1.0) * ln3
        - 0.5 * ln3;
    Ok(log_ratio.exp())
}

#[derive(Clone, Debug)]
pub struct BoundsRow {
    pub n: u64,
    pub alpha: BigUint,
    pub beta: BigUint,
    pub stirling: Option<f64>,
}

pub fn table(n_max: u64, with_stirling: bool) -> Result<Vec<BoundsRow>> {
    if n_max == 0 {
        return Err(Error::Domain("the table needs n_max >= 1".into()));
    }
    (1..=n_max)
        .map(|n| {
            Ok(BoundsRow {
                n,
                alpha: alpha(n)?,
                beta: beta(n)?,
                stirling: if with_stirling {
                    Some(stirling_ratio(n)?)
                } else {
                    None
                },
            })
        })
        .collect()
}

pub fn table_csv(rows: &[BoundsRow]) -> String {
    let with_stirling = rows.iter().any(|r| r.stirling.is_some());
    let mut out = String::from(if with_stirling {
        "N,alpha,beta,stirling_ratio\n"
    } else {
        "N,alpha,beta\n"
    });
    for r in rows {
        out.push_str(&format!("{},{},{}", r.n, r.alpha, r.beta));
        if let Some(s) = r.stirling {
            out.push_str(&format!(",{s:.6}"));
        }
        out.push('\n');
    }
    out
}
