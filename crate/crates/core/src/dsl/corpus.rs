use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ast::{Expr, MinMaxMap};

/// Coefficient pool for generated maps.
fn coeff_pool() -> Vec<BigRational> {
    [(1, 3), (1, 2), (1, 1), (2, 1), (3, 1)]
        .iter()
        .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    /// Maximum nesting depth of min/max nodes.
    pub max_depth: usize,
    /// Probability (out of 100) that an atom carries the offset +1.
    pub offset_pct: u32,
}

impl CorpusConfig {
    pub fn new(seed: u64, count: usize, dim: usize) -> Self {
        CorpusConfig {
            seed,
            count,
            dim,
            max_depth: 3,
            offset_pct: 20,
        }
    }
}

/// Generate `count` random grammar maps, deterministically from the seed.
pub fn corpus(cfg: &CorpusConfig) -> Vec<MinMaxMap> {
    assert!(cfg.dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coeffs = coeff_pool();
    (0..cfg.count)
        .map(|_| random_map_inner(&mut rng, cfg, &coeffs))
        .collect()
}

/// One random map drawn from an external RNG.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> MinMaxMap {
    let cfg = CorpusConfig::new(0, 1, dim);
    random_map_inner(rng, &cfg, &coeff_pool())
}

fn random_map_inner<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &CorpusConfig,
    coeffs: &[BigRational],
) -> MinMaxMap {
    let components = (0..cfg.dim)
        .map(|_| random_expr(rng, cfg, coeffs, 1))
        .collect();
    MinMaxMap::new(components).expect("generated indices are in range")
}

fn random_expr<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &CorpusConfig,
    coeffs: &[BigRational],
    depth: usize,
) -> Expr {
    // Leaves get likelier with depth; depth max_depth forces an atom.
    if depth >= cfg.max_depth || rng.gen_range(0..100) < 25 + 20 * depth as u32 {
        let coeff = coeffs[rng.gen_range(0..coeffs.len())].clone();
        let var = rng.gen_range(0..cfg.dim);
        let offset = if rng.gen_range(0..100) < cfg.offset_pct {
            BigRational::new(BigInt::from(1), BigInt::from(1))
        } else {
            BigRational::new(BigInt::from(0), BigInt::from(1))
        };
        return Expr::Atom { coeff, var, offset };
    }
    let arity = rng.gen_range(2..=3);
    let children = (0..arity)
        .map(|_| random_expr(rng, cfg, coeffs, depth + 1))
        .collect();
    if rng.gen_bool(0.5) {
        Expr::Min(children)
    } else {
        Expr::Max(children)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse_map;
    use crate::point::Point;
    use num_rational::BigRational;

    #[test]
    fn corpus_is_deterministic_in_the_seed() {
        let cfg = CorpusConfig::new(42, 10, 3);
        let a = corpus(&cfg);
        let b = corpus(&cfg);
        assert_eq!(a, b);
        let c = corpus(&CorpusConfig::new(43, 10, 3));
        assert_ne!(a, c);
    }

    #[test]
    fn generated_maps_round_trip_through_the_printer() {
        let cfg = CorpusConfig::new(7, 25, 4);
        for m in corpus(&cfg) {
            let again = parse_map(&m.to_string()).unwrap();
            // Identical ASTs, hence identical evaluation everywhere.
            assert_eq!(m, again);
        }
    }

    #[test]
    fn generated_maps_evaluate_on_the_orthant() {
        let cfg = CorpusConfig::new(1, 10, 2);
        let x = Point::<BigRational>::from_ints(&[3, 5]);
        for m in corpus(&cfg) {
            let y = m.eval(&x).unwrap();
            assert_eq!(y.dim(), 2);
        }
    }
}
