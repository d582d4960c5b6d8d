use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::map::ConeMap;
use crate::point::Point;
use crate::scalar::{self, Scalar};

/// Expression over the grammar  expr := term (\/ term)*,
/// term := atom (/\ atom)*, atom := [c*] x_i [+ d] | (expr).
/// Coefficients are strictly positive and offsets nonnegative, which makes
/// every expressible map order preserving and subhomogeneous by construction.
/// Coefficients stay exact rationals in the AST; evaluation converts them
/// into the active scalar type.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// coeff * x_var + offset, with `var` 0-based internally (displayed 1-based).
    Atom {
        coeff: BigRational,
        var: usize,
        offset: BigRational,
    },
    Min(Vec<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    /// Bare variable x_{var+1}.
    pub fn var(var: usize) -> Expr {
        Expr::atom(BigRational::one(), var, BigRational::zero())
    }

    pub fn scaled(coeff: BigRational, var: usize) -> Expr {
        Expr::atom(coeff, var, BigRational::zero())
    }

    pub fn atom(coeff: BigRational, var: usize, offset: BigRational) -> Expr {
        assert!(coeff.is_positive(), "coefficients must be positive");
        assert!(!offset.is_negative(), "offsets must be nonnegative");
        Expr::Atom { coeff, var, offset }
    }

    /// Min of the children; a singleton collapses to the child.
    pub fn min(mut children: Vec<Expr>) -> Expr {
        assert!(!children.is_empty(), "min needs at least one operand");
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Expr::Min(children)
        }
    }

    pub fn max(mut children: Vec<Expr>) -> Expr {
        assert!(!children.is_empty(), "max needs at least one operand");
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Expr::Max(children)
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Expr::Atom { coeff, var, offset } => {
                let mut v = S::from_rational(coeff) * x[*var].clone();
                if !offset.is_zero() {
                    v = v + S::from_rational(offset);
                }
                v
            }
            Expr::Min(children) => children
                .iter()
                .map(|c| c.eval(x))
                .reduce(scalar::min)
                .unwrap(),
            Expr::Max(children) => children
                .iter()
                .map(|c| c.eval(x))
                .reduce(scalar::max)
                .unwrap(),
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            Expr::Atom { var, .. } => *var,
            Expr::Min(children) | Expr::Max(children) => {
                children.iter().map(|c| c.max_var()).max().unwrap()
            }
        }
    }

    pub fn has_offset(&self) -> bool {
        match self {
            Expr::Atom { offset, .. } => !offset.is_zero(),
            Expr::Min(children) | Expr::Max(children) => {
                children.iter().any(|c| c.has_offset())
            }
        }
    }

    /// All atoms are bare variables (coefficient 1, no offset): the shape of
    /// pure lattice expressions.
    pub fn is_bare(&self) -> bool {
        match self {
            Expr::Atom { coeff, offset, .. } => coeff.is_one() && offset.is_zero(),
            Expr::Min(children) | Expr::Max(children) => {
                children.iter().all(|c| c.is_bare())
            }
        }
    }

    /// A constant B with e(z) <= B * z_j everywhere on the orthant, when one
    /// can be read off structurally; `None` when no such bound exists.
    /// Sound but conservative: min takes the best child bound, max needs all
    /// children bounded. Offsets rule out any bound.
    pub fn var_bound(&self, j: usize) -> Option<BigRational> {
        match self {
            Expr::Atom { coeff, var, offset } => {
                if !offset.is_zero() {
                    None
                } else if *var == j {
                    Some(coeff.clone())
                } else {
                    None
                }
            }
            Expr::Min(children) => children.iter().filter_map(|c| c.var_bound(j)).min(),
            Expr::Max(children) => {
                let bounds: Option<Vec<_>> =
                    children.iter().map(|c| c.var_bound(j)).collect();
                bounds.map(|b| b.into_iter().max().unwrap())
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, inside_min: bool) -> fmt::Result {
        match self {
            Expr::Atom { coeff, var, offset } => {
                if !coeff.is_one() {
                    write!(f, "{coeff}*")?;
                }
                write!(f, "x{}", var + 1)?;
                if !offset.is_zero() {
                    write!(f, " + {offset}")?;
                }
                Ok(())
            }
            Expr::Min(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " /\\ ")?;
                    }
                    match c {
                        Expr::Atom { .. } => c.fmt_prec(f, true)?,
                        _ => {
                            write!(f, "(")?;
                            c.fmt_prec(f, false)?;
                            write!(f, ")")?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Max(children) => {
                if inside_min {
                    write!(f, "(")?;
                }
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " \\/ ")?;
                    }
                    match c {
                        Expr::Atom { .. } => c.fmt_prec(f, false)?,
                        Expr::Min(_) => {
                            write!(f, "(")?;
                            c.fmt_prec(f, false)?;
                            write!(f, ")")?;
                        }
                        Expr::Max(_) => {
                            write!(f, "(")?;
                            c.fmt_prec(f, false)?;
                            write!(f, ")")?;
                        }
                    }
                }
                if inside_min {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// A self-map of R^n_+ with one grammar expression per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxMap {
    dim: usize,
    components: Vec<Expr>,
}

impl MinMaxMap {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("a map needs at least one component".into()));
        }
        let dim = components.len();
        for (i, c) in components.iter().enumerate() {
            let mv = c.max_var();
            if mv >= dim {
                return Err(Error::Domain(format!(
                    "component f{} references x{} but the map has {} variables",
                    i + 1,
                    mv + 1,
                    dim
                )));
            }
        }
        Ok(MinMaxMap { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// No component carries a positive additive constant: the map commutes
    /// with scaling exactly, not just subhomogeneously.
    pub fn is_homogeneous(&self) -> bool {
        !self.components.iter().any(|c| c.has_offset())
    }

    pub fn eval<S: Scalar>(&self, x: &Point<S>) -> Result<Point<S>> {
        x.check_dim(self.dim)?;
        let zero = S::zero();
        for (i, c) in x.iter().enumerate() {
            if !(c >= &zero) {
                return Err(Error::NegativeCoordinate { index: i + 1 });
            }
        }
        Point::new(
            self.components
                .iter()
                .map(|e| e.eval(x.coords()))
                .collect(),
        )
    }
}

impl<S: Scalar> ConeMap<S> for MinMaxMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Point<S>) -> Result<Point<S>> {
        self.eval(x)
    }
}

impl fmt::Display for MinMaxMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "f{} = {c}", i + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn eval_min_max_priority_structure() {
        // f1 = (3*x1 /\ x2) \/ x3 at (1, 2, 10) = max(min(3,2), 10) = 10.
        let e = Expr::max(vec![
            Expr::min(vec![Expr::scaled(rat(3, 1), 0), Expr::var(1)]),
            Expr::var(2),
        ]);
        let m = MinMaxMap::new(vec![e, Expr::var(1), Expr::var(2)]).unwrap();
        let y = m
            .eval(&Point::<BigRational>::from_ints(&[1, 2, 10]))
            .unwrap();
        assert_eq!(*y.get(0), rat(10, 1));
    }

    #[test]
    fn eval_rejects_negative_input_and_bad_dims() {
        let m = MinMaxMap::new(vec![Expr::var(0)]).unwrap();
        assert!(matches!(
            m.eval(&Point::<f64>::new(vec![-1.0]).unwrap()),
            Err(Error::NegativeCoordinate { index: 1 })
        ));
        assert!(matches!(
            m.eval(&Point::<f64>::new(vec![1.0, 2.0]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_variables_are_rejected() {
        assert!(MinMaxMap::new(vec![Expr::var(1)]).is_err());
    }

    #[test]
    fn homogeneity_flag() {
        let hom = MinMaxMap::new(vec![Expr::scaled(rat(2, 1), 0)]).unwrap();
        assert!(hom.is_homogeneous());
        let affine =
            MinMaxMap::new(vec![Expr::atom(rat(1, 1), 0, rat(1, 1))]).unwrap();
        assert!(!affine.is_homogeneous());
    }

    #[test]
    fn display_uses_the_surface_syntax() {
        let e = Expr::max(vec![
            Expr::min(vec![Expr::scaled(rat(3, 1), 0), Expr::var(1)]),
            Expr::min(vec![Expr::scaled(rat(1, 2), 1), Expr::atom(rat(1, 1), 2, rat(1, 1))]),
        ]);
        let m = MinMaxMap::new(vec![Expr::var(0), Expr::var(1), e]).unwrap();
        let text = m.to_string();
        assert_eq!(
            text,
            "f1 = x1\nf2 = x2\nf3 = (3*x1 /\\ x2) \\/ (1/2*x2 /\\ x3 + 1)"
        );
    }

    #[test]
    fn var_bound_analysis() {
        // 3*x1 /\ x2: bounded by 3*x1 and by 1*x2.
        let e = Expr::min(vec![Expr::scaled(rat(3, 1), 0), Expr::var(1)]);
        assert_eq!(e.var_bound(0), Some(rat(3, 1)));
        assert_eq!(e.var_bound(1), Some(rat(1, 1)));
        // max(x1, x2) has no bound in terms of x1 alone.
        let e = Expr::max(vec![Expr::var(0), Expr::var(1)]);
        assert_eq!(e.var_bound(0), None);
        // Offsets kill every bound.
        let e = Expr::atom(rat(1, 1), 0, rat(1, 1));
        assert_eq!(e.var_bound(0), None);
    }
}
