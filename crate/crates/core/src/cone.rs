use std::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::{parse_rational, Scalar};

/// Hard cap on facet count; parts are stored as bits of a `u128`.
pub const MAX_FACETS: usize = 128;

/// The support pattern of a point: the set of facet functionals that are
/// strictly positive on it. Facet indices are 1-based, matching the order
/// the facets were given in. The empty set is the part of the apex {0}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartIndex {
    bits: u128,
}

impl PartIndex {
    pub fn empty() -> Self {
        PartIndex { bits: 0 }
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u128;
        for &i in indices {
            if i == 0 || i > MAX_FACETS {
                return Err(Error::Domain(format!(
                    "facet index {i} out of range 1..={MAX_FACETS}"
                )));
            }
            bits |= 1u128 << (i - 1);
        }
        Ok(PartIndex { bits })
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i >= 1 && i <= MAX_FACETS);
        self.bits |= 1u128 << (i - 1);
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= MAX_FACETS && self.bits & (1u128 << (i - 1)) != 0
    }

    pub fn is_subset(&self, other: &PartIndex) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Facet indices in ascending order, 1-based.
    pub fn indices(&self) -> Vec<usize> {
        (1..=MAX_FACETS).filter(|&i| self.contains(i)).collect()
    }
}

impl fmt::Display for PartIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PartIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A polyhedral cone given by facet functionals: K = {x in span : psi_i(x) >= 0}.
/// Facet rows are stated in ambient coordinates; an optional basis of span(K)
/// restricts membership to that subspace.
#[derive(Clone, Debug)]
pub struct ConeSpec<S> {
    ambient_dim: usize,
    facets: Vec<Vec<S>>,
    span_basis: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> ConeSpec<S> {
    pub fn new(
        ambient_dim: usize,
        facets: Vec<Vec<S>>,
        span_basis: Option<Vec<Vec<S>>>,
    ) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::Domain("ambient dimension must be positive".into()));
        }
        if facets.is_empty() {
            return Err(Error::Domain("a cone needs at least one facet".into()));
        }
        if facets.len() > MAX_FACETS {
            return Err(Error::Domain(format!(
                "{} facets exceed the supported maximum of {MAX_FACETS}",
                facets.len()
            )));
        }
        for row in &facets {
            if row.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: row.len(),
                });
            }
        }
        if let Some(basis) = &span_basis {
            for row in basis {
                if row.len() != ambient_dim {
                    return Err(Error::DimensionMismatch {
                        expected: ambient_dim,
                        got: row.len(),
                    });
                }
            }
        }
        Ok(ConeSpec {
            ambient_dim,
            facets,
            span_basis,
        })
    }

    /// The nonnegative orthant of dimension n: facets are the coordinate
    /// functionals.
    pub fn standard(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_FACETS);
        let facets = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        ConeSpec {
            ambient_dim: n,
            facets,
            span_basis: None,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn facet_rows(&self) -> &[Vec<S>] {
        &self.facets
    }

    pub fn span_basis(&self) -> Option<&[Vec<S>]> {
        self.span_basis.as_deref()
    }

    /// psi_i(x) for 1-based facet index i.
    pub fn facet_value(&self, i: usize, x: &Point<S>) -> S {
        dot(&self.facets[i - 1], x.coords())
    }

    /// All facet values as a point of R^N: the embedding that transports the
    /// cone order onto the standard orthant order.
    pub fn psi_embed(&self, x: &Point<S>) -> Result<Point<S>> {
        x.check_dim(self.ambient_dim)?;
        Point::new(
            self.facets
                .iter()
                .map(|row| dot(row, x.coords()))
                .collect(),
        )
    }

    /// Membership: all facet values nonnegative, and x in span(K) when a span
    /// basis is present.
    pub fn contains(&self, x: &Point<S>) -> Result<bool> {
        x.check_dim(self.ambient_dim)?;
        Ok(self.membership_failure(x).is_none())
    }

    /// Like `contains` but identifies the failing condition; `None` means the
    /// point is a member.
    pub fn membership_failure(&self, x: &Point<S>) -> Option<Error> {
        let zero = S::zero();
        for (i, row) in self.facets.iter().enumerate() {
            if dot(row, x.coords()) < zero {
                return Some(Error::NotInCone { facet: i + 1 });
            }
        }
        if let Some(basis) = &self.span_basis {
            if !in_row_span(basis, x.coords()) {
                return Some(Error::NotInSpan);
            }
        }
        None
    }

    pub fn ensure_member(&self, x: &Point<S>) -> Result<()> {
        x.check_dim(self.ambient_dim)?;
        match self.membership_failure(x) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Cone order: x <= y iff y - x in K.
    pub fn leq(&self, x: &Point<S>, y: &Point<S>) -> Result<bool> {
        x.check_dim(self.ambient_dim)?;
        self.contains(&y.sub(x)?)
    }

    /// The part of x: indices of strictly positive facet values. Requires
    /// membership, so facet values are never negative here.
    pub fn part_index(&self, x: &Point<S>) -> Result<PartIndex> {
        self.ensure_member(x)?;
        let zero = S::zero();
        let mut part = PartIndex::empty();
        for (i, row) in self.facets.iter().enumerate() {
            if dot(row, x.coords()) > zero {
                part.insert(i + 1);
            }
        }
        Ok(part)
    }

    /// x dominates y iff part(y) is contained in part(x); equivalently
    /// y <= beta*x for some finite beta.
    pub fn dominates(&self, x: &Point<S>, y: &Point<S>) -> Result<bool> {
        let px = self.part_index(x)?;
        let py = self.part_index(y)?;
        Ok(py.is_subset(&px))
    }

    /// Warn-level diagnostic: facet rows that are positive multiples of an
    /// earlier row (redundant representation). Never an error.
    pub fn redundant_facets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.facets.len() {
            for j in i + 1..self.facets.len() {
                if is_positive_multiple(&self.facets[i], &self.facets[j]) {
                    out.push((i + 1, j + 1));
                }
            }
        }
        out
    }

    /// Parse the cone file format (or the `cone standard <n>` shorthand).
    pub fn parse(text: &str) -> Result<Self> {
        let parsed = parse_cone_rational(text)?;
        let facets = parsed
            .facets
            .iter()
            .map(|row| row.iter().map(S::from_rational).collect())
            .collect();
        let span = parsed
            .span
            .map(|rows| {
                rows.iter()
                    .map(|row| row.iter().map(S::from_rational).collect())
                    .collect()
            });
        ConeSpec::new(parsed.ambient, facets, span)
    }
}

fn dot<S: Scalar>(row: &[S], x: &[S]) -> S {
    debug_assert_eq!(row.len(), x.len());
    let mut acc = S::zero();
    for (a, b) in row.iter().zip(x) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

fn is_positive_multiple<S: Scalar>(a: &[S], b: &[S]) -> bool {
    // b = c*a for some c > 0?
    let zero = S::zero();
    let mut ratio: Option<S> = None;
    for (ai, bi) in a.iter().zip(b) {
        match (ai.is_zero(), bi.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return false,
            (false, false) => {
                let c = bi.clone() / ai.clone();
                if c <= zero {
                    return false;
                }
                match &ratio {
                    None => ratio = Some(c),
                    Some(r) => {
                        if *r != c {
                            return false;
                        }
                    }
                }
            }
        }
    }
    ratio.is_some()
}

/// Row-span membership via Gaussian elimination. Exact in rational mode;
/// scaled-tolerance zero tests in float mode.
fn in_row_span<S: Scalar>(basis: &[Vec<S>], x: &[S]) -> bool {
    let scale = basis
        .iter()
        .flat_map(|r| r.iter())
        .chain(x.iter())
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max);
    let mut echelon: Vec<(usize, Vec<S>)> = Vec::new(); // (pivot column, row with pivot 1)
    for row in basis {
        if let Some(reduced) = reduce_row(&echelon, row.to_vec(), scale) {
            echelon.push(reduced);
            echelon.sort_by_key(|(p, _)| *p);
        }
    }
    reduce_row(&echelon, x.to_vec(), scale).is_none()
}

/// Eliminate known pivots from `row`; return the normalized remainder with its
/// pivot column, or `None` if the row reduces to zero.
fn reduce_row<S: Scalar>(
    echelon: &[(usize, Vec<S>)],
    mut row: Vec<S>,
    scale: f64,
) -> Option<(usize, Vec<S>)> {
    for (pivot, erow) in echelon {
        if row[*pivot].is_negligible(scale) {
            continue;
        }
        let factor = row[*pivot].clone();
        for k in 0..row.len() {
            row[k] = row[k].clone() - factor.clone() * erow[k].clone();
        }
    }
    let pivot = row.iter().position(|v| !v.is_negligible(scale))?;
    let lead = row[pivot].clone();
    for v in row.iter_mut() {
        *v = v.clone() / lead.clone();
    }
    Some((pivot, row))
}

struct ParsedCone {
    ambient: usize,
    facets: Vec<Vec<BigRational>>,
    span: Option<Vec<Vec<BigRational>>>,
}

fn parse_cone_rational(text: &str) -> Result<ParsedCone> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty cone file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&"cone") {
        return Err(parse_err(hline, "cone files start with a `cone` header"));
    }
    if fields.get(1) == Some(&"standard") {
        let n: usize = fields
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(hline, "`cone standard <n>` needs a positive integer"))?;
        if n == 0 || n > MAX_FACETS {
            return Err(parse_err(hline, "standard cone dimension out of range"));
        }
        if lines.next().is_some() {
            return Err(parse_err(hline, "`cone standard <n>` takes no facet rows"));
        }
        let facets = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigRational::from_int(1)
                        } else {
                            BigRational::from_int(0)
                        }
                    })
                    .collect()
            })
            .collect();
        return Ok(ParsedCone {
            ambient: n,
            facets,
            span: None,
        });
    }

    let mut ambient = None;
    let mut nfacets = None;
    for f in &fields[1..] {
        if let Some(v) = f.strip_prefix("ambient=") {
            ambient = v.parse::<usize>().ok();
        } else if let Some(v) = f.strip_prefix("facets=") {
            nfacets = v.parse::<usize>().ok();
        } else {
            return Err(parse_err(hline, &format!("unrecognized header field `{f}`")));
        }
    }
    let ambient = ambient.ok_or_else(|| parse_err(hline, "missing ambient=<d>"))?;
    let nfacets = nfacets.ok_or_else(|| parse_err(hline, "missing facets=<N>"))?;
    if ambient == 0 || nfacets == 0 {
        return Err(parse_err(hline, "ambient and facet counts must be positive"));
    }

    let mut facets = Vec::with_capacity(nfacets);
    for _ in 0..nfacets {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "fewer facet rows than the header declares"))?;
        if row == "span" {
            return Err(parse_err(ln, "`span` before all facet rows were read"));
        }
        facets.push(parse_row(ln, row, ambient)?);
    }

    let mut span = None;
    if let Some((ln, word)) = lines.next() {
        if word != "span" {
            return Err(parse_err(
                ln,
                "expected `span` or end of file after the facet rows",
            ));
        }
        let mut rows = Vec::new();
        for (ln, row) in lines {
            rows.push(parse_row(ln, row, ambient)?);
        }
        if rows.is_empty() {
            return Err(parse_err(ln, "`span` block has no rows"));
        }
        span = Some(rows);
    }

    Ok(ParsedCone {
        ambient,
        facets,
        span,
    })
}

fn parse_row(line: usize, text: &str, width: usize) -> Result<Vec<BigRational>> {
    let entries: Vec<&str> = text.split_whitespace().collect();
    if entries.len() != width {
        return Err(parse_err(
            line,
            &format!("expected {width} entries, found {}", entries.len()),
        ));
    }
    entries
        .iter()
        .map(|e| parse_rational(e).map_err(|msg| parse_err(line, &msg)))
        .collect()
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        col: 1,
        msg: msg.to_string(),
    }
}
