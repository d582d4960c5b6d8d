use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

use super::ast::{Expr, MinMaxMap};

/// Parse a complete map file: one `f<i> = <expr>` line per component,
/// blank lines and `#` comments allowed. All of f1..fn must be present,
/// each exactly once, and every variable index must be in 1..=n.
pub fn parse_map(text: &str) -> Result<MinMaxMap> {
    let mut defs: Vec<(usize, Expr, usize)> = Vec::new(); // (component, expr, line)
    let mut var_refs: Vec<(usize, usize, usize)> = Vec::new(); // (var, line, col)

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens = lex_line(lineno, raw)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            line: lineno,
            var_refs: &mut var_refs,
        };
        let (comp, expr) = p.parse_line()?;
        defs.push((comp, expr, lineno));
    }

    if defs.is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "map file defines no components".into(),
        });
    }

    let n = defs.len();
    let mut slots: Vec<Option<Expr>> = vec![None; n];
    for (comp, expr, lineno) in defs {
        if comp == 0 || comp > n {
            return Err(Error::Semantic {
                line: lineno,
                col: 1,
                msg: format!(
                    "component f{comp} out of range: {n} components are defined, so indices run 1..={n}"
                ),
            });
        }
        if slots[comp - 1].is_some() {
            return Err(Error::Semantic {
                line: lineno,
                col: 1,
                msg: format!("component f{comp} is defined twice"),
            });
        }
        slots[comp - 1] = Some(expr);
    }
    for (var, line, col) in var_refs {
        if var == 0 || var > n {
            return Err(Error::Semantic {
                line,
                col,
                msg: format!("variable x{var} out of range 1..={n}"),
            });
        }
    }
    let components = slots
        .into_iter()
        .map(|s| s.expect("all slots filled: count and uniqueness checked"))
        .collect();
    MinMaxMap::new(components)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Comp(usize),        // f<k>
    Var(usize),         // x<k>
    Num(BigRational),   // possibly negative; sign rejected semantically
    Eq,
    Star,
    Plus,
    MinOp,              // /\
    MaxOp,              // \/
    LParen,
    RParen,
}

struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex_line(line: usize, text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '#' => break,
            '=' => {
                out.push(Spanned { tok: Tok::Eq, col });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, col });
                i += 1;
            }
            '+' => {
                out.push(Spanned { tok: Tok::Plus, col });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, col });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, col });
                i += 1;
            }
            '/' => {
                if chars.get(i + 1) == Some(&'\\') {
                    out.push(Spanned { tok: Tok::MinOp, col });
                    i += 2;
                } else {
                    return Err(syntax(line, col, "stray `/`: expected `/\\`"));
                }
            }
            '\\' => {
                if chars.get(i + 1) == Some(&'/') {
                    out.push(Spanned { tok: Tok::MaxOp, col });
                    i += 2;
                } else {
                    return Err(syntax(line, col, "stray `\\`: expected `\\/`"));
                }
            }
            'f' | 'x' => {
                let start = i;
                i += 1;
                let ds = read_digits(&chars, &mut i);
                if ds.is_empty() {
                    return Err(syntax(line, col, &format!("`{c}` must be followed by an index")));
                }
                let idx: usize = ds.parse().map_err(|_| {
                    syntax(line, col, &format!("index `{ds}` is too large"))
                })?;
                let tok = if chars[start] == 'f' {
                    Tok::Comp(idx)
                } else {
                    Tok::Var(idx)
                };
                out.push(Spanned { tok, col });
            }
            '-' | '0'..='9' => {
                let negative = c == '-';
                if negative {
                    i += 1;
                    if !matches!(chars.get(i), Some('0'..='9')) {
                        return Err(syntax(line, col, "`-` must start a numeric literal"));
                    }
                }
                let num = read_digits(&chars, &mut i);
                // A `/` directly followed by digits continues the literal as
                // a fraction; `/\` stays an operator.
                let mut den = String::new();
                if chars.get(i) == Some(&'/') && matches!(chars.get(i + 1), Some('0'..='9')) {
                    i += 1;
                    den = read_digits(&chars, &mut i);
                }
                let numer: BigInt = num.parse().expect("digits");
                let value = if den.is_empty() {
                    BigRational::from_integer(numer)
                } else {
                    let d: BigInt = den.parse().expect("digits");
                    if d.is_zero() {
                        return Err(syntax(line, col, "zero denominator"));
                    }
                    BigRational::new(numer, d)
                };
                let value = if negative { -value } else { value };
                out.push(Spanned { tok: Tok::Num(value), col });
            }
            other => {
                return Err(syntax(line, col, &format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

fn read_digits(chars: &[char], i: &mut usize) -> String {
    let start = *i;
    while matches!(chars.get(*i), Some('0'..='9')) {
        *i += 1;
    }
    chars[start..*i].iter().collect()
}

fn syntax(line: usize, col: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.to_string(),
    }
}

fn semantic(line: usize, col: usize, msg: &str) -> Error {
    Error::Semantic {
        line,
        col,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    line: usize,
    var_refs: &'a mut Vec<(usize, usize, usize)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.tokens.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn advance(&mut self) -> Option<&Spanned> {
        let s = self.tokens.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn parse_line(&mut self) -> Result<(usize, Expr)> {
        let comp = match self.advance() {
            Some(Spanned { tok: Tok::Comp(k), .. }) => *k,
            _ => {
                return Err(syntax(self.line, 1, "each line starts with `f<i> = ...`"));
            }
        };
        match self.advance() {
            Some(Spanned { tok: Tok::Eq, .. }) => {}
            _ => {
                return Err(syntax(self.line, self.col(), "expected `=`"));
            }
        }
        let expr = self.parse_expr()?;
        if self.peek().is_some() {
            return Err(syntax(
                self.line,
                self.col(),
                "unexpected trailing input after the expression",
            ));
        }
        Ok((comp, expr))
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.parse_term()?];
        while self.peek() == Some(&Tok::MaxOp) {
            self.advance();
            terms.push(self.parse_term()?);
        }
        Ok(Expr::max(terms))
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut atoms = vec![self.parse_atom()?];
        while self.peek() == Some(&Tok::MinOp) {
            self.advance();
            atoms.push(self.parse_atom()?);
        }
        Ok(Expr::min(atoms))
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek() {
            Some(Tok::LParen) => {
                self.advance();
                let e = self.parse_expr()?;
                match self.advance() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(e),
                    _ => Err(syntax(self.line, self.col(), "expected `)`")),
                }
            }
            Some(Tok::Num(_)) => {
                let (value, ncol) = match self.advance() {
                    Some(Spanned { tok: Tok::Num(v), col }) => (v.clone(), *col),
                    _ => unreachable!(),
                };
                if !value.is_positive() {
                    return Err(semantic(
                        self.line,
                        ncol,
                        &format!("coefficient {value} must be strictly positive"),
                    ));
                }
                match self.advance() {
                    Some(Spanned { tok: Tok::Star, .. }) => {}
                    _ => {
                        return Err(syntax(
                            self.line,
                            self.col(),
                            "a coefficient must be followed by `*` and a variable",
                        ));
                    }
                }
                let var = self.expect_var()?;
                let offset = self.parse_offset()?;
                Ok(Expr::Atom {
                    coeff: value,
                    var,
                    offset,
                })
            }
            Some(Tok::Var(_)) => {
                let var = self.expect_var()?;
                let offset = self.parse_offset()?;
                Ok(Expr::Atom {
                    coeff: BigRational::from_integer(BigInt::from(1)),
                    var,
                    offset,
                })
            }
            _ => Err(syntax(
                self.line,
                col,
                "expected a variable, a coefficient, or `(`",
            )),
        }
    }

    /// Consumes `x<k>`, records the reference for range checking, returns the
    /// 0-based index.
    fn expect_var(&mut self) -> Result<usize> {
        match self.advance() {
            Some(Spanned { tok: Tok::Var(k), col }) => {
                let (k, col) = (*k, *col);
                self.var_refs.push((k, self.line, col));
                // Range errors are reported after the whole file is read (the
                // component count is not known yet); park index 0 as 0.
                Ok(k.saturating_sub(1))
            }
            _ => Err(syntax(self.line, self.col(), "expected a variable `x<k>`")),
        }
    }

    fn parse_offset(&mut self) -> Result<BigRational> {
        if self.peek() != Some(&Tok::Plus) {
            return Ok(BigRational::zero());
        }
        self.advance();
        let (value, col) = match self.advance() {
            Some(Spanned { tok: Tok::Num(v), col }) => (v.clone(), *col),
            _ => {
                return Err(syntax(
                    self.line,
                    self.col(),
                    "expected a nonnegative constant after `+`",
                ));
            }
        };
        if value.is_negative() {
            return Err(semantic(
                self.line,
                col,
                &format!("additive constant {value} must be nonnegative"),
            ));
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_the_two_sided_example() {
        let m = parse_map("f1 = (3*x1 /\\ x2) \\/ x3\nf2 = x1 + 1/2\nf3 = x3\n").unwrap();
        assert_eq!(m.dim(), 3);
        let y = m
            .eval(&Point::<BigRational>::from_ints(&[1, 2, 10]))
            .unwrap();
        assert_eq!(*y.get(0), rat(10, 1));
        assert_eq!(*y.get(1), rat(3, 2));
        assert!(!m.is_homogeneous());
    }

    #[test]
    fn min_binds_tighter_than_max() {
        let a = parse_map("f1 = 2*x1 /\\ x1 \\/ 3*x1\n").unwrap();
        let b = parse_map("f1 = (2*x1 /\\ x1) \\/ 3*x1\n").unwrap();
        let x = Point::<BigRational>::from_ints(&[1]);
        assert_eq!(a.eval(&x).unwrap(), b.eval(&x).unwrap());
        assert_eq!(*a.eval(&x).unwrap().get(0), rat(3, 1));
    }

    #[test]
    fn negative_coefficient_is_a_semantic_error() {
        let err = parse_map("f1 = -2*x1\n").unwrap_err();
        match err {
            Error::Semantic { line: 1, col, msg } => {
                assert_eq!(col, 6);
                assert!(msg.contains("positive"), "{msg}");
            }
            other => panic!("expected a semantic error, got {other:?}"),
        }
    }

    #[test]
    fn zero_coefficient_and_negative_offset_are_rejected() {
        assert!(matches!(
            parse_map("f1 = 0*x1\n"),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(
            parse_map("f1 = x1 + -1\n"),
            Err(Error::Semantic { .. })
        ));
    }

    #[test]
    fn out_of_range_variable_is_located() {
        let err = parse_map("f1 = x1 /\\ x4\nf2 = x2\n").unwrap_err();
        match err {
            Error::Semantic { line, col, msg } => {
                assert_eq!((line, col), (1, 12));
                assert!(msg.contains("x4"), "{msg}");
            }
            other => panic!("expected a semantic error, got {other:?}"),
        }
    }

    #[test]
    fn missing_and_duplicate_components() {
        assert!(matches!(
            parse_map("f1 = x1\nf3 = x1\n"),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(
            parse_map("f1 = x1\nf1 = x1\n"),
            Err(Error::Semantic { .. })
        ));
    }

    #[test]
    fn rational_literals_do_not_eat_the_min_operator() {
        let m = parse_map("f1 = 1/2*x1 /\\ x1\n").unwrap();
        let y = m.eval(&Point::<BigRational>::from_ints(&[4])).unwrap();
        assert_eq!(*y.get(0), rat(2, 1));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_map("f1 = x1 %\n").unwrap_err() {
            Error::Parse { line: 1, col: 9, .. } => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_map("f1 = \n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_map(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_map("f1 = (x1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_print_parse_is_identity() {
        let src = "f1 = (3*x1 /\\ x2) \\/ (3*x2 /\\ x3)\nf2 = (3*x1 /\\ x3) \\/ (x2 /\\ 3*x3)\nf3 = (x1 /\\ 3*x2) \\/ (x1 /\\ 3*x3)";
        let m = parse_map(src).unwrap();
        let printed = m.to_string();
        let again = parse_map(&printed).unwrap();
        assert_eq!(m, again);
        assert_eq!(printed, src);
    }
}
