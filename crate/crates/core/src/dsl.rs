//! The `.crm` manifold language and the expression grammar shared with `.map` files.
//!
//! ```text
//! manifold lewy in C^2
//! vars z w
//! point 0, 0
//! eq Im(w) = |z|^2
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{CrError, Result};
use crate::exactalg::expseries::ExpSeries;
use crate::exactalg::weights::WeightVector;
use crate::exactalg::{conj_name, Poly, VarList, GQ};
use crate::geometry::{ambient_vars, validate, ManifoldSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(GQ),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Conj(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
    AbsSq(Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

struct Lexer;

impl Lexer {
    fn lex(s: &str, line: usize) -> Result<Vec<(Tok, usize)>> {
        let chars: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let col = k + 1;
            if c.is_whitespace() {
                k += 1;
            } else if c.is_ascii_digit() {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let text: String = chars[start..k].iter().collect();
                let v = text.parse::<i64>().map_err(|_| perr(line, col, "integer literal too large"))?;
                out.push((Tok::Num(v), col));
            } else if c.is_alphabetic() || c == '_' {
                let start = k;
                while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                out.push((Tok::Ident(chars[start..k].iter().collect()), col));
            } else if "+-*/^()|,=".contains(c) {
                out.push((Tok::Sym(c), col));
                k += 1;
            } else {
                return Err(perr(line, col, &format!("unexpected character '{}'", c)));
            }
        }
        Ok(out)
    }
}

fn perr(line: usize, col: usize, msg: &str) -> CrError {
    CrError::Parse { line, col, msg: msg.to_string() }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err(&self, msg: &str) -> CrError {
        perr(self.line, self.col(), msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if self.eat('-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let col = self.col();
            match self.peek().cloned() {
                Some(Tok::Num(e)) if (0..=u32::MAX as i64).contains(&e) => {
                    self.pos += 1;
                    return Ok(Expr::Pow(Box::new(base), e as u32));
                }
                _ => return Err(perr(self.line, col, "expected nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(GQ::from(v)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('|')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect('|')?;
                let c2 = self.col();
                let k = match (self.eat('^'), self.peek()) {
                    (true, Some(Tok::Num(k))) if *k > 0 && k % 2 == 0 => *k as u32,
                    _ => return Err(perr(self.line, c2, "only even powers |.|^2k are supported")),
                };
                self.pos += 1;
                let sq = Expr::AbsSq(Box::new(e));
                Ok(if k == 2 { sq } else { Expr::Pow(Box::new(sq), k / 2) })
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = |p: &mut Self, f: fn(Box<Expr>) -> Expr| -> Result<Expr> {
                    p.expect('(')?;
                    let e = p.expr()?;
                    p.expect(')')?;
                    Ok(f(Box::new(e)))
                };
                match name.as_str() {
                    "i" if !self.vars.contains(&name) => Ok(Expr::Num(GQ::i())),
                    "conj" => func(self, Expr::Conj),
                    "Re" => func(self, Expr::Re),
                    "Im" => func(self, Expr::Im),
                    "exp" => func(self, Expr::Exp),
                    _ if self.vars.contains(&name) => Ok(Expr::Var(name)),
                    _ => Err(perr(self.line, col, &format!("unknown identifier '{}'", name))),
                }
            }
            Some(Tok::Sym(c)) => Err(perr(self.line, col, &format!("unexpected '{}'", c))),
            None => Err(perr(self.line, col, "unexpected end of expression")),
        }
    }
}

/// Parse one expression over the given variable names.
pub fn parse_expr(text: &str, vars: &[String], line: usize) -> Result<Expr> {
    let toks = Lexer::lex(text, line)?;
    let mut p = Parser { toks, pos: 0, line, end_col: text.chars().count() + 1, vars };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Polynomial in `Z` and `conj(Z)`; `flip` conjugates the whole expression.
pub fn expr_to_poly(e: &Expr, vars: &VarList, flip: bool) -> Result<Poly> {
    let rec = |x: &Expr, f: bool| expr_to_poly(x, vars, f);
    Ok(match e {
        Expr::Num(c) => Poly::constant(vars, if flip { c.conj() } else { c.clone() }),
        Expr::Var(v) => Poly::var(vars, &if flip { conj_name(v) } else { v.clone() }),
        Expr::Add(a, b) => &rec(a, flip)? + &rec(b, flip)?,
        Expr::Sub(a, b) => &rec(a, flip)? - &rec(b, flip)?,
        Expr::Mul(a, b) => &rec(a, flip)? * &rec(b, flip)?,
        Expr::Div(a, b) => {
            let d = rec(b, flip)?;
            if !d.is_constant() || d.is_zero() {
                return Err(CrError::Invalid("division by a non-constant or zero polynomial".into()));
            }
            rec(a, flip)?.scale(&d.constant_term().inv())
        }
        Expr::Pow(a, k) => rec(a, flip)?.pow(*k),
        Expr::Neg(a) => -&rec(a, flip)?,
        Expr::Conj(a) => rec(a, !flip)?,
        Expr::Re(a) => (&rec(a, flip)? + &rec(a, !flip)?).scale(&GQ::from_frac(1, 2)),
        Expr::Im(a) => (&rec(a, flip)? - &rec(a, !flip)?).scale(&GQ::from_ints(0, 2).inv()),
        Expr::AbsSq(a) => &rec(a, flip)? * &rec(a, !flip)?,
        Expr::Exp(_) => return Err(CrError::Invalid("exp is not allowed in defining equations".into())),
    })
}

/// Evaluate a holomorphic expression on series values. With `flip`, the conjugate
/// function is evaluated (constants conjugated), still on the supplied values.
pub fn expr_to_series(e: &Expr, env: &HashMap<String, ExpSeries>, order: u32, flip: bool) -> Result<ExpSeries> {
    let vars: VarList = env.values().next().map(|s| s.groups().values().next().map(|p| p.vars().clone()))
        .flatten()
        .unwrap_or_else(|| std::sync::Arc::new(vec![]));
    let rec = |x: &Expr| expr_to_series(x, env, order, flip);
    Ok(match e {
        Expr::Num(c) => ExpSeries::constant(&vars, if flip { c.conj() } else { c.clone() }, order),
        Expr::Var(v) => env.get(v).cloned().ok_or_else(|| CrError::Invalid(format!("unbound variable {}", v)))?,
        Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
        Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Expr::Mul(a, b) => rec(a)?.mul(&rec(b)?),
        Expr::Div(a, b) => rec(a)?.mul(&rec(b)?.inverse()?),
        Expr::Pow(a, k) => rec(a)?.pow(*k),
        Expr::Neg(a) => rec(a)?.neg(),
        Expr::Exp(a) => rec(a)?.exp()?,
        Expr::Conj(_) | Expr::Re(_) | Expr::Im(_) | Expr::AbsSq(_) => {
            return Err(CrError::Invalid("map components must be holomorphic".into()))
        }
    })
}

fn header_err(line: usize, msg: &str) -> CrError {
    perr(line, 1, msg)
}

/// Parse a `.crm` manifold description.
pub fn parse_manifold(text: &str) -> Result<ManifoldSpec> {
    let mut name: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut weights: Option<Vec<u32>> = None;
    let mut point: Option<Vec<GQ>> = None;
    let mut rho: Vec<Poly> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest_col = line.find(rest).unwrap_or(0);
        match kw {
            "manifold" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[1] != "in" || !parts[2].starts_with("C^") {
                    return Err(header_err(ln, "expected 'manifold <name> in C^<N>'"));
                }
                let n = parts[2][2..].parse::<usize>().map_err(|_| header_err(ln, "bad dimension"))?;
                name = Some(parts[0].to_string());
                dim = Some(n);
            }
            "vars" => {
                let vs: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
                for v in &vs {
                    if !v.chars().next().map(|c| c.is_alphabetic()).unwrap_or(false)
                        || !v.chars().all(|c| c.is_alphanumeric() || c == '_')
                        || ["i", "conj", "Re", "Im", "exp"].contains(&v.as_str())
                    {
                        return Err(header_err(ln, &format!("invalid variable name '{}'", v)));
                    }
                }
                coords = Some(vs);
            }
            "weights" => {
                let ws: std::result::Result<Vec<u32>, _> = rest.split_whitespace().map(|s| s.parse::<u32>()).collect();
                weights = Some(ws.map_err(|_| header_err(ln, "weights must be positive integers"))?);
            }
            "point" => {
                let cs = coords.as_ref().ok_or_else(|| header_err(ln, "'point' before 'vars'"))?;
                let pieces: Vec<&str> =
                    if rest.contains(',') { rest.split(',').collect() } else { rest.split_whitespace().collect() };
                let mut p = Vec::new();
                for piece in pieces {
                    let e = parse_expr(piece, &[], ln)?;
                    let v = expr_to_poly(&e, &ambient_vars(cs), false)?;
                    if !v.is_constant() {
                        return Err(header_err(ln, "point coordinates must be constants"));
                    }
                    p.push(v.constant_term());
                }
                point = Some(p);
            }
            "eq" => {
                let cs = coords.as_ref().ok_or_else(|| header_err(ln, "'eq' before 'vars'"))?;
                let Some((lhs, rhs)) = rest.split_once('=') else {
                    return Err(perr(ln, rest_col + rest.len() + 1, "expected '='"));
                };
                let shift = |s: &str| -> Result<Expr> {
                    parse_expr(s, cs, ln).map_err(|e| match e {
                        CrError::Parse { line, col, msg } => {
                            let off = s.as_ptr() as usize - line_start(raw).as_ptr() as usize;
                            CrError::Parse { line, col: col + off, msg }
                        }
                        other => other,
                    })
                };
                let l = shift(lhs)?;
                let r = shift(rhs)?;
                let vars = ambient_vars(cs);
                rho.push(&expr_to_poly(&l, &vars, false)? - &expr_to_poly(&r, &vars, false)?);
            }
            other => return Err(header_err(ln, &format!("unknown directive '{}'", other))),
        }
    }
    let name = name.ok_or_else(|| header_err(1, "missing 'manifold' header"))?;
    let coords = coords.ok_or_else(|| header_err(1, "missing 'vars' line"))?;
    if Some(coords.len()) != dim {
        return Err(header_err(1, "number of variables does not match C^N"));
    }
    let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut spec = ManifoldSpec::new(&name, &refs, rho);
    if let Some(w) = weights {
        spec.weights = Some(WeightVector::new(&refs, &w)?);
    }
    spec.basepoint = point;
    validate(&spec)?;
    Ok(spec)
}

fn line_start(raw: &str) -> &str {
    raw
}

/// Canonical text of a spec; parsing it gives back an identical spec.
pub fn print_manifold(spec: &ManifoldSpec) -> String {
    let mut s = String::new();
    writeln!(s, "manifold {} in C^{}", spec.name, spec.dim()).unwrap();
    writeln!(s, "vars {}", spec.coords.join(" ")).unwrap();
    if let Some(w) = &spec.weights {
        let ws: Vec<String> = w.weights.iter().map(|x| x.to_string()).collect();
        writeln!(s, "weights {}", ws.join(" ")).unwrap();
    }
    if let Some(p) = &spec.basepoint {
        let ps: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(s, "point {}", ps.join(", ")).unwrap();
    }
    for r in &spec.rho {
        writeln!(s, "eq {} = 0", r).unwrap();
    }
    s
}

/// Parse a `.map` file: one holomorphic component expression per line.
pub fn parse_map(text: &str, vars: &[String]) -> Result<Vec<Expr>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_expr(line, vars, k + 1)?);
    }
    if out.is_empty() {
        return Err(perr(1, 1, "map file has no components"));
    }
    Ok(out)
}

/// Exact polynomial value of an expression without conjugates or exponentials, if it is one.
pub fn expr_as_poly(e: &Expr, vars: &VarList) -> Option<Poly> {
    fn holo(e: &Expr) -> bool {
        match e {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => holo(a) && holo(b),
            Expr::Pow(a, _) | Expr::Neg(a) => holo(a),
            _ => false,
        }
    }
    if !holo(e) {
        return None;
    }
    expr_to_poly(e, vars, false).ok()
}

/// Does the expression mention `exp`?
pub fn has_exp(e: &Expr) -> bool {
    match e {
        Expr::Exp(_) => true,
        Expr::Num(_) | Expr::Var(_) => false,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => has_exp(a) || has_exp(b),
        Expr::Pow(a, _) | Expr::Neg(a) | Expr::Conj(a) | Expr::Re(a) | Expr::Im(a) | Expr::AbsSq(a) => has_exp(a),
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn num(c: GQ) -> Expr {
        Expr::Num(c)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_one())
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_zero())
    }

    /// Sum of `c·x^a` terms; variables keep their names, conjugates appear as `conj(x)`.
    pub fn from_poly(p: &Poly) -> Expr {
        let mut acc: Option<Expr> = None;
        for (m, c) in p.terms() {
            let mut t = Expr::Num(c.clone());
            for (k, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &p.vars()[k];
                let base = match crate::exactalg::unconj_name(name) {
                    Some(b) => Expr::Conj(Box::new(Expr::var(b))),
                    None => Expr::var(name),
                };
                let f = if e == 1 { base } else { Expr::Pow(Box::new(base), e as u32) };
                t = if t.is_one() { f } else { Expr::Mul(Box::new(t), Box::new(f)) };
            }
            acc = Some(match acc {
                None => t,
                Some(a) => Expr::Add(Box::new(a), Box::new(t)),
            });
        }
        acc.unwrap_or_else(|| Expr::Num(GQ::zero()))
    }

    /// Replace variables by expressions (simultaneously).
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        let b = |x: &Expr| Box::new(x.substitute(map));
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, k) => Expr::Pow(b(x), *k),
            Expr::Neg(x) => Expr::Neg(b(x)),
            Expr::Conj(x) => Expr::Conj(b(x)),
            Expr::Re(x) => Expr::Re(b(x)),
            Expr::Im(x) => Expr::Im(b(x)),
            Expr::AbsSq(x) => Expr::AbsSq(b(x)),
            Expr::Exp(x) => Expr::Exp(b(x)),
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{}", c),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "{}*{}", a, b),
            Expr::Div(a, b) => write!(f, "{}/({})", a, b),
            Expr::Pow(a, k) => write!(f, "({})^{}", a, k),
            Expr::Neg(a) => write!(f, "-({})", a),
            Expr::Conj(a) => write!(f, "conj({})", a),
            Expr::Re(a) => write!(f, "Re({})", a),
            Expr::Im(a) => write!(f, "Im({})", a),
            Expr::AbsSq(a) => write!(f, "|{}|^2", a),
            Expr::Exp(a) => write!(f, "exp({})", a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::var_list;

    #[test]
    fn im_equals_abs_squared() {
        let s = parse_manifold("manifold t in C^2\nvars z w1\neq Im(w1) = |z|^2\n").unwrap();
        let v = var_list(&["z", "w1", "conj(z)", "conj(w1)"]);
        let expect = &(&Poly::var(&v, "w1") - &Poly::var(&v, "conj(w1)")).scale(&GQ::from_ints(0, 2).inv())
            - &(&Poly::var(&v, "z") * &Poly::var(&v, "conj(z)"));
        assert_eq!(s.rho[0], expect);
    }

    #[test]
    fn re_equation() {
        let s = parse_manifold("manifold t in C^3\nvars Z1 Z2 Z3\neq Re(Z3) = 0\n").unwrap();
        let v = var_list(&["Z3", "conj(Z3)"]);
        assert_eq!(s.rho[0], (&Poly::var(&v, "Z3") + &Poly::var(&v, "conj(Z3)")).scale(&GQ::from_frac(1, 2)));
    }

    #[test]
    fn syntax_error_has_column() {
        let err = parse_manifold("manifold t in C^2\nvars z w1\neq Im(w1) =\n").unwrap_err();
        match err {
            CrError::Parse { line, col, .. } => {
                assert_eq!(line, 3);
                assert!(col >= 11, "column {}", col);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn round_trip() {
        let text = "manifold t in C^3\nvars z w1 w2\nweights 1 2 4\npoint 0, 0, 0\neq Im(w1) = |z|^2\neq Im(w2) = Re(w2)*|z|^4/3 + Re(2*i*z^2*conj(z))\n";
        let a = parse_manifold(text).unwrap();
        let b = parse_manifold(&print_manifold(&a)).unwrap();
        assert_eq!(a, b);
        assert_eq!(print_manifold(&a), print_manifold(&b));
    }

    #[test]
    fn reality_enforced() {
        assert!(matches!(
            parse_manifold("manifold t in C^1\nvars Z1\neq Z1 = 2*conj(Z1)\n"),
            Err(CrError::Reality { .. })
        ));
    }
}
