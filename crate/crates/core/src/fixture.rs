//! Line-oriented fixture format.
//!
//! ```text
//! dim 4
//! param a2 a3 real c
//! constraint a2*~a2 = a3 + ~a3
//! d e4 = a2*e13 + a3*e1~1
//! metric diag 1 1 1 1
//! metric h34 = -i*al34
//! phi = t*u*~e3@e3
//! family a34(t) = al34 + t*b34
//! assign a2 = 1+i
//! ```
//!
//! Forms are written with monomial atoms (`e13`, `e1~1`, `e~13`) or as wedge
//! products of generators (`e1^~e1`). `c*~e<j>@e<l>` is the term
//! `c ~e^j ⊗ Z_l` of a (0,1)-vector form.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::deformation::VectorForm01;
use crate::error::{Error, Result};
use crate::exterior::{Form, Monomial, MAX_DIM};
use crate::hermitian::HermitianMetric;
use crate::linalg::{self, Matrix};
use crate::nilcomplex::{ComplexAlgebra, Constraint};
use crate::obstruction::MetricFamily;
use crate::scalars::{vars, Assignment, GaussRat, ParamExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Num(s.parse().expect("digits")), col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut s: String = chars[start..i].iter().collect();
            // monomial atoms may carry a `~` block: e1~1, e~13
            let is_mono = s.starts_with('e') && s[1..].chars().all(|d| d.is_ascii_digit());
            if is_mono && i + 1 < chars.len() && chars[i] == '~' && chars[i + 1].is_ascii_digit() {
                s.push('~');
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                }
            }
            out.push(Token { tok: Tok::Ident(s), col });
            continue;
        }
        if "+-*/^()~@=,".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
            continue;
        }
        return Err(Error::Parse { line, col, msg: format!("unexpected character `{}`", c) });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(ParamExpr),
    Form(Form),
    Vector(VectorForm01),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Form(_) => "form",
            Value::Vector(_) => "vector form",
        }
    }
}

/// Which names an expression may use.
#[derive(Clone, Copy)]
enum Scope<'a> {
    /// Any identifier is a complex parameter.
    Open,
    Declared { params: &'a BTreeSet<String>, reals: &'a BTreeSet<String>, n: usize, allow_t: bool },
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
    scope: Scope<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, col: self.col(), msg: msg.into() })
    }

    fn err_at<T>(&self, col: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, col, msg: msg.into() })
    }

    fn n(&self) -> usize {
        match self.scope {
            Scope::Open => MAX_DIM,
            Scope::Declared { n, .. } => n,
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Value> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, bp) = match self.peek() {
                Some(Tok::Sym(c @ ('+' | '-'))) => (*c, 1),
                Some(Tok::Sym('@')) => ('@', 2),
                Some(Tok::Sym(c @ ('*' | '/'))) => (*c, 3),
                Some(Tok::Sym('^')) => ('^', 4),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            let col = self.col();
            self.pos += 1;
            // `^` is right-associative, the rest left-associative
            let rhs = if op == '^' { self.expr(bp)? } else { self.expr(bp + 1)? };
            lhs = self.binary(op, lhs, rhs, col)?;
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Value> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Sym('-')) => {
                self.pos += 1;
                // binds looser than `^`: -x^2 is -(x^2)
                let v = self.expr(4)?;
                self.negate(v)
            }
            Some(Tok::Sym('+')) => {
                self.pos += 1;
                self.expr(4)
            }
            Some(Tok::Sym('~')) => {
                self.pos += 1;
                let v = self.expr(6)?;
                match v {
                    Value::Scalar(s) => Ok(Value::Scalar(s.conj())),
                    Value::Form(f) => Ok(Value::Form(f.conj())),
                    Value::Vector(_) => self.err_at(col, "cannot conjugate a vector form"),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let v = self.expr(0)?;
                if self.peek() != Some(&Tok::Sym(')')) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Num(k)) => {
                self.pos += 1;
                Ok(Value::Scalar(ParamExpr::constant(GaussRat::from_bigint(k.clone()))))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.ident(&name, col)
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected `{}`", c)),
            None => self.err("unexpected end of expression"),
        }
    }

    fn ident(&self, name: &str, col: usize) -> Result<Value> {
        if name == "i" {
            return Ok(Value::Scalar(ParamExpr::i()));
        }
        if let Some(rest) = name.strip_prefix('e') {
            if rest.is_empty() || rest.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '~') {
                return self.monomial_atom(rest, col);
            }
        }
        match self.scope {
            Scope::Open => {
                // names keep the kind they were first interned with
                match vars::lookup(name) {
                    Some(id) => Ok(Value::Scalar(ParamExpr::var(id))),
                    None => Ok(Value::Scalar(ParamExpr::param(name).map_err(|e| self.kind_err(e, col))?)),
                }
            }
            Scope::Declared { params, reals, allow_t, .. } => {
                if name == vars::CURVE_VAR && allow_t {
                    return Ok(Value::Scalar(ParamExpr::var(vars::curve_var())));
                }
                if params.contains(name) {
                    return Ok(Value::Scalar(ParamExpr::param(name).map_err(|e| self.kind_err(e, col))?));
                }
                if reals.contains(name) {
                    return Ok(Value::Scalar(ParamExpr::real_var(name).map_err(|e| self.kind_err(e, col))?));
                }
                Err(Error::UnknownParameter { name: name.into(), line: self.line, col })
            }
        }
    }

    fn kind_err(&self, e: Error, col: usize) -> Error {
        Error::Parse { line: self.line, col, msg: e.to_string() }
    }

    fn monomial_atom(&self, rest: &str, col: usize) -> Result<Value> {
        let (h, a) = match rest.split_once('~') {
            Some((h, a)) => (h, a),
            None => (rest, ""),
        };
        if h.is_empty() && a.is_empty() {
            return self.err_at(col, "empty monomial `e`");
        }
        let n = self.n();
        let digits = |s: &str| -> Result<Vec<usize>> {
            s.chars()
                .map(|c| {
                    let k = c.to_digit(10).unwrap() as usize;
                    if k == 0 || k > n {
                        Err(Error::DimensionMismatch {
                            line: self.line,
                            col,
                            msg: format!("index {} outside 1..{}", k, n),
                        })
                    } else {
                        Ok(k)
                    }
                })
                .collect()
        };
        let (hi, ai) = (digits(h)?, digits(a)?);
        let f = Form::from_legs(n, &hi, &ai);
        if f.is_zero() {
            return self.err_at(col, "repeated index in monomial");
        }
        Ok(Value::Form(f))
    }

    fn negate(&self, v: Value) -> Result<Value> {
        Ok(match v {
            Value::Scalar(s) => Value::Scalar(-s),
            Value::Form(f) => Value::Form(f.neg()),
            Value::Vector(x) => Value::Vector(x.map_coeffs(|c| Ok(-c))?),
        })
    }

    fn as_form(&self, v: Value) -> Option<Form> {
        match v {
            Value::Scalar(s) => Some(Form::monomial(self.n(), Monomial::ONE, s)),
            Value::Form(f) => Some(f),
            Value::Vector(_) => None,
        }
    }

    fn binary(&self, op: char, l: Value, r: Value, col: usize) -> Result<Value> {
        let mismatch = |l: &Value, r: &Value| -> Result<Value> {
            self.err_at(col, format!("cannot apply `{}` to {} and {}", op, l.kind(), r.kind()))
        };
        match op {
            '+' | '-' => match (l, r) {
                (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(if op == '+' { &a + &b } else { &a - &b })),
                (Value::Vector(a), Value::Vector(b)) => {
                    let comps = a
                        .components()
                        .iter()
                        .zip(b.components())
                        .map(|(x, y)| if op == '+' { x.add(y) } else { x.sub(y) })
                        .collect();
                    Ok(Value::Vector(VectorForm01::new(comps)?))
                }
                (l, r) => {
                    let (Some(a), Some(b)) = (self.as_form(l.clone()), self.as_form(r.clone())) else {
                        return mismatch(&l, &r);
                    };
                    Ok(Value::Form(if op == '+' { a.add(&b) } else { a.sub(&b) }))
                }
            },
            '*' => match (l, r) {
                (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(&a * &b)),
                (Value::Scalar(a), Value::Form(f)) | (Value::Form(f), Value::Scalar(a)) => Ok(Value::Form(f.scale(&a))),
                (Value::Scalar(a), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(a)) => {
                    Ok(Value::Vector(v.map_coeffs(|c| Ok(c * &a))?))
                }
                (l, r) => mismatch(&l, &r),
            },
            '/' => match (l, r) {
                (x, Value::Scalar(b)) => {
                    let inv = b.inv().map_err(|_| Error::Parse { line: self.line, col, msg: "division by zero".into() })?;
                    self.binary('*', x, Value::Scalar(inv), col)
                }
                (l, r) => mismatch(&l, &r),
            },
            '^' => match (l, r) {
                (Value::Scalar(a), Value::Scalar(b)) => {
                    let e = b.as_constant().filter(|c| c.is_real() && c.re.is_integer()).and_then(|c| {
                        let k = c.re.to_integer();
                        u32::try_from(k).ok()
                    });
                    match e {
                        Some(k) => Ok(Value::Scalar(a.pow(k))),
                        None => self.err_at(col, "exponent must be a non-negative integer"),
                    }
                }
                (l, r) => {
                    let (Some(a), Some(b)) = (self.as_form(l.clone()), self.as_form(r.clone())) else {
                        return mismatch(&l, &r);
                    };
                    Ok(Value::Form(a.wedge(&b).map_err(|e| Error::Parse { line: self.line, col, msg: e.to_string() })?))
                }
            },
            '@' => match (l, r) {
                (Value::Form(f), Value::Form(z)) => {
                    let target = match z.bidegree() {
                        Some((1, 0)) if z.len() == 1 && z.terms().next().unwrap().1.is_one() => {
                            z.terms().next().unwrap().0.hol_indices()[0]
                        }
                        _ => return self.err_at(col, "right side of `@` must be a generator e<k>"),
                    };
                    if !f.is_homogeneous(0, 1) {
                        return self.err_at(col, "left side of `@` must be a (0,1)-form");
                    }
                    let n = self.n();
                    let mut comps = vec![Form::zero(n); n];
                    comps[target - 1] = f;
                    Ok(Value::Vector(VectorForm01::new(comps)?))
                }
                (l, r) => mismatch(&l, &r),
            },
            _ => unreachable!(),
        }
    }
}

fn parse_value(src: &str, line: usize, col0: usize, scope: Scope) -> Result<Value> {
    let toks = lex(src, line, col0)?;
    let end_col = col0 + src.chars().count();
    let mut p = Parser { toks, pos: 0, line, end_col, scope };
    if p.toks.is_empty() {
        return p.err("empty expression");
    }
    let v = p.expr(0)?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(v)
}

/// Parses a standalone scalar expression. Known names keep their kind,
/// unknown ones become complex parameters and `t` is the curve variable.
pub fn parse_scalar(src: &str) -> Result<ParamExpr> {
    match parse_value(src, 1, 1, Scope::Open)? {
        Value::Scalar(s) => Ok(s),
        v => Err(Error::Parse { line: 1, col: 1, msg: format!("expected a scalar, found a {}", v.kind()) }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub n: usize,
    pub params: Vec<String>,
    pub reals: Vec<String>,
    /// Each constraint is `expr = 0`.
    pub constraints: Vec<ParamExpr>,
    pub d_eta: Vec<Form>,
    pub metric: Matrix,
    pub phi: Option<VectorForm01>,
    /// Full family matrix `h(t)` when a family block is present.
    pub family: Option<Matrix>,
    pub assign: Assignment,
}

/// An algebra with its metric and optional deformation data.
#[derive(Clone, Debug)]
pub struct Setup {
    pub alg: ComplexAlgebra,
    pub metric: HermitianMetric,
    pub phi: Option<VectorForm01>,
    pub family: Option<MetricFamily>,
}

fn index_pair(s: &str) -> Option<(usize, usize)> {
    let d: Vec<usize> = s.chars().map(|c| c.to_digit(10).map(|x| x as usize)).collect::<Option<_>>()?;
    (d.len() == 2).then(|| (d[0], d[1]))
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture> {
        let mut n: Option<usize> = None;
        let mut params: Vec<String> = Vec::new();
        let mut reals: Vec<String> = Vec::new();
        let mut constraints = Vec::new();
        let mut d_eta: Vec<Form> = Vec::new();
        let mut metric: Matrix = Vec::new();
        let mut phi: Option<VectorForm01> = None;
        let mut family_entries: Vec<((usize, usize), ParamExpr)> = Vec::new();
        let mut assign = Assignment::new();

        for (li, raw) in text.lines().enumerate() {
            let line = li + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim_start();
            if trimmed.trim().is_empty() {
                continue;
            }
            let indent = content.len() - trimmed.len();
            let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed.trim_end(), ""));
            let rest_col = indent + kw.len() + 2;
            let perr = |col: usize, msg: &str| Error::Parse { line, col, msg: msg.into() };
            if kw != "dim" && n.is_none() {
                return Err(perr(indent + 1, "the first statement must be `dim <n>`"));
            }
            let pset: BTreeSet<String> = params.iter().cloned().collect();
            let rset: BTreeSet<String> = reals.iter().cloned().collect();
            let dim = n.unwrap_or(0);
            let scope = |allow_t: bool| Scope::Declared { params: &pset, reals: &rset, n: dim, allow_t };
            // splits `lhs = rhs` and reports the column where rhs starts
            let split_eq = |s: &str, col: usize| -> Result<(String, String, usize)> {
                match s.find('=') {
                    Some(k) => Ok((s[..k].trim().to_string(), s[k + 1..].to_string(), col + k + 1)),
                    None => Err(perr(col, "expected `=`")),
                }
            };
            match kw {
                "dim" => {
                    if n.is_some() {
                        return Err(perr(indent + 1, "duplicate `dim`"));
                    }
                    let k: usize = rest.trim().parse().map_err(|_| perr(rest_col, "expected a dimension"))?;
                    if k == 0 || k > MAX_DIM {
                        return Err(Error::DimensionMismatch { line, col: rest_col, msg: format!("dimension must be in 1..={}", MAX_DIM) });
                    }
                    n = Some(k);
                    d_eta = vec![Form::zero(k); k];
                    metric = linalg::identity(k);
                }
                "param" => {
                    let mut real = false;
                    for w in rest.split_whitespace() {
                        if w == "real" {
                            real = true;
                            continue;
                        }
                        let ok = w.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                            && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                            && w != "i"
                            && w != vars::CURVE_VAR
                            && !(w.starts_with('e') && w[1..].chars().all(|c| c.is_ascii_digit()));
                        if !ok {
                            return Err(perr(rest_col, &format!("invalid parameter name `{}`", w)));
                        }
                        let interned = if real { vars::real(w).map(|_| ()) } else { vars::param(w).map(|_| ()) };
                        interned.map_err(|e| perr(rest_col, &e.to_string()))?;
                        if real {
                            reals.push(w.to_string());
                        } else {
                            params.push(w.to_string());
                        }
                    }
                }
                "constraint" => {
                    let (l, r, rcol) = split_eq(rest, rest_col)?;
                    let lhs = scalar_in(&l, line, rest_col, scope(false))?;
                    let rhs = scalar_in(&r, line, rcol, scope(false))?;
                    constraints.push(&lhs - &rhs);
                }
                "d" => {
                    let (l, r, rcol) = split_eq(rest, rest_col)?;
                    let k = l
                        .strip_prefix('e')
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| perr(rest_col, "expected `d e<k> = ...`"))?;
                    if k == 0 || k > dim {
                        return Err(Error::DimensionMismatch { line, col: rest_col, msg: format!("generator e{} outside 1..{}", k, dim) });
                    }
                    let v = parse_value(&r, line, rcol, scope(false))?;
                    let f = match v {
                        Value::Form(f) => f,
                        Value::Scalar(s) if s.is_zero() => Form::zero(dim),
                        other => return Err(perr(rcol, &format!("expected a 2-form, found a {}", other.kind()))),
                    };
                    if f.terms().any(|(m, _)| m.degree() != 2) {
                        return Err(perr(rcol, "structure equations must be 2-forms"));
                    }
                    d_eta[k - 1] = f;
                }
                "metric" => {
                    let rest_t = rest.trim_start();
                    if let Some(vals) = rest_t.strip_prefix("diag") {
                        let items: Vec<&str> = vals.split_whitespace().collect();
                        if items.len() != dim {
                            return Err(Error::DimensionMismatch { line, col: rest_col, msg: format!("expected {} diagonal entries", dim) });
                        }
                        for (j, s) in items.iter().enumerate() {
                            metric[j][j] = scalar_in(s, line, rest_col, scope(false))?;
                        }
                    } else {
                        let (l, r, rcol) = split_eq(rest, rest_col)?;
                        let (j, k) = l
                            .strip_prefix('h')
                            .and_then(index_pair)
                            .ok_or_else(|| perr(rest_col, "expected `metric diag ...` or `metric h<j><k> = ...`"))?;
                        if j == 0 || k == 0 || j > dim || k > dim || j > k {
                            return Err(Error::DimensionMismatch { line, col: rest_col, msg: format!("entry h{}{} outside the upper triangle", j, k) });
                        }
                        let v = scalar_in(&r, line, rcol, scope(false))?;
                        metric[k - 1][j - 1] = v.conj();
                        metric[j - 1][k - 1] = v;
                    }
                }
                "phi" => {
                    let r = rest.trim_start().strip_prefix('=').ok_or_else(|| perr(rest_col, "expected `phi = ...`"))?;
                    let rcol = rest_col + (rest.len() - r.len());
                    let v = parse_value(r, line, rcol, scope(true))?;
                    phi = Some(match v {
                        Value::Vector(x) => x,
                        Value::Scalar(s) if s.is_zero() => VectorForm01::zero(dim),
                        other => return Err(perr(rcol, &format!("expected a vector form, found a {}", other.kind()))),
                    });
                }
                "family" => {
                    let (l, r, rcol) = split_eq(rest, rest_col)?;
                    let label = l.strip_suffix("(t)").ok_or_else(|| perr(rest_col, "expected `family h<j><k>(t) = ...`"))?;
                    let (kind, idx) = label.split_at(1);
                    let (j, k) = index_pair(idx).ok_or_else(|| perr(rest_col, "expected two indices"))?;
                    if j == 0 || k == 0 || j > dim || k > dim || j > k {
                        return Err(Error::DimensionMismatch { line, col: rest_col, msg: format!("entry {}{}{} outside the upper triangle", kind, j, k) });
                    }
                    let v = scalar_in(&r, line, rcol, scope(true))?;
                    let h = match kind {
                        "h" => v,
                        // α-coefficients: h_jj = α_jj, h_jk = -i α_jk for j < k
                        "a" if j == k => v,
                        "a" => &ParamExpr::constant(-GaussRat::i()) * &v,
                        _ => return Err(perr(rest_col, "family entries are h<j><k>(t) or a<j><k>(t)")),
                    };
                    family_entries.push(((j, k), h));
                }
                "assign" => {
                    let (l, r, rcol) = split_eq(rest, rest_col)?;
                    if !pset.contains(&l) && !rset.contains(&l) {
                        return Err(Error::UnknownParameter { name: l, line, col: rest_col });
                    }
                    let v = scalar_in(&r, line, rcol, Scope::Declared { params: &BTreeSet::new(), reals: &BTreeSet::new(), n: dim, allow_t: false })?;
                    let c = v.as_constant().ok_or_else(|| perr(rcol, "assigned value must be a Gaussian rational"))?;
                    if rset.contains(&l) && !c.is_real() {
                        return Err(perr(rcol, &format!("real parameter `{}` needs a real value", l)));
                    }
                    assign.insert(l, c);
                }
                other => return Err(perr(indent + 1, &format!("unknown statement `{}`", other))),
            }
        }
        let Some(n) = n else {
            return Err(Error::Parse { line: 1, col: 1, msg: "empty fixture: missing `dim <n>`".into() });
        };
        let family = (!family_entries.is_empty()).then(|| {
            let mut h = metric.clone();
            for ((j, k), v) in family_entries {
                h[k - 1][j - 1] = v.conj();
                h[j - 1][k - 1] = v;
            }
            h
        });
        Ok(Fixture { n, params, reals, constraints, d_eta, metric, phi, family, assign })
    }

    pub fn render(&self) -> String {
        let mut s = format!("dim {}\n", self.n);
        if !self.params.is_empty() || !self.reals.is_empty() {
            s.push_str("param");
            for p in &self.params {
                s.push(' ');
                s.push_str(p);
            }
            if !self.reals.is_empty() {
                s.push_str(" real");
                for p in &self.reals {
                    s.push(' ');
                    s.push_str(p);
                }
            }
            s.push('\n');
        }
        for c in &self.constraints {
            s.push_str(&format!("constraint {} = 0\n", c));
        }
        for (k, f) in self.d_eta.iter().enumerate() {
            if !f.is_zero() {
                s.push_str(&format!("d e{} = {}\n", k + 1, f));
            }
        }
        let diag: Vec<String> = (0..self.n).map(|j| paren(&self.metric[j][j])).collect();
        s.push_str(&format!("metric diag {}\n", diag.join(" ")));
        for j in 0..self.n {
            for k in j + 1..self.n {
                if !self.metric[j][k].is_zero() {
                    s.push_str(&format!("metric h{}{} = {}\n", j + 1, k + 1, self.metric[j][k]));
                }
            }
        }
        if let Some(phi) = &self.phi {
            s.push_str(&format!("phi = {}\n", phi.render()));
        }
        if let Some(h) = &self.family {
            for j in 0..self.n {
                for k in j..self.n {
                    if h[j][k] != self.metric[j][k] {
                        s.push_str(&format!("family h{}{}(t) = {}\n", j + 1, k + 1, h[j][k]));
                    }
                }
            }
        }
        for (name, v) in &self.assign {
            s.push_str(&format!("assign {} = {}\n", name, v));
        }
        s
    }

    pub fn is_numeric(&self) -> bool {
        self.params.iter().chain(&self.reals).all(|p| self.assign.contains_key(p))
    }

    /// Builds the algebra and metric, optionally substituting the fixture's
    /// assignments together with `extra` ones.
    pub fn setup(&self, substitute: bool, extra: &Assignment) -> Result<Setup> {
        let constraints = self.constraints.iter().map(|c| Constraint::new(c.numer().clone())).collect::<Result<Vec<_>>>()?;
        let alg = ComplexAlgebra::build(self.n, self.d_eta.clone(), self.params.clone(), self.reals.clone(), constraints)?;
        let mut assign = self.assign.clone();
        assign.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
        let metric = HermitianMetric::new(self.metric.clone())?;
        let phi = self.phi.clone();
        let family = self.family.clone().map(|h| MetricFamily { h });
        if !substitute || assign.is_empty() {
            if !assign.is_empty() && metric.assumed_positive() {
                let complete = metric.matrix().iter().flatten().all(|c| c.vars().iter().all(|v| assign.contains_key(&vars::name(vars::base(*v)))));
                if complete {
                    metric.check_positive(&assign)?;
                }
            }
            return Ok(Setup { alg, metric, phi, family });
        }
        let alg = alg.substitute(&assign)?;
        let metric = metric.substitute(&assign)?;
        let phi = phi.map(|p| p.subst(&assign)).transpose()?;
        let family = family.map(|f| f.subst(&assign)).transpose()?;
        Ok(Setup { alg, metric, phi, family })
    }
}

fn paren(x: &ParamExpr) -> String {
    let s = x.to_string();
    if s.contains(' ') {
        format!("({})", s)
    } else {
        s
    }
}

fn scalar_in(src: &str, line: usize, col: usize, scope: Scope) -> Result<ParamExpr> {
    match parse_value(src, line, col, scope)? {
        Value::Scalar(s) => Ok(s),
        v => Err(Error::Parse { line, col, msg: format!("expected a scalar, found a {}", v.kind()) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_syntax() {
        let x = parse_scalar("(1+i)*fx_a - ~fx_a/2").unwrap();
        let a = ParamExpr::param("fx_a").unwrap();
        let expect = &(&ParamExpr::constant(GaussRat::from_ints(1, 1)) * &a) - &a.conj().scale(&GaussRat::from_frac(1, 2));
        assert_eq!(x, expect);
        assert_eq!(parse_scalar("fx_a^2").unwrap(), a.pow(2));
        assert_eq!(parse_scalar("-fx_a^2").unwrap(), -a.pow(2));
        assert_eq!(parse_scalar("-fx_a*2").unwrap(), a.scale(&GaussRat::from(-2)));
    }

    #[test]
    fn empty_file_fails() {
        assert!(matches!(Fixture::parse(""), Err(Error::Parse { .. })));
        assert!(matches!(Fixture::parse("# nothing\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn errors_carry_locations() {
        let e = Fixture::parse("dim 2\nd e2 = zz*e1~1\n").unwrap_err();
        assert_eq!(e, Error::UnknownParameter { name: "zz".into(), line: 2, col: 8 });
        let e = Fixture::parse("dim 2\nd e2 = e3~1\n").unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { line: 2, .. }));
        let e = Fixture::parse("dim 2\nd e2 = e1~1 +\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn wedge_and_atom_forms_agree() {
        let f = Fixture::parse("dim 2\nd e2 = e1^~e1\n").unwrap();
        let g = Fixture::parse("dim 2\nd e2 = e1~1\n").unwrap();
        assert_eq!(f, g);
        let h = Fixture::parse("dim 2\nd e2 = -~e1^e1\n").unwrap();
        assert_eq!(f, h);
    }
}
