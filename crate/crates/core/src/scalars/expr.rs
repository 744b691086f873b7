use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use super::gauss::GaussRat;
use super::poly::{Mono, Poly};
use super::vars::{self, VarId, VarKind};
use crate::error::{Error, Result};

/// A rational function over `Q(i)` in conjugate-paired parameters.
///
/// Canonical form: numerator and denominator are coprime and the denominator
/// is monic under graded-lex order, so structural equality is mathematical
/// equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamExpr {
    num: Poly,
    den: Poly,
}

/// Values for base parameters and real variables, keyed by name.
pub type Assignment = BTreeMap<String, GaussRat>;

impl Default for ParamExpr {
    fn default() -> Self {
        ParamExpr::zero()
    }
}

impl ParamExpr {
    pub fn zero() -> Self {
        ParamExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        ParamExpr::constant(GaussRat::one())
    }

    pub fn i() -> Self {
        ParamExpr::constant(GaussRat::i())
    }

    pub fn constant(c: GaussRat) -> Self {
        ParamExpr { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        ParamExpr::constant(GaussRat::from(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        ParamExpr::constant(GaussRat::from_frac(n, d))
    }

    pub fn var(v: VarId) -> Self {
        ParamExpr { num: Poly::var(v), den: Poly::one() }
    }

    /// The base variable of a complex parameter, interning it if needed.
    pub fn param(name: &str) -> Result<Self> {
        Ok(ParamExpr::var(vars::param(name)?))
    }

    pub fn real_var(name: &str) -> Result<Self> {
        Ok(ParamExpr::var(vars::real(name)?))
    }

    pub fn from_poly(p: Poly) -> Self {
        ParamExpr { num: p, den: Poly::one() }
    }

    /// Builds `num/den` and brings it to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ParamExpr::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return ParamExpr::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = Poly::gcd(&num, &den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        };
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if lc.is_one() {
            ParamExpr { num, den }
        } else {
            let inv = lc.inv().expect("nonzero");
            ParamExpr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The value of an expression with empty variable support.
    pub fn as_constant(&self) -> Option<GaussRat> {
        if !self.is_constant() {
            return None;
        }
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(&n / &d)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn vars(&self) -> std::collections::BTreeSet<VarId> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    pub fn checked_div(&self, o: &ParamExpr) -> Result<ParamExpr> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self * &o.inv()?)
    }

    pub fn inv(&self) -> Result<ParamExpr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ParamExpr::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, e: u32) -> ParamExpr {
        ParamExpr { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn conj(&self) -> ParamExpr {
        // conjugation preserves coprimality, only the leading coefficient needs fixing
        let (num, den) = (self.num.conj(), self.den.conj());
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if lc.is_one() {
            ParamExpr { num, den }
        } else {
            let inv = lc.inv().expect("nonzero");
            ParamExpr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    /// `x - conj(x)`, i.e. `2i Im(x)`.
    pub fn two_i_im(&self) -> ParamExpr {
        self - &self.conj()
    }

    /// `x + conj(x)`, i.e. `2 Re(x)`.
    pub fn two_re(&self) -> ParamExpr {
        self + &self.conj()
    }

    pub fn is_real(&self) -> bool {
        self.conj() == *self
    }

    pub fn scale(&self, c: &GaussRat) -> ParamExpr {
        if c.is_zero() {
            return ParamExpr::zero();
        }
        ParamExpr { num: self.num.scale(c), den: self.den.clone() }
    }

    fn value_of(assign: &Assignment, v: VarId) -> Result<GaussRat> {
        let base = vars::base(v);
        let name = vars::name(base);
        let val = assign.get(&name).ok_or_else(|| Error::UnassignedVariable(name.clone()))?;
        match vars::kind(v) {
            VarKind::Base => Ok(val.clone()),
            VarKind::Conj => Ok(val.conj()),
            VarKind::Real => {
                if val.is_real() {
                    Ok(val.clone())
                } else {
                    Err(Error::NonRealAssignment(name))
                }
            }
        }
    }

    /// Exact evaluation; conjugate slots receive the conjugate of the base value.
    pub fn eval(&self, assign: &Assignment) -> Result<GaussRat> {
        let f = |v: VarId| ParamExpr::value_of(assign, v);
        let n = self.num.eval_with(&f)?;
        let d = self.den.eval_with(&f)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(&n / &d)
    }

    /// Substitutes the assigned variables and keeps the rest symbolic.
    pub fn subst(&self, assign: &Assignment) -> Result<ParamExpr> {
        for v in self.vars() {
            if vars::kind(v) == VarKind::Real {
                let name = vars::name(v);
                if let Some(x) = assign.get(&name) {
                    if !x.is_real() {
                        return Err(Error::NonRealAssignment(name));
                    }
                }
            }
        }
        let f = |v: VarId| ParamExpr::value_of(assign, v).ok();
        ParamExpr::from_parts(self.num.subst_values(&f), self.den.subst_values(&f))
    }

    /// Replaces variables by expressions.
    pub fn subst_exprs(&self, map: &BTreeMap<VarId, ParamExpr>) -> Result<ParamExpr> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let eval_poly = |p: &Poly| -> Result<ParamExpr> {
            let mut acc = ParamExpr::zero();
            for (m, c) in p.terms() {
                let mut t = ParamExpr::constant(c.clone());
                for &(v, e) in m.pairs() {
                    let x = match map.get(&v) {
                        Some(x) => x.clone(),
                        None => ParamExpr::var(v),
                    };
                    t = &t * &x.pow(e);
                }
                acc = &acc + &t;
            }
            Ok(acc)
        };
        let n = eval_poly(&self.num)?;
        let d = eval_poly(&self.den)?;
        n.checked_div(&d)
    }

    pub fn diff(&self, v: VarId) -> ParamExpr {
        let n = self.num.diff(v).mul(&self.den).sub(&self.num.mul(&self.den.diff(v)));
        ParamExpr::normalized(n, self.den.mul(&self.den))
    }

    /// Value at `v = 0`.
    pub fn at_zero(&self, v: VarId) -> Result<ParamExpr> {
        let f = |w: VarId| if w == v { Some(GaussRat::zero()) } else { None };
        ParamExpr::from_parts(self.num.subst_values(&f), self.den.subst_values(&f))
    }

    /// Taylor coefficient of `v^k` at `v = 0`, by power-series division of
    /// the numerator by the denominator.
    /// Truncation `c_0 + c_1 v` of the expansion at `v = 0`.
    pub fn jet1(&self, v: VarId) -> Result<ParamExpr> {
        let c1 = self.taylor_coeff(v, 1)?;
        Ok(&self.taylor_coeff(v, 0)? + &(&c1 * &ParamExpr::var(v)))
    }

    pub fn taylor_coeff(&self, v: VarId, k: u32) -> Result<ParamExpr> {
        let k = k as usize;
        let series = |p: &Poly| -> Vec<ParamExpr> {
            let mut c: Vec<ParamExpr> = p.coeffs_in(v).into_iter().map(ParamExpr::from_poly).collect();
            c.resize(k + 1, ParamExpr::zero());
            c
        };
        let (n, d) = (series(&self.num), series(&self.den));
        let d0_inv = d[0].inv()?;
        let mut out: Vec<ParamExpr> = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc = n[j].clone();
            for i in 1..=j {
                acc = &acc - &(&d[i] * &out[j - i]);
            }
            out.push(&acc * &d0_inv);
        }
        Ok(out.pop().unwrap())
    }

    /// Real and imaginary rational parts of a constant.
    pub fn constant_parts(&self) -> Option<(BigRational, BigRational)> {
        self.as_constant().map(|c| (c.re, c.im))
    }

    pub(crate) fn needs_parens_as_factor(&self) -> bool {
        if !self.den.is_constant() {
            return true;
        }
        if self.num.is_single_term() {
            let (_, c) = self.num.leading().unwrap();
            return !c.is_atomic();
        }
        true
    }

    /// Parses a scalar expression in fixture syntax (`2`, `1/3`, `i`, `a5`,
    /// `~a5`, `+ - * / ^ ( )`). Unknown names are interned as complex parameters.
    pub fn parse(text: &str) -> Result<ParamExpr> {
        crate::fixture::parse_scalar(text)
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            return write!(f, "{}", self.num);
        }
        if self.den.is_constant() {
            // constant monic denominator is exactly 1
            return write!(f, "{}", self.num);
        }
        let wrap_num = !(self.num.is_single_term() && self.num.leading().unwrap().1.is_atomic());
        if wrap_num {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        let den = self.den.to_string();
        if den.contains(['*', '^', ' ']) {
            write!(f, "/({})", den)
        } else {
            write!(f, "/{}", den)
        }
    }
}

impl fmt::Debug for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Poly {
    fn is_one_poly(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }
}

impl<'a> Add<&'a ParamExpr> for &'a ParamExpr {
    type Output = ParamExpr;
    fn add(self, o: &ParamExpr) -> ParamExpr {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return ParamExpr::normalized(self.num.add(&o.num), self.den.clone());
        }
        let g = Poly::gcd(&self.den, &o.den);
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = o.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&d2).add(&o.num.mul(&d1));
        ParamExpr::normalized(num, self.den.mul(&d2))
    }
}

impl<'a> Sub<&'a ParamExpr> for &'a ParamExpr {
    type Output = ParamExpr;
    fn sub(self, o: &ParamExpr) -> ParamExpr {
        self + &(-o)
    }
}

impl<'a> Mul<&'a ParamExpr> for &'a ParamExpr {
    type Output = ParamExpr;
    fn mul(self, o: &ParamExpr) -> ParamExpr {
        if self.is_zero() || o.is_zero() {
            return ParamExpr::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return ParamExpr { num: self.num.mul(&o.num), den: Poly::one() };
        }
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = o.den.div_exact(&g1).expect("gcd divides");
        let n2 = o.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.leading().unwrap().1.clone();
        let inv = lc.inv().expect("nonzero");
        ParamExpr { num: num.scale(&inv), den: den.scale(&inv) }
    }
}

impl Neg for &ParamExpr {
    type Output = ParamExpr;
    fn neg(self) -> ParamExpr {
        ParamExpr { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for ParamExpr {
    type Output = ParamExpr;
    fn neg(self) -> ParamExpr {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ParamExpr> for ParamExpr {
            type Output = ParamExpr;
            fn $m(self, o: ParamExpr) -> ParamExpr {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<GaussRat> for ParamExpr {
    fn from(c: GaussRat) -> Self {
        ParamExpr::constant(c)
    }
}

impl From<i64> for ParamExpr {
    fn from(n: i64) -> Self {
        ParamExpr::int(n)
    }
}

impl ParamExpr {
    /// Leading power product of the numerator (used by constraint handling).
    pub fn leading_mono(&self) -> Option<Mono> {
        self.num.leading().map(|(m, _)| m.clone())
    }
}
