//! Lie algebras with an invariant complex structure, given by structure
//! equations on a (1,0)-coframe.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::exterior::{Form, LinearOp, Monomial};
use crate::scalars::{GaussRat, Mono, ParamExpr, Poly};

/// A polynomial relation `poly = 0`, oriented as a rewrite rule for its
/// graded-lex leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub poly: Poly,
    lead: Mono,
    lead_inv: GaussRat,
    tail: Poly,
}

impl Constraint {
    pub fn new(poly: Poly) -> Result<Self> {
        if poly.is_constant() {
            return Err(Error::NonReducibleConstraint(poly.to_string()));
        }
        let (lead, lc) = poly.leading().map(|(m, c)| (m.clone(), c.clone())).expect("nonconstant");
        let tail = poly.sub(&Poly::monomial(lead.clone(), lc.clone()));
        Ok(Constraint { lead_inv: lc.inv()?, lead, tail, poly })
    }

    /// From `lhs = rhs`; only the numerator of `lhs - rhs` matters.
    pub fn from_equation(lhs: &ParamExpr, rhs: &ParamExpr) -> Result<Self> {
        Constraint::new((lhs - rhs).numer().clone())
    }

    pub fn leading(&self) -> &Mono {
        &self.lead
    }

    /// One pass: rewrites every term divisible by the leading monomial.
    fn rewrite(&self, p: &Poly) -> Option<Poly> {
        let mut hit = false;
        let mut out = Poly::zero();
        let minus_tail = self.tail.scale(&-&self.lead_inv);
        for (m, c) in p.terms() {
            match m.div(&self.lead) {
                Some(q) => {
                    hit = true;
                    out = out.add(&minus_tail.mul_term(&q, c));
                }
                None => out = out.add(&Poly::monomial(m.clone(), c.clone())),
            }
        }
        hit.then_some(out)
    }
}

/// Normal form of a polynomial modulo a constraint list (substitution to a
/// fixpoint).
pub fn reduce_poly(p: &Poly, constraints: &[Constraint]) -> Poly {
    let mut cur = p.clone();
    loop {
        let mut changed = false;
        for c in constraints {
            while let Some(next) = c.rewrite(&cur) {
                cur = next;
                changed = true;
            }
        }
        if !changed {
            return cur;
        }
    }
}

pub fn reduce_expr(x: &ParamExpr, constraints: &[Constraint]) -> Result<ParamExpr> {
    if constraints.is_empty() || x.is_constant() {
        return Ok(x.clone());
    }
    let num = reduce_poly(x.numer(), constraints);
    if num.is_zero() {
        return Ok(ParamExpr::zero());
    }
    let den = reduce_poly(x.denom(), constraints);
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    ParamExpr::from_parts(num, den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    D,
    Del,
    Delbar,
    DelDelbar,
}

#[derive(Debug)]
pub struct ComplexAlgebra {
    n: usize,
    d_eta: Vec<Form>,
    d_eta_bar: Vec<Form>,
    params: Vec<String>,
    reals: Vec<String>,
    constraints: Vec<Constraint>,
    mono_cache: RwLock<HashMap<Monomial, Form>>,
    op_cache: RwLock<HashMap<(OpKind, usize, usize), Arc<LinearOp>>>,
}

impl Clone for ComplexAlgebra {
    fn clone(&self) -> Self {
        ComplexAlgebra::unchecked(self.n, self.d_eta.clone(), self.params.clone(), self.reals.clone(), self.constraints.clone())
    }
}

impl ComplexAlgebra {
    fn unchecked(n: usize, d_eta: Vec<Form>, params: Vec<String>, reals: Vec<String>, constraints: Vec<Constraint>) -> Self {
        let d_eta_bar = d_eta.iter().map(Form::conj).collect();
        ComplexAlgebra {
            n,
            d_eta,
            d_eta_bar,
            params,
            reals,
            constraints,
            mono_cache: RwLock::new(HashMap::new()),
            op_cache: RwLock::new(HashMap::new()),
        }
    }

    /// Validates integrability and the Jacobi identity (both modulo the
    /// constraints).
    pub fn build(
        n: usize,
        d_eta: Vec<Form>,
        params: Vec<String>,
        reals: Vec<String>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        assert_eq!(d_eta.len(), n, "one structure equation per generator");
        for (k, f) in d_eta.iter().enumerate() {
            if f.n() != n || f.terms().any(|(m, _)| m.degree() != 2) {
                return Err(Error::BidegreeMismatch { expected: "2-form".into(), found: format!("d e{} = {}", k + 1, f) });
            }
        }
        let mut constraints = constraints;
        let conjugates: Vec<Constraint> = constraints
            .iter()
            .filter(|c| c.poly.conj().monic() != c.poly.monic())
            .map(|c| Constraint::new(c.poly.conj()))
            .collect::<Result<_>>()?;
        constraints.extend(conjugates);
        let a = ComplexAlgebra::unchecked(n, d_eta, params, reals, constraints);
        for k in 1..=n {
            let bad = a.reduce_form(&a.d_eta[k - 1].part(0, 2))?;
            if !bad.is_zero() {
                return Err(Error::IntegrabilityFailure { generator: k, residue: bad.render() });
            }
        }
        for k in 1..=n {
            let dd = a.reduce_form(&a.d(&a.d_eta[k - 1]))?;
            if !dd.is_zero() {
                return Err(Error::JacobiFailure { generator: k, residue: dd.render() });
            }
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_eta(&self) -> &[Form] {
        &self.d_eta
    }

    pub fn d_eta_bar(&self) -> &[Form] {
        &self.d_eta_bar
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn reals(&self) -> &[String] {
        &self.reals
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn reduce(&self, x: &ParamExpr) -> Result<ParamExpr> {
        reduce_expr(x, &self.constraints)
    }

    pub fn reduce_form(&self, f: &Form) -> Result<Form> {
        if self.constraints.is_empty() {
            return Ok(f.clone());
        }
        f.try_map_coeffs(|c| self.reduce(c))
    }

    pub fn is_zero_mod(&self, f: &Form) -> Result<bool> {
        Ok(self.reduce_form(f)?.is_zero())
    }

    /// Copy of the algebra with every assigned parameter replaced by its value.
    pub fn substitute(&self, assign: &crate::scalars::Assignment) -> Result<ComplexAlgebra> {
        let d_eta = self.d_eta.iter().map(|f| f.try_map_coeffs(|c| c.subst(assign))).collect::<Result<Vec<_>>>()?;
        let mut constraints = Vec::new();
        for c in &self.constraints {
            let p = ParamExpr::from_poly(c.poly.clone()).subst(assign)?;
            if p.is_zero() {
                continue;
            }
            if p.is_constant() {
                return Err(Error::PreconditionFailure(format!("assignment violates constraint {} = 0", c.poly)));
            }
            constraints.push(Constraint::new(p.numer().clone())?);
        }
        let params = self.params.iter().filter(|p| !assign.contains_key(*p)).cloned().collect();
        let reals = self.reals.iter().filter(|p| !assign.contains_key(*p)).cloned().collect();
        ComplexAlgebra::build(self.n, d_eta, params, reals, constraints)
    }

    /// `d` of a single monomial, memoized.
    pub fn d_monomial(&self, m: &Monomial) -> Form {
        if let Some(f) = self.mono_cache.read().unwrap().get(m) {
            return f.clone();
        }
        let legs = m.legs();
        let mut out = Form::zero(self.n);
        for (pos, &(anti, i)) in legs.iter().enumerate() {
            let dl = if anti { &self.d_eta_bar[i - 1] } else { &self.d_eta[i - 1] };
            if dl.is_zero() {
                continue;
            }
            let (h1, a1): (Vec<usize>, Vec<usize>) = split(&legs[..pos]);
            let (h2, a2): (Vec<usize>, Vec<usize>) = split(&legs[pos + 1..]);
            let before = Form::from_legs(self.n, &h1, &a1);
            let after = Form::from_legs(self.n, &h2, &a2);
            let term = before.wedge_unchecked(dl).wedge_unchecked(&after);
            out = if pos % 2 == 0 { out.add(&term) } else { out.sub(&term) };
        }
        self.mono_cache.write().unwrap().entry(*m).or_insert(out).clone()
    }

    pub fn d(&self, a: &Form) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            for (mm, cc) in self.d_monomial(m).terms() {
                r.add_term(*mm, cc * c);
            }
        }
        r
    }

    pub fn del(&self, a: &Form) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            for (mm, cc) in self.d_monomial(m).terms() {
                if mm.p() == m.p() + 1 {
                    r.add_term(*mm, cc * c);
                }
            }
        }
        r
    }

    pub fn delbar(&self, a: &Form) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            for (mm, cc) in self.d_monomial(m).terms() {
                if mm.q() == m.q() + 1 {
                    r.add_term(*mm, cc * c);
                }
            }
        }
        r
    }

    pub fn del_delbar(&self, a: &Form) -> Form {
        self.del(&self.delbar(a))
    }

    /// Matrix of an operator on bidegree `(p,q)`, memoized.
    pub fn op(&self, kind: OpKind, p: usize, q: usize) -> Arc<LinearOp> {
        if let Some(op) = self.op_cache.read().unwrap().get(&(kind, p, q)) {
            return op.clone();
        }
        let n = self.n;
        let target = match kind {
            OpKind::D => None,
            OpKind::Del => Some((p + 1, q)),
            OpKind::Delbar => Some((p, q + 1)),
            OpKind::DelDelbar => Some((p + 1, q + 1)),
        };
        let build = |codomain: (usize, usize), f: &dyn Fn(&Form) -> Form| -> LinearOp {
            if codomain.0 > n || codomain.1 > n {
                return LinearOp::zero(n, (p, q), (codomain.0.min(n), codomain.1.min(n)));
            }
            LinearOp::from_action(n, (p, q), codomain, |m| Ok(f(&Form::basis_elem(n, *m)).part(codomain.0, codomain.1)))
                .expect("codomain matches")
        };
        let op = match (kind, target) {
            (OpKind::Del, Some(t)) => build(t, &|f| self.del(f)),
            (OpKind::Delbar, Some(t)) => build(t, &|f| self.delbar(f)),
            (OpKind::DelDelbar, Some(t)) => build(t, &|f| self.del_delbar(f)),
            _ => unreachable!("d is not homogeneous; use d_op"),
        };
        let op = Arc::new(op);
        self.op_cache.write().unwrap().entry((kind, p, q)).or_insert(op).clone()
    }

    pub fn del_op(&self, p: usize, q: usize) -> Arc<LinearOp> {
        self.op(OpKind::Del, p, q)
    }

    pub fn delbar_op(&self, p: usize, q: usize) -> Arc<LinearOp> {
        self.op(OpKind::Delbar, p, q)
    }

    pub fn ddbar_op(&self, p: usize, q: usize) -> Arc<LinearOp> {
        self.op(OpKind::DelDelbar, p, q)
    }

    /// `d` on `(p,q)` split by target bidegree: `(p+1,q)`, `(p,q+1)` and the
    /// two parts that vanish for integrable structures.
    pub fn d_op(&self, p: usize, q: usize) -> Vec<LinearOp> {
        let n = self.n;
        let targets = [(p + 1, q), (p, q + 1), (p + 2, q.wrapping_sub(1)), (p.wrapping_sub(1), q + 2)];
        targets
            .iter()
            .filter(|t| t.0 <= n && t.1 <= n)
            .map(|&t| {
                LinearOp::from_action(n, (p, q), t, |m| Ok(self.d_monomial(m).part(t.0, t.1))).expect("codomain matches")
            })
            .collect()
    }
}

fn split(legs: &[(bool, usize)]) -> (Vec<usize>, Vec<usize>) {
    let h = legs.iter().filter(|l| !l.0).map(|l| l.1).collect();
    let a = legs.iter().filter(|l| l.0).map(|l| l.1).collect();
    (h, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_02_part_is_rejected() {
        let n = 2;
        let bad = Form::from_legs(n, &[], &[1, 2]);
        let r = ComplexAlgebra::build(n, vec![Form::zero(n), bad], vec![], vec![], vec![]);
        assert!(matches!(r, Err(Error::IntegrabilityFailure { generator: 2, .. })));
    }

    #[test]
    fn heisenberg_differentials() {
        let n = 2;
        let d2 = Form::from_legs(n, &[1], &[1]);
        let a = ComplexAlgebra::build(n, vec![Form::zero(n), d2.clone()], vec![], vec![], vec![]).unwrap();
        assert_eq!(a.delbar(&Form::eta(n, 2)), d2);
        assert!(a.del(&Form::eta(n, 2)).is_zero());
        // d(~e2) = conj(e1~1) = -e1~1
        assert_eq!(a.d(&Form::eta_bar(n, 2)), d2.neg());
    }
}
