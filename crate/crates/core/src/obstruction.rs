//! First-order obstruction to curves of SKT metrics along a deformation.

use num_rational::BigRational;
use num_traits::Zero;

use crate::deformation::{self, contract, contract_bar, VectorForm01};
use crate::error::{Error, Result};
use crate::exterior::{Form, Monomial};
use crate::hermitian::{self, HermitianMetric};
use crate::linalg::{self, Matrix};
use crate::nilcomplex::ComplexAlgebra;
use crate::scalars::{vars, GaussRat, ParamExpr};

/// A metric depending polynomially on `t`, given by its matrix `h(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricFamily {
    pub h: Matrix,
}

impl MetricFamily {
    pub fn constant(h: &HermitianMetric) -> Self {
        MetricFamily { h: h.matrix().clone() }
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    fn form_of(h: &Matrix) -> Form {
        let n = h.len();
        let half_i = ParamExpr::constant(GaussRat::from_frac(1, 2) * GaussRat::i());
        let mut w = Form::zero(n);
        for (j, row) in h.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    let (_, m) = Monomial::from_indices(&[j + 1], &[k + 1]).unwrap();
                    w.add_term(m, &half_i * c);
                }
            }
        }
        w
    }

    pub fn omega(&self) -> Form {
        MetricFamily::form_of(&self.h)
    }

    pub fn omega_at_zero(&self) -> Result<Form> {
        let t = vars::curve_var();
        self.omega().try_map_coeffs(|c| c.at_zero(t))
    }

    pub fn omega_prime(&self) -> Result<Form> {
        let t = vars::curve_var();
        self.omega().try_map_coeffs(|c| c.taylor_coeff(t, 1))
    }

    pub fn metric_at_zero(&self) -> Result<HermitianMetric> {
        let t = vars::curve_var();
        let h = self.h.iter().map(|r| r.iter().map(|c| c.at_zero(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        HermitianMetric::new(h)
    }

    pub fn jet1(&self) -> Result<Self> {
        let t = vars::curve_var();
        let h = self.h.iter().map(|r| r.iter().map(|c| c.jet1(t)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(MetricFamily { h })
    }

    pub fn subst(&self, assign: &crate::scalars::Assignment) -> Result<Self> {
        let h = self.h.iter().map(|r| r.iter().map(|c| c.subst(assign)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(MetricFamily { h })
    }
}

#[derive(Clone, Debug)]
pub struct Obstruction {
    /// `X = ∂(i_{φ1} ∂ω)`.
    pub x: Form,
    /// `X - conj(X)`, i.e. `2i Im(X)`.
    pub form: Form,
    /// First-order Maurer-Cartan defect of `φ1` (should vanish).
    pub mc_warning: Option<String>,
}

pub fn first_order_obstruction(alg: &ComplexAlgebra, omega: &Form, phi1: &VectorForm01) -> Result<Obstruction> {
    let x = alg.reduce_form(&alg.del(&contract(phi1, &alg.del(omega))))?;
    let form = alg.reduce_form(&x.sub(&x.conj()))?;
    let lin = deformation::delbar_vector(alg, phi1);
    let mut warn = Vec::new();
    for (k, f) in lin.iter().enumerate() {
        let f = alg.reduce_form(f)?;
        if !f.is_zero() {
            warn.push(format!("component {}: {}", k + 1, f));
        }
    }
    let mc_warning = (!warn.is_empty()).then(|| format!("linearized Maurer-Cartan defect is nonzero ({})", warn.join("; ")));
    Ok(Obstruction { x, form, mc_warning })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    NoObstruction,
    Obstructed,
    NotClosed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::NoObstruction => "NO_OBSTRUCTION",
            Verdict::Obstructed => "OBSTRUCTED",
            Verdict::NotClosed => "NOT_CLOSED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub obstruction: Form,
    pub del_residue: Form,
    pub delbar_residue: Form,
    pub exact: Option<bool>,
    pub witness: Option<Form>,
    /// Harmonic projection coefficients (numeric mode only).
    pub harmonic_projection: Option<Form>,
    /// Nonzero coefficients that must all vanish for the obstruction to
    /// disappear (parametric mode).
    pub condition: Vec<ParamExpr>,
    pub verdict: Verdict,
}

/// Bott-Chern class test for an obstruction form.
pub fn class_test(alg: &ComplexAlgebra, h: Option<&HermitianMetric>, obstruction: &Form) -> Result<ObstructionReport> {
    let obstruction = alg.reduce_form(obstruction)?;
    let del_residue = alg.reduce_form(&alg.del(&obstruction))?;
    let delbar_residue = alg.reduce_form(&alg.delbar(&obstruction))?;
    let mut rep = ObstructionReport {
        obstruction: obstruction.clone(),
        del_residue: del_residue.clone(),
        delbar_residue: delbar_residue.clone(),
        exact: None,
        witness: None,
        harmonic_projection: None,
        condition: Vec::new(),
        verdict: Verdict::NotClosed,
    };
    if !del_residue.is_zero() || !delbar_residue.is_zero() {
        return Ok(rep);
    }
    let ex = hermitian::is_ddbar_exact(&obstruction, alg)?;
    rep.exact = Some(ex.exact);
    rep.witness = ex.witness;
    if ex.exact {
        rep.verdict = Verdict::NoObstruction;
        return Ok(rep);
    }
    rep.verdict = Verdict::Obstructed;
    let numeric = obstruction.terms().all(|(_, c)| c.is_constant());
    if !numeric {
        rep.condition = obstruction.terms().map(|(_, c)| c.clone()).collect();
    } else if let (Some(h), Some((p, q))) = (h, obstruction.bidegree()) {
        if h.matrix().iter().all(|r| r.iter().all(ParamExpr::is_constant)) && alg.constraints().is_empty() {
            rep.harmonic_projection = Some(harmonic_projection(alg, h, &obstruction, p, q)?);
        }
    }
    Ok(rep)
}

/// Orthogonal projection onto the Bott-Chern harmonic space.
fn harmonic_projection(alg: &ComplexAlgebra, h: &HermitianMetric, a: &Form, p: usize, q: usize) -> Result<Form> {
    let coh = hermitian::bc_cohomology(alg, h, p, q)?;
    let basis = &coh.harmonic_basis;
    let k = basis.len();
    let gram: Matrix = (0..k).map(|i| (0..k).map(|j| h.inner(&basis[j], &basis[i])).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    let rhs: Vec<ParamExpr> = basis.iter().map(|b| h.inner(a, b)).collect::<Result<_>>()?;
    let x = linalg::solve(&gram, k, &rhs, &linalg::no_reduce)?.ok_or(Error::SingularMetric)?;
    let mut out = Form::zero(alg.n());
    for (b, c) in basis.iter().zip(x) {
        out = out.add(&b.scale(&c));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FamilyCondition {
    pub obstruction: Form,
    pub ddbar_omega_prime: Form,
    /// `2i Im(∂ i_{φ'(0)} ∂ ω) - ∂∂̄ω'(0)`.
    pub residual: Form,
}

pub fn family_condition(alg: &ComplexAlgebra, curve: &VectorForm01, fam: &MetricFamily) -> Result<FamilyCondition> {
    let phi1 = curve.derivative_at_zero()?;
    let omega0 = fam.omega_at_zero()?;
    let obs = first_order_obstruction(alg, &omega0, &phi1)?;
    let ddbar = alg.reduce_form(&alg.del_delbar(&fam.omega_prime()?))?;
    let residual = alg.reduce_form(&obs.form.sub(&ddbar))?;
    Ok(FamilyCondition { obstruction: obs.form, ddbar_omega_prime: ddbar, residual })
}

/// `∂_t ∂̄_t ω_t` in deformed monomials, as exact functions of `t`.
pub fn deformed_skt_defect(alg: &ComplexAlgebra, curve: &VectorForm01, fam: &MetricFamily) -> Result<Form> {
    let ops = deformation::DeformedOps::new(curve, deformation::Reading::default())?;
    Ok(ops.del(alg, &ops.delbar(alg, &fam.omega())))
}

/// The defect at a fixed value of `t`.
pub fn deformed_skt_defect_at(alg: &ComplexAlgebra, curve: &VectorForm01, fam: &MetricFamily, t0: &GaussRat) -> Result<Form> {
    let assign = [(vars::CURVE_VAR.to_string(), t0.clone())].into_iter().collect();
    let phi = curve.subst(&assign)?;
    deformed_skt_defect(alg, &phi, &fam.subst(&assign)?)
}

#[derive(Clone, Debug)]
pub struct TaylorCheck {
    /// Defect computed with first-order truncations throughout; it agrees
    /// with the true defect up to `O(t^2)`.
    pub jet_defect: Form,
    pub first_order: Form,
    pub predicted: Form,
    pub residual: Form,
}

pub fn taylor_identity_check(alg: &ComplexAlgebra, curve: &VectorForm01, fam: &MetricFamily) -> Result<TaylorCheck> {
    let t = vars::curve_var();
    let ops = deformation::DeformedOps::first_order(curve, deformation::Reading::default())?;
    let jet_defect = ops.del(alg, &ops.delbar(alg, &fam.jet1()?.omega()));
    let first_order = jet_defect.try_map_coeffs(|c| c.taylor_coeff(t, 1))?;
    let phi1 = curve.derivative_at_zero()?;
    let omega0 = fam.omega_at_zero()?;
    let x = alg.del(&contract(&phi1, &alg.del(&omega0)));
    let y = alg.delbar(&contract_bar(&phi1, &alg.delbar(&omega0)));
    let predicted = y.sub(&x).add(&alg.del_delbar(&fam.omega_prime()?));
    let residual = alg.reduce_form(&first_order.sub(&predicted))?;
    Ok(TaylorCheck { jet_defect, first_order, predicted, residual })
}

fn norm_sqr(f: &Form) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for (_, c) in f.terms() {
        let v = c.as_constant().ok_or_else(|| Error::UnassignedVariable(c.to_string()))?;
        acc += v.norm_sqr();
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct FiniteDifference {
    pub h1: BigRational,
    pub h2: BigRational,
    /// Squared coefficient norms of the central-difference errors.
    pub err1: BigRational,
    pub err2: BigRational,
    /// `|E1 - 4 E2|^2`, the part not explained by an `h^2` error term.
    pub excess: BigRational,
    pub converges: bool,
}

/// Compares central difference quotients of the defect at `h1` and `h1/2`
/// with `exact`, the derivative at 0. Curve and family must be numeric apart from `t`.
pub fn finite_difference_check(
    alg: &ComplexAlgebra,
    curve: &VectorForm01,
    fam: &MetricFamily,
    exact: &Form,
    h1: &BigRational,
) -> Result<FiniteDifference> {
    let h2 = h1 / BigRational::from_integer(2.into());
    let quotient = |h: &BigRational| -> Result<Form> {
        let hp = GaussRat::real(h.clone());
        let up = deformed_skt_defect_at(alg, curve, fam, &hp)?;
        let down = deformed_skt_defect_at(alg, curve, fam, &-&hp)?;
        let s = GaussRat::real(BigRational::from_integer(1.into()) / (h * BigRational::from_integer(2.into())));
        Ok(alg.reduce_form(&up.sub(&down).scale_const(&s))?)
    };
    let e1 = quotient(h1)?.sub(&exact);
    let e2 = quotient(&h2)?.sub(&exact);
    let err1 = norm_sqr(&e1)?;
    let err2 = norm_sqr(&e2)?;
    let excess = norm_sqr(&e1.sub(&e2.scale_const(&GaussRat::from(4))))?;
    // second order: E1 ≈ 4 E2 up to O(h^4); allow 1/16 of |E1|
    let converges = (err1.is_zero() && err2.is_zero()) || excess.clone() * BigRational::from_integer(256.into()) <= err1;
    Ok(FiniteDifference { h1: h1.clone(), h2, err1, err2, excess, converges })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub t: BigRational,
    pub norm_sqr: BigRational,
}

/// Squared norm of `∂_t∂̄_tω_t` at each grid point, measured with the `t = 0`
/// metric on deformed monomials.
pub fn sweep(
    alg: &ComplexAlgebra,
    curve: &VectorForm01,
    fam: &MetricFamily,
    grid: &[BigRational],
) -> Result<Vec<SweepRow>> {
    let h0 = fam.metric_at_zero()?;
    let mut rows = Vec::with_capacity(grid.len());
    for t0 in grid {
        let at = GaussRat::real(t0.clone());
        let g = deformed_skt_defect_at(alg, curve, fam, &at).map_err(|err| match err {
            Error::SingularEndomorphism(d) => Error::SingularEndomorphism(format!("{} at t = {}", d, t0)),
            Error::DivisionByZero => Error::SingularEndomorphism(format!("pole at t = {}", t0)),
            other => other,
        })?;
        let v = h0.inner(&g, &g)?;
        let v = v.as_constant().ok_or_else(|| Error::UnassignedVariable(format!("{}", v)))?;
        rows.push(SweepRow { t: t0.clone(), norm_sqr: v.re });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("t,defect_norm_num,defect_norm_den\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.t, r.norm_sqr.numer(), r.norm_sqr.denom()));
    }
    s
}
