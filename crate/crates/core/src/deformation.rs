//! (0,1)-vector forms, the extension map and deformed differentials.

use crate::error::{Error, Result};
use crate::exterior::{Form, LegMap, Monomial};
use crate::linalg::{self, Matrix};
use crate::nilcomplex::ComplexAlgebra;
use crate::scalars::{vars, Assignment, ParamExpr};

/// `φ = Σ_λ φ^λ ⊗ Z_λ` with each `φ^λ` a (0,1)-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorForm01 {
    n: usize,
    comps: Vec<Form>,
}

impl VectorForm01 {
    pub fn zero(n: usize) -> Self {
        VectorForm01 { n, comps: vec![Form::zero(n); n] }
    }

    pub fn new(comps: Vec<Form>) -> Result<Self> {
        let n = comps.len();
        for f in &comps {
            if f.n() != n || !f.is_homogeneous(0, 1) {
                return Err(Error::BidegreeMismatch { expected: "(0,1)".into(), found: format!("{:?}", f.bidegrees()) });
            }
        }
        Ok(VectorForm01 { n, comps })
    }

    /// From the matrix `Φ[λ][j]` = coefficient of `~e^j` in `φ^λ` (0-based).
    pub fn from_matrix(phi: &Matrix) -> Self {
        let n = phi.len();
        let comps = phi
            .iter()
            .map(|row| {
                let mut f = Form::zero(n);
                for (j, c) in row.iter().enumerate() {
                    f.add_term(Monomial::anti_leg(j + 1), c.clone());
                }
                f
            })
            .collect();
        VectorForm01 { n, comps }
    }

    /// Adds `c · ~e^j ⊗ Z_λ` (1-based indices).
    pub fn add_term(&mut self, j: usize, lambda: usize, c: ParamExpr) {
        self.comps[lambda - 1].add_term(Monomial::anti_leg(j), c);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component(&self, lambda: usize) -> &Form {
        &self.comps[lambda - 1]
    }

    pub fn components(&self) -> &[Form] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Form::is_zero)
    }

    pub fn matrix(&self) -> Matrix {
        self.comps.iter().map(|f| (1..=self.n).map(|j| f.coeff(&Monomial::anti_leg(j))).collect()).collect()
    }

    pub fn map_coeffs(&self, f: impl Fn(&ParamExpr) -> Result<ParamExpr>) -> Result<Self> {
        Ok(VectorForm01 { n: self.n, comps: self.comps.iter().map(|c| c.try_map_coeffs(&f)).collect::<Result<_>>()? })
    }

    pub fn subst(&self, assign: &Assignment) -> Result<Self> {
        self.map_coeffs(|c| c.subst(assign))
    }

    /// Coefficientwise derivative in the curve parameter at `t = 0`.
    pub fn derivative_at_zero(&self) -> Result<Self> {
        let t = vars::curve_var();
        self.map_coeffs(|c| c.taylor_coeff(t, 1))
    }

    /// First-order truncation in the curve parameter.
    pub fn jet1(&self) -> Result<Self> {
        self.map_coeffs(|c| c.jet1(vars::curve_var()))
    }

    pub fn at_zero(&self) -> Result<Self> {
        self.map_coeffs(|c| c.at_zero(vars::curve_var()))
    }

    pub fn at(&self, t0: &ParamExpr) -> Result<Self> {
        let t = vars::curve_var();
        let map = [(t, t0.clone())].into_iter().collect();
        self.map_coeffs(|c| c.subst_exprs(&map))
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (l, f) in self.comps.iter().enumerate() {
            for (m, c) in f.terms() {
                let j = m.anti_indices()[0];
                let atom = format!("~e{}@e{}", j, l + 1);
                let s = if c.is_one() {
                    atom
                } else if c.needs_parens_as_factor() {
                    format!("({})*{}", c, atom)
                } else {
                    format!("{}*{}", c, atom)
                };
                parts.push(s);
            }
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}

/// `i_φ α = Σ_λ φ^λ ∧ i_{Z_λ} α`.
pub fn contract(phi: &VectorForm01, a: &Form) -> Form {
    let mut r = Form::zero(a.n());
    for (l, f) in phi.comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        r = r.add(&f.wedge_unchecked(&a.contract_frame(false, l + 1)));
    }
    r
}

/// `i_{φ̄} α = Σ_λ conj(φ^λ) ∧ i_{~Z_λ} α`.
pub fn contract_bar(phi: &VectorForm01, a: &Form) -> Form {
    let mut r = Form::zero(a.n());
    for (l, f) in phi.comps.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        r = r.add(&f.conj().wedge_unchecked(&a.contract_frame(true, l + 1)));
    }
    r
}

/// Leg substitution `e^i -> e^i + φ^i`, `~e^j -> ~e^j + conj(φ^j)`.
pub fn extension_legmap(phi: &VectorForm01) -> LegMap {
    let n = phi.n;
    let mut map = LegMap::identity(n);
    let m = phi.matrix();
    for i in 0..n {
        for j in 0..n {
            map.m[i][n + j] = m[i][j].clone();
            map.m[n + j][i] = m[j][i].conj();
        }
    }
    map
}

/// The matrices attached to a vector form; see [`endo_pairs`].
#[derive(Clone, Debug)]
pub struct EndoBundle {
    pub phi: Matrix,
    /// `φφ̄ = φ̄⌟φ`, acting on holomorphic legs.
    pub phi_phibar: Matrix,
    /// `φ̄φ = φ⌟φ̄`, acting on antiholomorphic legs.
    pub phibar_phi: Matrix,
    pub inv_hol: Matrix,
    pub inv_anti: Matrix,
}

pub fn endo_pairs(phi: &VectorForm01) -> Result<EndoBundle> {
    let n = phi.n;
    let m = phi.matrix();
    let mb = linalg::mat_conj(&m);
    let pp = linalg::mat_mul(&m, &mb);
    let pbp = linalg::mat_mul(&mb, &m);
    let a = linalg::mat_sub(&linalg::identity(n), &pp);
    let inv_hol = linalg::require_inverse(&a, Error::SingularEndomorphism)?;
    let inv_anti = linalg::mat_conj(&inv_hol);
    Ok(EndoBundle { phi: m, phi_phibar: pp, phibar_phi: pbp, inv_hol, inv_anti })
}

/// A pair of endomorphisms applied to holomorphic and antiholomorphic legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndoPair {
    pub hol: Matrix,
    pub anti: Matrix,
}

impl EndoPair {
    pub fn identity(n: usize) -> Self {
        EndoPair { hol: linalg::identity(n), anti: linalg::identity(n) }
    }

    pub fn to_legmap(&self) -> LegMap {
        let n = self.hol.len();
        let mut map = LegMap { n, m: vec![vec![ParamExpr::zero(); 2 * n]; 2 * n] };
        for i in 0..n {
            for k in 0..n {
                map.m[i][k] = self.hol[i][k].clone();
                map.m[n + i][n + k] = self.anti[i][k].clone();
            }
        }
        map
    }
}

/// Simultaneous contraction: apply the leg map to every leg.
pub fn simul_contract(map: &LegMap, a: &Form) -> Form {
    map.apply(a)
}

pub fn extension_map(phi: &VectorForm01, a: &Form) -> Result<Form> {
    frame_change(phi)?;
    Ok(extension_legmap(phi).apply(a))
}

/// Inverse of the coframe change `θ = η + Φ ~η`, as a leg map rewriting base
/// legs in terms of deformed legs.
pub fn frame_change(phi: &VectorForm01) -> Result<LegMap> {
    let n = phi.n;
    let e = endo_pairs(phi).map_err(|err| match err {
        Error::SingularEndomorphism(d) => Error::NonInvertibleFrame(d),
        other => other,
    })?;
    let ainv_phi = linalg::mat_mul(&e.inv_hol, &e.phi);
    let binv_phib = linalg::mat_mul(&e.inv_anti, &linalg::mat_conj(&e.phi));
    let mut map = LegMap { n, m: vec![vec![ParamExpr::zero(); 2 * n]; 2 * n] };
    for i in 0..n {
        for k in 0..n {
            map.m[i][k] = e.inv_hol[i][k].clone();
            map.m[i][n + k] = -&ainv_phi[i][k];
            map.m[n + i][k] = -&binv_phib[i][k];
            map.m[n + i][n + k] = e.inv_anti[i][k].clone();
        }
    }
    Ok(map)
}

/// Rewrites a form in base legs as a combination of deformed monomials.
pub fn to_deformed_basis(inv: &LegMap, a: &Form) -> Form {
    inv.apply(a)
}

#[derive(Clone, Debug)]
pub struct DeformedStructure {
    /// `dθ^k` in deformed monomials.
    pub d_theta: Vec<Form>,
    /// The `(0,2)` parts of `dθ^k`.
    pub defect: Vec<Form>,
}

impl DeformedStructure {
    pub fn is_integrable(&self, alg: &ComplexAlgebra) -> Result<bool> {
        for f in &self.defect {
            if !alg.is_zero_mod(f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn deformed_structure(alg: &ComplexAlgebra, phi: &VectorForm01) -> Result<DeformedStructure> {
    let n = alg.n();
    let raw: Vec<Form> = (1..=n).map(|k| alg.d(&Form::eta(n, k).add(phi.component(k)))).collect();
    if raw.iter().all(Form::is_zero) {
        // nothing to rewrite, skip the frame inverse
        return Ok(DeformedStructure { defect: raw.clone(), d_theta: raw });
    }
    let inv = frame_change(phi)?;
    let mut d_theta = Vec::with_capacity(n);
    let mut defect = Vec::with_capacity(n);
    for r in &raw {
        let dt = to_deformed_basis(&inv, r);
        defect.push(dt.part(0, 2));
        d_theta.push(dt);
    }
    Ok(DeformedStructure { d_theta, defect })
}

/// Linearized integrability `∂̄φ^k - i_φ(∂̄ e^k)`, the first-order part of the
/// defect.
pub fn delbar_vector(alg: &ComplexAlgebra, phi: &VectorForm01) -> Vec<Form> {
    (1..=alg.n())
        .map(|k| alg.delbar(phi.component(k)).sub(&contract(phi, &alg.delbar(&Form::eta(alg.n(), k))).part(0, 2)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct CurveDefect {
    pub defect: Vec<Form>,
    pub first_order: Vec<Form>,
    /// Independent first-order prediction from [`delbar_vector`] at `φ'(0)`.
    pub linearized: Vec<Form>,
}

pub fn mc_defect_on_curve(alg: &ComplexAlgebra, curve: &VectorForm01) -> Result<CurveDefect> {
    let t = vars::curve_var();
    let ds = deformed_structure(alg, curve)?;
    let defect: Vec<Form> = ds.defect.iter().map(|f| alg.reduce_form(f)).collect::<Result<_>>()?;
    let first_order = defect
        .iter()
        .map(|f| alg.reduce_form(&f.try_map_coeffs(|c| c.taylor_coeff(t, 1))?))
        .collect::<Result<_>>()?;
    let lin = delbar_vector(alg, &curve.derivative_at_zero()?);
    let linearized = lin.iter().map(|f| alg.reduce_form(f)).collect::<Result<_>>()?;
    Ok(CurveDefect { defect, first_order, linearized })
}

/// How `(I - φφ̄)⨝` and `(I - φ̄φ)⨝` act on the two kinds of legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reading {
    /// `(I - φφ̄)` on holomorphic legs only, `(I - φ̄φ)` on antiholomorphic
    /// legs only.
    #[default]
    Split,
    /// Both act as `(I - φφ̄, I - φ̄φ)` on the respective legs.
    Joint,
}

fn pair_maps(e: &EndoBundle, reading: Reading) -> [LegMap; 4] {
    let n = e.phi.len();
    let id = linalg::identity(n);
    let a = linalg::mat_sub(&id, &e.phi_phibar);
    let b = linalg::mat_sub(&id, &e.phibar_phi);
    let (p, pinv, q, qinv) = match reading {
        Reading::Split => (
            EndoPair { hol: a, anti: id.clone() },
            EndoPair { hol: e.inv_hol.clone(), anti: id.clone() },
            EndoPair { hol: id.clone(), anti: b },
            EndoPair { hol: id, anti: e.inv_anti.clone() },
        ),
        Reading::Joint => {
            let both = EndoPair { hol: a, anti: b };
            let inv = EndoPair { hol: e.inv_hol.clone(), anti: e.inv_anti.clone() };
            (both.clone(), inv.clone(), both, inv)
        }
    };
    [p.to_legmap(), pinv.to_legmap(), q.to_legmap(), qinv.to_legmap()]
}

/// `∂_t` and `∂̄_t` for one vector form, with the leg maps computed once.
pub struct DeformedOps {
    phi: VectorForm01,
    maps: [LegMap; 4],
}

impl DeformedOps {
    pub fn new(phi: &VectorForm01, reading: Reading) -> Result<Self> {
        Ok(DeformedOps { phi: phi.clone(), maps: pair_maps(&endo_pairs(phi)?, reading) })
    }

    /// Operators correct to first order in the curve parameter: `φ` and every
    /// leg map are replaced by their first-order truncations.
    pub fn first_order(phi: &VectorForm01, reading: Reading) -> Result<Self> {
        let t = vars::curve_var();
        let phi = phi.jet1()?;
        let n = phi.n;
        let m = phi.matrix();
        let mb = linalg::mat_conj(&m);
        let trunc = |x: &Matrix| -> Result<Matrix> {
            x.iter().map(|r| r.iter().map(|c| c.jet1(t)).collect()).collect()
        };
        let pp = trunc(&linalg::mat_mul(&m, &mb))?;
        let pbp = trunc(&linalg::mat_mul(&mb, &m))?;
        let a = linalg::mat_sub(&linalg::identity(n), &pp);
        let a0 = a.iter().map(|r| r.iter().map(|c| c.taylor_coeff(t, 0)).collect()).collect::<Result<Matrix>>()?;
        let a1 = a.iter().map(|r| r.iter().map(|c| c.taylor_coeff(t, 1)).collect()).collect::<Result<Matrix>>()?;
        let a0inv = linalg::require_inverse(&a0, Error::SingularEndomorphism)?;
        // (A0 + t A1)^{-1} = A0^{-1} - t A0^{-1} A1 A0^{-1} + O(t^2)
        let corr = linalg::mat_mul(&linalg::mat_mul(&a0inv, &a1), &a0inv);
        let tv = ParamExpr::var(t);
        let inv_hol: Matrix = a0inv
            .iter()
            .zip(&corr)
            .map(|(r, cr)| r.iter().zip(cr).map(|(x, y)| x - &(&tv * y)).collect())
            .collect();
        let inv_anti = linalg::mat_conj(&inv_hol);
        let e = EndoBundle { phi: m, phi_phibar: pp, phibar_phi: pbp, inv_hol, inv_anti };
        Ok(DeformedOps { maps: pair_maps(&e, reading), phi })
    }

    pub fn del(&self, alg: &ComplexAlgebra, a: &Form) -> Form {
        let [p, pinv, _, _] = &self.maps;
        let b = p.apply(a);
        let comm = alg.delbar(&contract_bar(&self.phi, &b)).sub(&contract_bar(&self.phi, &alg.delbar(&b)));
        pinv.apply(&comm.add(&alg.del(&b)))
    }

    pub fn delbar(&self, alg: &ComplexAlgebra, a: &Form) -> Form {
        let [_, _, q, qinv] = &self.maps;
        let b = q.apply(a);
        let comm = alg.del(&contract(&self.phi, &b)).sub(&contract(&self.phi, &alg.del(&b)));
        qinv.apply(&comm.add(&alg.delbar(&b)))
    }
}

/// `γ` with `∂_t(e^{i_φ|i_φ̄} α) = e^{i_φ|i_φ̄} γ`, from the composition
/// `(I-φφ̄)^{-1}⨝ ([∂̄, i_φ̄] + ∂) (I-φφ̄)⨝`.
pub fn del_t(alg: &ComplexAlgebra, phi: &VectorForm01, a: &Form) -> Result<Form> {
    del_t_with(alg, phi, a, Reading::default())
}

pub fn delbar_t(alg: &ComplexAlgebra, phi: &VectorForm01, a: &Form) -> Result<Form> {
    delbar_t_with(alg, phi, a, Reading::default())
}

pub fn del_t_with(alg: &ComplexAlgebra, phi: &VectorForm01, a: &Form, reading: Reading) -> Result<Form> {
    Ok(DeformedOps::new(phi, reading)?.del(alg, a))
}

pub fn delbar_t_with(alg: &ComplexAlgebra, phi: &VectorForm01, a: &Form, reading: Reading) -> Result<Form> {
    Ok(DeformedOps::new(phi, reading)?.delbar(alg, a))
}

/// Second route: project `d(e^{i_φ|i_φ̄} α)` onto deformed bidegrees.
/// Returns the `(p+1,q)_t` and `(p,q+1)_t` parts and the remainder.
pub fn deformed_d_projection(alg: &ComplexAlgebra, phi: &VectorForm01, a: &Form) -> Result<(Form, Form, Form)> {
    let (p, q) = a.bidegree().unwrap_or((0, 0));
    let inv = frame_change(phi)?;
    let da = to_deformed_basis(&inv, &alg.d(&extension_legmap(phi).apply(a)));
    let del = da.part(p + 1, q);
    let delbar = da.part(p, q + 1);
    let rest = da.sub(&del).sub(&delbar);
    Ok((del, delbar, rest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_of_coframe() {
        let n = 4;
        let r = ParamExpr::param("deform_test_r").unwrap();
        let mut phi = VectorForm01::zero(n);
        phi.add_term(1, 1, r.clone());
        assert_eq!(contract(&phi, &Form::eta(n, 1)), Form::eta_bar(n, 1).scale(&r));
        assert!(contract(&phi, &Form::eta_bar(n, 2)).is_zero());
    }

    #[test]
    fn endo_inverse_one_by_one() {
        let r = ParamExpr::param("deform_test_r").unwrap();
        let mut phi = VectorForm01::zero(1);
        phi.add_term(1, 1, r.clone());
        let e = endo_pairs(&phi).unwrap();
        let expect = (&ParamExpr::one() - &(&r * &r.conj())).inv().unwrap();
        assert_eq!(e.inv_hol[0][0], expect);
    }
}
