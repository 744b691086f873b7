//! Invariant Hermitian metrics and the operators they induce.
//!
//! Convention: `ω = (i/2) Σ h_{jk} e^j ∧ ~e^k`, so `h = I` gives the standard
//! form. The induced pairing on 1-forms is `<e^a, e^b> = 2 (h^{-1})_{ba}` and
//! `<~e^a, ~e^b> = 2 (h^{-1})_{ab}`; on monomials it is the product of the two
//! Gram determinants. `vol = ω^n / n!`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::exterior::{basis, Form, LinearOp, Monomial};
use crate::linalg::{self, Matrix};
use crate::nilcomplex::ComplexAlgebra;
use crate::scalars::{Assignment, GaussRat, ParamExpr};

#[derive(Debug)]
pub struct HermitianMetric {
    n: usize,
    h: Matrix,
    assumed_positive: bool,
    hinv: OnceLock<Result<Matrix>>,
    vol: OnceLock<ParamExpr>,
    star_cache: RwLock<HashMap<Monomial, Form>>,
    gram_cache: RwLock<HashMap<(Monomial, Monomial), ParamExpr>>,
}

impl Clone for HermitianMetric {
    fn clone(&self) -> Self {
        HermitianMetric::raw(self.h.clone(), self.assumed_positive)
    }
}

impl PartialEq for HermitianMetric {
    fn eq(&self, o: &Self) -> bool {
        self.h == o.h
    }
}

fn positive_rational(x: &GaussRat) -> bool {
    x.is_real() && x.re > num_rational::BigRational::from_integer(0.into())
}

impl HermitianMetric {
    fn raw(h: Matrix, assumed_positive: bool) -> Self {
        HermitianMetric {
            n: h.len(),
            h,
            assumed_positive,
            hinv: OnceLock::new(),
            vol: OnceLock::new(),
            star_cache: RwLock::new(HashMap::new()),
            gram_cache: RwLock::new(HashMap::new()),
        }
    }

    /// Checks exact Hermitian symmetry; constant matrices are also checked
    /// for positivity, symbolic ones are flagged as assumed positive.
    pub fn new(h: Matrix) -> Result<Self> {
        let n = h.len();
        for j in 0..n {
            if h[j].len() != n {
                return Err(Error::NonHermitianMetric { row: j + 1, col: h[j].len() });
            }
            for k in j..n {
                if h[j][k] != h[k][j].conj() {
                    return Err(Error::NonHermitianMetric { row: j + 1, col: k + 1 });
                }
            }
        }
        let constant = h.iter().all(|r| r.iter().all(ParamExpr::is_constant));
        let m = HermitianMetric::raw(h, !constant);
        if constant {
            m.check_positive(&Assignment::new())?;
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMetric::new(linalg::identity(n)).expect("identity is a metric")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn assumed_positive(&self) -> bool {
        self.assumed_positive
    }

    /// Leading principal minors at a numeric point.
    pub fn check_positive(&self, assign: &Assignment) -> Result<()> {
        for k in 1..=self.n {
            let minor: Matrix = self.h[..k].iter().map(|r| r[..k].to_vec()).collect();
            let v = linalg::determinant(&minor)?.eval(assign)?;
            if !positive_rational(&v) {
                return Err(Error::NotPositiveDefinite { minor: k });
            }
        }
        Ok(())
    }

    pub fn substitute(&self, assign: &Assignment) -> Result<HermitianMetric> {
        let h = self.h.iter().map(|r| r.iter().map(|x| x.subst(assign)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        HermitianMetric::new(h)
    }

    pub fn fundamental_form(&self) -> Form {
        let n = self.n;
        let half_i = ParamExpr::constant(GaussRat::from_frac(1, 2) * GaussRat::i());
        let mut w = Form::zero(n);
        for j in 0..n {
            for k in 0..n {
                if !self.h[j][k].is_zero() {
                    let (_, m) = Monomial::from_indices(&[j + 1], &[k + 1]).unwrap();
                    w.add_term(m, &half_i * &self.h[j][k]);
                }
            }
        }
        w
    }

    pub fn h_inverse(&self) -> Result<&Matrix> {
        self.hinv
            .get_or_init(|| match linalg::inverse(&self.h, &linalg::no_reduce)? {
                Some(m) => Ok(m),
                None => Err(Error::SingularMetric),
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Coefficient `v0` with `ω^n/n! = v0 · e^{1..n ~1..n}`.
    pub fn volume_coefficient(&self) -> &ParamExpr {
        self.vol.get_or_init(|| {
            let n = self.n;
            let top = self.fundamental_form().pow_wedge(n).coeff(&Monomial::top(n));
            let fact: i64 = (1..=n as i64).product();
            top.scale(&GaussRat::from_frac(1, fact))
        })
    }

    pub fn volume_form(&self) -> Form {
        Form::monomial(self.n, Monomial::top(self.n), self.volume_coefficient().clone())
    }

    fn gram(&self, m1: &Monomial, m2: &Monomial) -> Result<ParamExpr> {
        if m1.bidegree() != m2.bidegree() {
            return Ok(ParamExpr::zero());
        }
        if let Some(g) = self.gram_cache.read().unwrap().get(&(*m1, *m2)) {
            return Ok(g.clone());
        }
        let hinv = self.h_inverse()?;
        let two = GaussRat::from(2);
        let (i1, i2) = (m1.hol_indices(), m2.hol_indices());
        let hol: Matrix = i1.iter().map(|&a| i2.iter().map(|&b| hinv[b - 1][a - 1].scale(&two)).collect()).collect();
        let (j1, j2) = (m1.anti_indices(), m2.anti_indices());
        let anti: Matrix = j1.iter().map(|&a| j2.iter().map(|&b| hinv[a - 1][b - 1].scale(&two)).collect()).collect();
        let g = &linalg::determinant(&hol)? * &linalg::determinant(&anti)?;
        self.gram_cache.write().unwrap().insert((*m1, *m2), g.clone());
        Ok(g)
    }

    fn is_diagonal(&self) -> bool {
        (0..self.n).all(|j| (0..self.n).all(|k| j == k || self.h[j][k].is_zero()))
    }

    /// Pointwise pairing, linear in `a` and conjugate-linear in `b`.
    pub fn inner(&self, a: &Form, b: &Form) -> Result<ParamExpr> {
        if let (Some(x), Some(y)) = (a.bidegree(), b.bidegree()) {
            if x != y {
                return Err(Error::BidegreeMismatch { expected: format!("{:?}", x), found: format!("{:?}", y) });
            }
        }
        let diag = self.is_diagonal();
        let mut acc = ParamExpr::zero();
        for (m1, c1) in a.terms() {
            for (m2, c2) in b.terms() {
                if m1.bidegree() != m2.bidegree() || (diag && m1 != m2) {
                    continue;
                }
                let g = self.gram(m1, m2)?;
                if !g.is_zero() {
                    acc = &acc + &(&(c1 * &c2.conj()) * &g);
                }
            }
        }
        Ok(acc)
    }

    fn star_monomial(&self, m: &Monomial) -> Result<Form> {
        if let Some(f) = self.star_cache.read().unwrap().get(m) {
            return Ok(f.clone());
        }
        let n = self.n;
        let v0 = self.volume_coefficient().clone();
        let (p, q) = m.bidegree();
        let candidates = if self.is_diagonal() { vec![*m] } else { basis(n, p, q) };
        let mut out = Form::zero(n);
        for b in candidates {
            let g = self.gram(&b, m)?;
            if g.is_zero() {
                continue;
            }
            let comp = b.complement(n);
            let (s, _) = b.wedge(&comp).expect("complementary");
            let c = &v0 * &g;
            out.add_term(comp, if s < 0 { -c } else { c });
        }
        Ok(self.star_cache.write().unwrap().entry(*m).or_insert(out).clone())
    }

    /// Conjugate-linear Hodge star: `β ∧ *α = <β, α> vol`.
    pub fn star(&self, a: &Form) -> Result<Form> {
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            let cc = c.conj();
            for (mm, k) in self.star_monomial(m)?.terms() {
                r.add_term(*mm, k * &cc);
            }
        }
        Ok(r)
    }

    pub fn del_star(&self, alg: &ComplexAlgebra, a: &Form) -> Result<Form> {
        Ok(self.star(&alg.del(&self.star(a)?))?.neg())
    }

    pub fn delbar_star(&self, alg: &ComplexAlgebra, a: &Form) -> Result<Form> {
        Ok(self.star(&alg.delbar(&self.star(a)?))?.neg())
    }

    pub fn del_star_op(&self, alg: &ComplexAlgebra, p: usize, q: usize) -> Result<LinearOp> {
        let n = self.n;
        if p == 0 {
            return Ok(LinearOp::zero(n, (0, q), (0, q)));
        }
        LinearOp::from_action(n, (p, q), (p - 1, q), |m| self.del_star(alg, &Form::basis_elem(n, *m)))
    }

    pub fn delbar_star_op(&self, alg: &ComplexAlgebra, p: usize, q: usize) -> Result<LinearOp> {
        let n = self.n;
        if q == 0 {
            return Ok(LinearOp::zero(n, (p, 0), (p, 0)));
        }
        LinearOp::from_action(n, (p, q), (p, q - 1), |m| self.delbar_star(alg, &Form::basis_elem(n, *m)))
    }

    /// The six-term Bott-Chern Laplacian applied to a form.
    pub fn bc_laplacian_apply(&self, alg: &ComplexAlgebra, a: &Form) -> Result<Form> {
        let d = |f: &Form| alg.del(f);
        let db = |f: &Form| alg.delbar(f);
        let ds = |f: &Form| self.del_star(alg, f);
        let dbs = |f: &Form| self.delbar_star(alg, f);
        let t1 = d(&db(&dbs(&ds(a)?)?));
        let t2 = dbs(&ds(&d(&db(a)))?)?;
        let t3 = ds(&db(&dbs(&d(a))?))?;
        let t4 = dbs(&d(&ds(&db(a))?))?;
        let t5 = ds(&d(a))?;
        let t6 = dbs(&db(a))?;
        Ok(t1.add(&t2).add(&t3).add(&t4).add(&t5).add(&t6))
    }

    pub fn bc_laplacian(&self, alg: &ComplexAlgebra, p: usize, q: usize) -> Result<LinearOp> {
        let n = self.n;
        LinearOp::from_action(n, (p, q), (p, q), |m| self.bc_laplacian_apply(alg, &Form::basis_elem(n, *m)))
    }

    pub fn skt_defect(&self, alg: &ComplexAlgebra) -> Form {
        alg.del_delbar(&self.fundamental_form())
    }

    pub fn astheno_defect(&self, alg: &ComplexAlgebra) -> Form {
        let k = self.n.saturating_sub(2);
        alg.del_delbar(&self.fundamental_form().pow_wedge(k))
    }

    pub fn gauduchon_defect(&self, alg: &ComplexAlgebra) -> Form {
        let k = self.n.saturating_sub(1);
        alg.del_delbar(&self.fundamental_form().pow_wedge(k))
    }
}

#[derive(Clone, Debug)]
pub struct Harmonicity {
    pub harmonic: bool,
    pub del: Form,
    pub delbar: Form,
    pub ddbar_star: Form,
    /// Cross-check: the Bott-Chern Laplacian applied to the form.
    pub laplacian: Form,
}

pub fn is_bc_harmonic(a: &Form, alg: &ComplexAlgebra, h: &HermitianMetric) -> Result<Harmonicity> {
    let del = alg.reduce_form(&alg.del(a))?;
    let delbar = alg.reduce_form(&alg.delbar(a))?;
    let ddbar_star = alg.reduce_form(&alg.del_delbar(&h.star(a)?))?;
    let laplacian = alg.reduce_form(&h.bc_laplacian_apply(alg, a)?)?;
    let harmonic = del.is_zero() && delbar.is_zero() && ddbar_star.is_zero();
    Ok(Harmonicity { harmonic, del, delbar, ddbar_star, laplacian })
}

#[derive(Clone, Debug)]
pub struct BcCohomology {
    pub p: usize,
    pub q: usize,
    pub dim_closed: usize,
    pub rank_image: usize,
    pub dim: usize,
    pub dim_harmonic: usize,
    pub harmonic_basis: Vec<Form>,
    /// True when some pivot depended on parameters (generic rank).
    pub generic: bool,
}

fn stack(ops: &[&LinearOp]) -> Matrix {
    ops.iter().flat_map(|o| o.matrix.iter().cloned()).collect()
}

fn checked_echelon(alg: &ComplexAlgebra, m: &Matrix) -> Result<linalg::Echelon> {
    let e = linalg::echelon(m, &|x| alg.reduce(x))?;
    if !alg.constraints().is_empty() {
        if let Some(p) = e.symbolic_pivot() {
            return Err(Error::RankAmbiguous(p.to_string()));
        }
    }
    Ok(e)
}

/// Invariant Bott-Chern cohomology in bidegree `(p,q)`, with harmonic
/// representatives.
pub fn bc_cohomology(alg: &ComplexAlgebra, h: &HermitianMetric, p: usize, q: usize) -> Result<BcCohomology> {
    let n = alg.n();
    let cols = crate::exterior::dim(n, p, q);
    let del = alg.del_op(p, q);
    let delbar = alg.delbar_op(p, q);
    let closed = checked_echelon(alg, &stack(&[&del, &delbar]))?;
    let dim_closed = cols - closed.rank();
    let (rank_image, g2) = if p >= 1 && q >= 1 {
        let e = checked_echelon(alg, &alg.ddbar_op(p - 1, q - 1).matrix)?;
        (e.rank(), e.symbolic_pivot().is_some())
    } else {
        (0, false)
    };
    let lap = h.bc_laplacian(alg, p, q)?;
    let le = checked_echelon(alg, &lap.matrix)?;
    let kernel = linalg::kernel(&lap.matrix, cols, &|x| alg.reduce(x))?;
    let b = basis(n, p, q);
    let harmonic_basis = kernel
        .iter()
        .map(|v| {
            let mut f = Form::zero(n);
            for (m, c) in b.iter().zip(v) {
                f.add_term(*m, c.clone());
            }
            f
        })
        .collect();
    Ok(BcCohomology {
        p,
        q,
        dim_closed,
        rank_image,
        dim: dim_closed - rank_image,
        dim_harmonic: cols - le.rank(),
        harmonic_basis,
        generic: closed.symbolic_pivot().is_some() || g2 || le.symbolic_pivot().is_some(),
    })
}

#[derive(Clone, Debug)]
pub struct Exactness {
    pub exact: bool,
    pub witness: Option<Form>,
}

/// Solves `∂∂̄β = α` over invariant forms.
pub fn is_ddbar_exact(a: &Form, alg: &ComplexAlgebra) -> Result<Exactness> {
    let n = alg.n();
    let del = alg.reduce_form(&alg.del(a))?;
    let delbar = alg.reduce_form(&alg.delbar(a))?;
    if !del.is_zero() || !delbar.is_zero() {
        return Err(Error::PreconditionFailure(format!("form is not closed: del = {}, delbar = {}", del, delbar)));
    }
    let a = alg.reduce_form(a)?;
    if a.is_zero() {
        return Ok(Exactness { exact: true, witness: Some(Form::zero(n)) });
    }
    let (p, q) = a
        .bidegree()
        .ok_or_else(|| Error::BidegreeMismatch { expected: "homogeneous form".into(), found: format!("{:?}", a.bidegrees()) })?;
    if p == 0 || q == 0 {
        return Ok(Exactness { exact: false, witness: None });
    }
    let op = alg.ddbar_op(p - 1, q - 1);
    let rows = basis(n, p, q);
    let rhs: Vec<ParamExpr> = rows.iter().map(|m| a.coeff(m)).collect();
    let cols = basis(n, p - 1, q - 1);
    match linalg::solve(&op.matrix, cols.len(), &rhs, &|x| alg.reduce(x))? {
        None => Ok(Exactness { exact: false, witness: None }),
        Some(x) => {
            let mut w = Form::zero(n);
            for (m, c) in cols.iter().zip(x) {
                w.add_term(*m, c);
            }
            Ok(Exactness { exact: true, witness: Some(w) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_metric_conventions() {
        let h = HermitianMetric::identity(1);
        let e1 = Form::eta(1, 1);
        assert_eq!(h.inner(&e1, &e1).unwrap(), ParamExpr::int(2));
        let one = Form::one(1);
        assert_eq!(h.star(&one).unwrap(), h.volume_form());
        assert_eq!(h.star(&h.star(&e1).unwrap()).unwrap(), e1.neg());
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let h = vec![vec![ParamExpr::one(), ParamExpr::i()], vec![ParamExpr::i(), ParamExpr::one()]];
        assert!(matches!(HermitianMetric::new(h), Err(Error::NonHermitianMetric { .. })));
        let h = vec![vec![ParamExpr::one(), ParamExpr::int(2)], vec![ParamExpr::int(2), ParamExpr::one()]];
        assert!(matches!(HermitianMetric::new(h), Err(Error::NotPositiveDefinite { minor: 2 })));
    }
}
