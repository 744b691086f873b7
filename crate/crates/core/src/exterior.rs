//! Bigraded exterior algebra on the coframe `e1..en, ~e1..~en`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalars::{GaussRat, ParamExpr};

pub const MAX_DIM: usize = 9;

/// A basis monomial `e^{I ~J}`. Legs are ordered holomorphic first, each
/// block ascending.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub hol: u16,
    pub anti: u16,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { hol: 0, anti: 0 };

    pub fn new(hol: u16, anti: u16) -> Self {
        Monomial { hol, anti }
    }

    /// Builds a monomial from 1-based index lists, returning the sign of
    /// sorting the given leg order (or `None` if an index repeats).
    pub fn from_indices(hol: &[usize], anti: &[usize]) -> Option<(i32, Monomial)> {
        let mut keys: Vec<u32> = hol.iter().map(|&i| (i - 1) as u32).collect();
        keys.extend(anti.iter().map(|&j| 16 + (j - 1) as u32));
        let mut sign = 1;
        for a in 0..keys.len() {
            for b in a + 1..keys.len() {
                if keys[a] == keys[b] {
                    return None;
                }
                if keys[a] > keys[b] {
                    sign = -sign;
                }
            }
        }
        let mut m = Monomial::ONE;
        for k in keys {
            if k >= 16 {
                m.anti |= 1 << (k - 16);
            } else {
                m.hol |= 1 << k;
            }
        }
        Some((sign, m))
    }

    pub fn hol_leg(i: usize) -> Monomial {
        Monomial { hol: 1 << (i - 1), anti: 0 }
    }

    pub fn anti_leg(j: usize) -> Monomial {
        Monomial { hol: 0, anti: 1 << (j - 1) }
    }

    pub fn p(&self) -> usize {
        self.hol.count_ones() as usize
    }

    pub fn q(&self) -> usize {
        self.anti.count_ones() as usize
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p(), self.q())
    }

    pub fn degree(&self) -> usize {
        self.p() + self.q()
    }

    fn key(&self) -> u32 {
        self.hol as u32 | (self.anti as u32) << 16
    }

    fn from_key(k: u32) -> Monomial {
        Monomial { hol: (k & 0xffff) as u16, anti: (k >> 16) as u16 }
    }

    /// 1-based holomorphic indices.
    pub fn hol_indices(&self) -> Vec<usize> {
        bits(self.hol)
    }

    pub fn anti_indices(&self) -> Vec<usize> {
        bits(self.anti)
    }

    /// Legs in canonical order as `(is_anti, index)`.
    pub fn legs(&self) -> Vec<(bool, usize)> {
        let mut v: Vec<(bool, usize)> = bits(self.hol).into_iter().map(|i| (false, i)).collect();
        v.extend(bits(self.anti).into_iter().map(|j| (true, j)));
        v
    }

    /// `self ∧ o` as a sign and monomial, or `None` if a leg repeats.
    pub fn wedge(&self, o: &Monomial) -> Option<(i32, Monomial)> {
        let (a, b) = (self.key(), o.key());
        if a & b != 0 {
            return None;
        }
        // each leg of `o` passes every leg of `self` with a larger key
        let mut inv = 0u32;
        let mut rest = b;
        while rest != 0 {
            let low = rest & rest.wrapping_neg();
            inv += (a & !(low | (low - 1))).count_ones();
            rest &= rest - 1;
        }
        let sign = if inv % 2 == 0 { 1 } else { -1 };
        Some((sign, Monomial::from_key(a | b)))
    }

    /// Complementary monomial in dimension `n`.
    pub fn complement(&self, n: usize) -> Monomial {
        let full = ((1u32 << n) - 1) as u16;
        Monomial { hol: full & !self.hol, anti: full & !self.anti }
    }

    pub fn top(n: usize) -> Monomial {
        Monomial::ONE.complement(n)
    }

    /// Conjugate monomial and the sign of reordering the conjugated legs.
    pub fn conj(&self) -> (i32, Monomial) {
        let sign = if (self.p() * self.q()) % 2 == 0 { 1 } else { -1 };
        (sign, Monomial { hol: self.anti, anti: self.hol })
    }

    pub fn render(&self) -> String {
        let mut s = String::from("e");
        for i in bits(self.hol) {
            s.push_str(&i.to_string());
        }
        if self.anti != 0 {
            s.push('~');
            for j in bits(self.anti) {
                s.push_str(&j.to_string());
            }
        }
        if self.hol == 0 && self.anti == 0 {
            return "1".into();
        }
        s
    }
}

fn bits(mut x: u16) -> Vec<usize> {
    let mut v = Vec::new();
    while x != 0 {
        v.push(x.trailing_zeros() as usize + 1);
        x &= x - 1;
    }
    v
}

/// Order: total degree, then holomorphic degree (descending), then the leg
/// index sets lexicographically.
impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&o.degree())
            .then(o.p().cmp(&self.p()))
            .then_with(|| self.hol_indices().cmp(&o.hol_indices()))
            .then_with(|| self.anti_indices().cmp(&o.anti_indices()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn dim(n: usize, p: usize, q: usize) -> usize {
    binom(n, p) * binom(n, q)
}

/// All monomials of bidegree `(p,q)` in canonical order.
pub fn basis(n: usize, p: usize, q: usize) -> Vec<Monomial> {
    let subsets = |k: usize| -> Vec<u16> {
        let mut v: Vec<u16> = (0u32..(1 << n)).filter(|s| s.count_ones() as usize == k).map(|s| s as u16).collect();
        v.sort_by_key(|&s| bits(s));
        v
    };
    let mut out = Vec::with_capacity(dim(n, p, q));
    for h in subsets(p) {
        for a in subsets(q) {
            out.push(Monomial { hol: h, anti: a });
        }
    }
    out
}

/// An invariant form: a sparse combination of monomials, possibly of mixed
/// bidegree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    n: usize,
    terms: BTreeMap<Monomial, ParamExpr>,
}

impl Form {
    pub fn zero(n: usize) -> Self {
        Form { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Form::monomial(n, Monomial::ONE, ParamExpr::one())
    }

    pub fn monomial(n: usize, m: Monomial, c: ParamExpr) -> Self {
        let mut f = Form::zero(n);
        f.add_term(m, c);
        f
    }

    pub fn basis_elem(n: usize, m: Monomial) -> Self {
        Form::monomial(n, m, ParamExpr::one())
    }

    /// `e^i` (1-based).
    pub fn eta(n: usize, i: usize) -> Self {
        Form::basis_elem(n, Monomial::hol_leg(i))
    }

    /// `~e^j` (1-based).
    pub fn eta_bar(n: usize, j: usize) -> Self {
        Form::basis_elem(n, Monomial::anti_leg(j))
    }

    /// `e^{I ~J}` from index lists in the given leg order.
    pub fn from_legs(n: usize, hol: &[usize], anti: &[usize]) -> Self {
        match Monomial::from_indices(hol, anti) {
            Some((s, m)) => Form::monomial(n, m, ParamExpr::int(s as i64)),
            None => Form::zero(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ParamExpr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> ParamExpr {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: ParamExpr) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = &*e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// The single bidegree of a nonzero homogeneous form.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(Monomial::bidegree);
        let first = it.next()?;
        if it.all(|b| b == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self, p: usize, q: usize) -> bool {
        self.terms.keys().all(|m| m.bidegree() == (p, q))
    }

    /// The `(p,q)` component.
    pub fn part(&self, p: usize, q: usize) -> Form {
        self.filter(|m| m.bidegree() == (p, q))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Form {
        Form {
            n: self.n,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self.terms.keys().map(Monomial::bidegree).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn add(&self, o: &Form) -> Form {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Form) -> Form {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, -c);
        }
        r
    }

    pub fn neg(&self) -> Form {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, s: &ParamExpr) -> Form {
        if s.is_zero() {
            return Form::zero(self.n);
        }
        self.map_coeffs(|c| c * s)
    }

    pub fn scale_const(&self, s: &GaussRat) -> Form {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn map_coeffs(&self, f: impl Fn(&ParamExpr) -> ParamExpr) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in &self.terms {
            r.add_term(*m, f(c));
        }
        r
    }

    pub fn try_map_coeffs(&self, f: impl Fn(&ParamExpr) -> Result<ParamExpr>) -> Result<Form> {
        let mut r = Form::zero(self.n);
        for (m, c) in &self.terms {
            r.add_term(*m, f(c)?);
        }
        Ok(r)
    }

    /// Wedge product; fails if the result would exceed bidegree `(n,n)`.
    pub fn wedge(&self, o: &Form) -> Result<Form> {
        for b1 in self.bidegrees() {
            for b2 in o.bidegrees() {
                if b1.0 + b2.0 > self.n || b1.1 + b2.1 > self.n {
                    return Err(Error::DegreeOverflow { p: b1.0 + b2.0, q: b1.1 + b2.1, n: self.n });
                }
            }
        }
        Ok(self.wedge_unchecked(o))
    }

    /// Wedge product where overflowing terms simply vanish.
    pub fn wedge_unchecked(&self, o: &Form) -> Form {
        let mut r = Form::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some((s, m)) = a.wedge(b) {
                    let c = ca * cb;
                    r.add_term(m, if s < 0 { -c } else { c });
                }
            }
        }
        r
    }

    pub fn pow_wedge(&self, k: usize) -> Form {
        let mut acc = Form::one(self.n);
        for _ in 0..k {
            acc = acc.wedge_unchecked(self);
        }
        acc
    }

    /// Interior product with `Z_k` (or `~Z_k` when `anti`), 1-based.
    pub fn contract_frame(&self, anti: bool, k: usize) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in &self.terms {
            if let Some((s, rest)) = contract_monomial(m, anti, k) {
                r.add_term(rest, if s < 0 { -c } else { c.clone() });
            }
        }
        r
    }

    /// Conjugation: swaps legs with reordering sign and conjugates coefficients.
    pub fn conj(&self) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in &self.terms {
            let (s, cm) = m.conj();
            let cc = c.conj();
            r.add_term(cm, if s < 0 { -cc } else { cc });
        }
        r
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, body) = render_term(m, c);
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

/// Splits a term into a sign and a body with an explicit leading factor.
fn render_term(m: &Monomial, c: &ParamExpr) -> (bool, String) {
    let (neg, c) = if c.is_polynomial() && c.numer().len() == 1 && c.to_string().starts_with('-') {
        (true, -c)
    } else {
        (false, c.clone())
    };
    let mono = m.render();
    let body = if c.is_one() {
        mono
    } else if *m == Monomial::ONE {
        if c.needs_parens_as_factor() && !c.is_constant() {
            format!("({})", c)
        } else {
            c.to_string()
        }
    } else if c.needs_parens_as_factor() {
        format!("({})*{}", c, mono)
    } else {
        format!("{}*{}", c, mono)
    };
    (neg, body)
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `i_{Z_k} m` as a sign and monomial.
pub fn contract_monomial(m: &Monomial, anti: bool, k: usize) -> Option<(i32, Monomial)> {
    let bit = 1u16 << (k - 1);
    if anti {
        if m.anti & bit == 0 {
            return None;
        }
        let before = m.p() + (m.anti & (bit - 1)).count_ones() as usize;
        let s = if before % 2 == 0 { 1 } else { -1 };
        Some((s, Monomial { hol: m.hol, anti: m.anti & !bit }))
    } else {
        if m.hol & bit == 0 {
            return None;
        }
        let before = (m.hol & (bit - 1)).count_ones() as usize;
        let s = if before % 2 == 0 { 1 } else { -1 };
        Some((s, Monomial { hol: m.hol & !bit, anti: m.anti }))
    }
}

/// A linear map between two homogeneous spaces of forms, as a matrix over the
/// enumerated bases (rows: codomain, columns: domain).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearOp {
    pub n: usize,
    pub domain: (usize, usize),
    pub codomain: (usize, usize),
    pub matrix: Vec<Vec<ParamExpr>>,
}

impl LinearOp {
    pub fn zero(n: usize, domain: (usize, usize), codomain: (usize, usize)) -> Self {
        let rows = dim(n, codomain.0, codomain.1);
        let cols = dim(n, domain.0, domain.1);
        LinearOp { n, domain, codomain, matrix: vec![vec![ParamExpr::zero(); cols]; rows] }
    }

    pub fn identity(n: usize, p: usize, q: usize) -> Self {
        LinearOp::from_action(n, (p, q), (p, q), |m| Ok(Form::basis_elem(n, *m))).expect("identity")
    }

    /// Matrix of an action given on basis monomials.
    pub fn from_action(
        n: usize,
        domain: (usize, usize),
        codomain: (usize, usize),
        f: impl Fn(&Monomial) -> Result<Form>,
    ) -> Result<Self> {
        let mut op = LinearOp::zero(n, domain, codomain);
        let rows = basis(n, codomain.0, codomain.1);
        let index: BTreeMap<Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        for (j, m) in basis(n, domain.0, domain.1).iter().enumerate() {
            let img = f(m)?;
            for (mm, c) in img.terms() {
                let i = *index.get(mm).ok_or_else(|| Error::BidegreeMismatch {
                    expected: format!("{:?}", codomain),
                    found: format!("{:?}", mm.bidegree()),
                })?;
                op.matrix[i][j] = c.clone();
            }
        }
        Ok(op)
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        dim(self.n, self.domain.0, self.domain.1)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|r| r.iter().all(ParamExpr::is_zero))
    }

    pub fn apply(&self, a: &Form) -> Result<Form> {
        if !a.is_homogeneous(self.domain.0, self.domain.1) {
            return Err(Error::BidegreeMismatch {
                expected: format!("{:?}", self.domain),
                found: format!("{:?}", a.bidegrees()),
            });
        }
        let cols: BTreeMap<Monomial, usize> =
            basis(self.n, self.domain.0, self.domain.1).into_iter().enumerate().map(|(i, m)| (m, i)).collect();
        let rows = basis(self.n, self.codomain.0, self.codomain.1);
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            let j = cols[m];
            for (i, row) in self.matrix.iter().enumerate() {
                if !row[j].is_zero() {
                    r.add_term(rows[i], &row[j] * c);
                }
            }
        }
        Ok(r)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &LinearOp) -> Result<LinearOp> {
        if first.codomain != self.domain {
            return Err(Error::BidegreeMismatch {
                expected: format!("{:?}", self.domain),
                found: format!("{:?}", first.codomain),
            });
        }
        let mut out = LinearOp::zero(self.n, first.domain, self.codomain);
        for i in 0..self.rows() {
            for j in 0..first.cols() {
                let mut acc = ParamExpr::zero();
                for k in 0..first.rows() {
                    if self.matrix[i][k].is_zero() || first.matrix[k][j].is_zero() {
                        continue;
                    }
                    acc = &acc + &(&self.matrix[i][k] * &first.matrix[k][j]);
                }
                out.matrix[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &LinearOp) -> Result<LinearOp> {
        if self.domain != o.domain || self.codomain != o.codomain {
            return Err(Error::BidegreeMismatch {
                expected: format!("{:?}->{:?}", self.domain, self.codomain),
                found: format!("{:?}->{:?}", o.domain, o.codomain),
            });
        }
        let mut out = self.clone();
        for (r, orow) in out.matrix.iter_mut().zip(&o.matrix) {
            for (x, y) in r.iter_mut().zip(orow) {
                *x = &*x + y;
            }
        }
        Ok(out)
    }

    pub fn map_entries(&self, f: impl Fn(&ParamExpr) -> ParamExpr) -> LinearOp {
        LinearOp {
            n: self.n,
            domain: self.domain,
            codomain: self.codomain,
            matrix: self.matrix.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

/// A linear substitution of coframe legs: leg `l` is replaced by the 1-form
/// `Σ_m M[l][m] leg_m`. Legs `0..n` are holomorphic, `n..2n` antiholomorphic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LegMap {
    pub n: usize,
    pub m: Vec<Vec<ParamExpr>>,
}

impl LegMap {
    pub fn identity(n: usize) -> Self {
        let mut m = vec![vec![ParamExpr::zero(); 2 * n]; 2 * n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ParamExpr::one();
        }
        LegMap { n, m }
    }

    fn leg_form(&self, l: usize) -> Form {
        let n = self.n;
        let mut f = Form::zero(n);
        for (k, c) in self.m[l].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = if k < n { Monomial::hol_leg(k + 1) } else { Monomial::anti_leg(k - n + 1) };
            f.add_term(mono, c.clone());
        }
        f
    }

    /// The image of a monomial: wedge of the images of its legs.
    pub fn apply_monomial(&self, m: &Monomial) -> Form {
        let mut acc = Form::one(self.n);
        for (anti, i) in m.legs() {
            let l = if anti { self.n + i - 1 } else { i - 1 };
            acc = acc.wedge_unchecked(&self.leg_form(l));
        }
        acc
    }

    pub fn apply(&self, a: &Form) -> Form {
        let mut r = Form::zero(self.n);
        for (m, c) in a.terms() {
            let img = self.apply_monomial(m);
            for (mm, cc) in img.terms() {
                r.add_term(*mm, cc * c);
            }
        }
        r
    }

    /// `self` after `first`: substituting with `first` then with `self`.
    pub fn then(&self, next: &LegMap) -> LegMap {
        // leg l -> Σ_k first[l][k] leg_k -> Σ_k first[l][k] Σ_j next[k][j] leg_j
        let d = 2 * self.n;
        let mut m = vec![vec![ParamExpr::zero(); d]; d];
        for l in 0..d {
            for k in 0..d {
                if self.m[l][k].is_zero() {
                    continue;
                }
                for j in 0..d {
                    if next.m[k][j].is_zero() {
                        continue;
                    }
                    m[l][j] = &m[l][j] + &(&self.m[l][k] * &next.m[k][j]);
                }
            }
        }
        LegMap { n: self.n, m }
    }
}
