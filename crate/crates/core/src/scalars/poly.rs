//! Sparse multivariate polynomials over `Q(i)` with exact division and GCD.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use super::gauss::GaussRat;
use super::vars::{self, VarId};
use crate::error::Result;

/// A power product, kept as `(variable, exponent)` pairs sorted by variable
/// with no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono(Vec<(VarId, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Mono(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(VarId, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|&(v, _)| v);
        let mut out: Vec<(VarId, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => out.push((v, e)),
            }
        }
        Mono(out)
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp(&self, v: VarId) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < o.0.len() && o.0[j].0 < v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == v {
                let f = o.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - f)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    pub fn without(&self, v: VarId) -> Mono {
        Mono(self.0.iter().copied().filter(|&(w, _)| w != v).collect())
    }

    pub fn conj(&self) -> Mono {
        Mono::from_pairs(self.0.iter().map(|&(v, e)| (vars::conj(v), e)).collect())
    }

    pub fn pow(&self, k: u32) -> Mono {
        Mono(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }
}

/// Graded lexicographic order; the variable with the smallest id is the most
/// significant one within a degree.
impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        match self.degree().cmp(&o.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (a, b) = (&self.0, &o.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &(v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", vars::display(v))?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, GaussRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    pub fn var(v: VarId) -> Self {
        Poly::monomial(Mono::var(v), GaussRat::one())
    }

    pub fn monomial(m: Mono, c: GaussRat) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &GaussRat)> {
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

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Mono::is_one)
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &GaussRat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.pairs().iter().map(|&(v, _)| v)).collect()
    }

    fn add_term(&mut self, m: Mono, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(n, d)| (n.mul(m), d * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let (small, large) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        let mut r = Poly::zero();
        for (m, c) in &small.terms {
            for (n, d) in &large.terms {
                r.add_term(m.mul(n), c * d);
            }
        }
        r
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.conj(), c.conj())).collect() }
    }

    /// Divides every coefficient by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => {
                let inv = lc.inv().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.inv().ok()?));
        }
        let lc_inv = lc.inv().ok()?;
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(lm)?;
            let qc = c * &lc_inv;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Coefficients of `self` viewed as a polynomial in `v`, indexed by power.
    pub fn coeffs_in(&self, v: VarId) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.exp(v) as usize;
            out[e].add_term(m.without(v), c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: VarId, coeffs: &[Poly]) -> Poly {
        let mut r = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let xe = Mono::from_pairs(vec![(v, e as u32)]);
            for (m, d) in &c.terms {
                r.add_term(m.mul(&xe), d.clone());
            }
        }
        r
    }

    fn lc_in(&self, v: VarId) -> Poly {
        self.coeffs_in(v).pop().unwrap_or_default()
    }

    fn content_in(&self, v: VarId) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v) {
            if c.is_zero() {
                continue;
            }
            g = Poly::gcd(&g, &c);
            if g.is_constant() {
                return Poly::one();
            }
        }
        g
    }

    fn primitive_in(&self, v: VarId) -> Poly {
        let c = self.content_in(v);
        self.div_exact(&c).expect("content divides")
    }

    /// Pseudo-remainder of `f` by `g` with respect to `v`.
    fn prem_in(f: &Poly, g: &Poly, v: VarId) -> Poly {
        let dg = g.degree_in(v);
        let lg = g.lc_in(v);
        let mut r = f.clone();
        while !r.is_zero() && r.degree_in(v) >= dg {
            let dr = r.degree_in(v);
            let lr = r.lc_in(v);
            let shift = Mono::from_pairs(vec![(v, dr - dg)]);
            let t = g.mul(&lr).mul_term(&shift, &GaussRat::one());
            r = r.mul(&lg).sub(&t);
        }
        r
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        if a == b {
            return a.monic();
        }
        let va = a.vars();
        let vb = b.vars();
        let v = *va.union(&vb).next().expect("non-constant");
        if !va.contains(&v) {
            return Poly::gcd(a, &b.content_in(v));
        }
        if !vb.contains(&v) {
            return Poly::gcd(&a.content_in(v), b);
        }
        let ca = a.content_in(v);
        let cb = b.content_in(v);
        let c = Poly::gcd(&ca, &cb);
        let mut f = a.div_exact(&ca).expect("content divides");
        let mut g = b.div_exact(&cb).expect("content divides");
        if f.degree_in(v) < g.degree_in(v) {
            std::mem::swap(&mut f, &mut g);
        }
        loop {
            let r = Poly::prem_in(&f, &g, v);
            if r.is_zero() {
                break;
            }
            if r.degree_in(v) == 0 {
                g = Poly::one();
                break;
            }
            f = g;
            g = r.primitive_in(v);
        }
        let g = if g.is_constant() { Poly::one() } else { g.primitive_in(v) };
        c.mul(&g).monic()
    }

    pub fn eval_with(&self, value: &dyn Fn(VarId) -> Result<GaussRat>) -> Result<GaussRat> {
        let mut cache: BTreeMap<VarId, GaussRat> = BTreeMap::new();
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let x = match cache.get(&v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = value(v)?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                t = &t * &x.pow(e);
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Partial evaluation: variables for which `value` returns `Some` are
    /// replaced by that number.
    pub fn subst_values(&self, value: &dyn Fn(VarId) -> Option<GaussRat>) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in m.pairs() {
                match value(v) {
                    Some(x) => coef = &coef * &x.pow(e),
                    None => rest.push((v, e)),
                }
            }
            r.add_term(Mono::from_pairs(rest), coef);
        }
        r
    }

    /// Substitutes polynomials for variables.
    pub fn subst_polys(&self, value: &dyn Fn(VarId) -> Option<Poly>) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            let mut rest = Vec::new();
            for &(v, e) in m.pairs() {
                match value(v) {
                    Some(p) => t = t.mul(&p.pow(e)),
                    None => rest.push((v, e)),
                }
            }
            r = r.add(&t.mul_term(&Mono::from_pairs(rest), &GaussRat::one()));
        }
        r
    }

    pub fn diff(&self, v: VarId) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let mut pairs: Vec<_> = m.pairs().to_vec();
            for p in pairs.iter_mut() {
                if p.0 == v {
                    p.1 -= 1;
                }
            }
            r.add_term(Mono::from_pairs(pairs), c * &GaussRat::from(e as i64));
        }
        r
    }

    pub(crate) fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let negative = c.is_atomic() && (c.re.is_negative() || (c.re.is_zero() && c.im.is_negative()));
            let shown = if negative { -c } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", shown)?;
            } else if shown.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", shown, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Poly {
        Poly::var(vars::param(name).unwrap())
    }

    #[test]
    fn exact_division_roundtrip() {
        let x = v("poly_x");
        let y = v("poly_y");
        let a = x.add(&y).mul(&x.sub(&Poly::one()));
        let b = x.sub(&Poly::one());
        assert_eq!(a.div_exact(&b).unwrap(), x.add(&y));
        assert!(a.div_exact(&y.add(&Poly::constant(GaussRat::from(3)))).is_none());
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let x = v("poly_x");
        let y = v("poly_y");
        let z = v("poly_z");
        let common = x.mul(&y).sub(&Poly::constant(GaussRat::i()).mul(&z));
        let a = common.mul(&x.add(&z));
        let b = common.mul(&y.sub(&Poly::one())).mul(&common);
        let g = Poly::gcd(&a, &b);
        assert_eq!(g, common.monic());
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let x = v("poly_x");
        let y = v("poly_y");
        assert_eq!(Poly::gcd(&x.add(&Poly::one()), &y), Poly::one());
    }

    #[test]
    fn graded_order_puts_higher_degree_last() {
        let x = vars::param("poly_x").unwrap();
        let y = vars::param("poly_y").unwrap();
        let m1 = Mono::from_pairs(vec![(x, 1)]);
        let m2 = Mono::from_pairs(vec![(y, 2)]);
        assert!(m1 < m2);
        let m3 = Mono::from_pairs(vec![(x, 1), (y, 1)]);
        assert!(m3 < Mono::from_pairs(vec![(x, 2)]));
        assert!(m2 < m3);
    }
}
