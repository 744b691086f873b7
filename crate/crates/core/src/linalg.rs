//! Exact Gauss-Jordan elimination over `ParamExpr`.

use crate::error::{Error, Result};
use crate::scalars::{ParamExpr, Poly};

pub type Matrix = Vec<Vec<ParamExpr>>;

/// Normalization hook applied to every entry produced during elimination
/// (used to reduce modulo parameter constraints).
pub type Reducer<'a> = &'a dyn Fn(&ParamExpr) -> Result<ParamExpr>;

pub fn no_reduce(x: &ParamExpr) -> Result<ParamExpr> {
    Ok(x.clone())
}

#[derive(Clone, Debug)]
pub struct Echelon {
    /// Reduced row echelon form (pivot entries are 1).
    pub rref: Matrix,
    /// Pivot columns in row order.
    pub pivots: Vec<usize>,
    /// Pivot values before normalization; a non-constant one makes the rank
    /// generic rather than pointwise.
    pub pivot_values: Vec<ParamExpr>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// First pivot that depends on parameters, if any.
    pub fn symbolic_pivot(&self) -> Option<&ParamExpr> {
        self.pivot_values.iter().find(|p| !p.is_constant())
    }
}

fn cost(x: &ParamExpr) -> (usize, usize) {
    (x.numer().len() + x.denom().len(), x.to_string().len())
}

pub fn echelon(mat: &Matrix, reduce: Reducer) -> Result<Echelon> {
    let mut a: Matrix = mat.iter().map(|r| r.iter().map(reduce).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut pivot_values = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| (!a[i][c].is_constant(), cost(&a[i][c])));
        let Some(pi) = best else { continue };
        a.swap(r, pi);
        let pv = a[r][c].clone();
        let inv = pv.inv()?;
        for x in a[r].iter_mut() {
            if !x.is_zero() {
                *x = reduce(&(&*x * &inv))?;
            }
        }
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x = reduce(&(&*x - &(&f * y)))?;
                }
            }
        }
        pivots.push(c);
        pivot_values.push(pv);
        r += 1;
    }
    Ok(Echelon { rref: a, pivots, pivot_values })
}

pub fn rank(mat: &Matrix, reduce: Reducer) -> Result<usize> {
    Ok(echelon(mat, reduce)?.rank())
}

/// Basis of the right kernel.
pub fn kernel(mat: &Matrix, cols: usize, reduce: Reducer) -> Result<Vec<Vec<ParamExpr>>> {
    if mat.is_empty() {
        return Ok((0..cols).map(|j| unit(cols, j)).collect());
    }
    let e = echelon(mat, reduce)?;
    let free: Vec<usize> = (0..cols).filter(|c| !e.pivots.contains(c)).collect();
    let mut out = Vec::new();
    for &f in &free {
        let mut v = unit(cols, f);
        for (row, &pc) in e.pivots.iter().enumerate() {
            v[pc] = -&e.rref[row][f];
        }
        out.push(v);
    }
    Ok(out)
}

fn unit(n: usize, j: usize) -> Vec<ParamExpr> {
    let mut v = vec![ParamExpr::zero(); n];
    v[j] = ParamExpr::one();
    v
}

/// A solution of `mat · x = b`, or `None` if the system is inconsistent.
pub fn solve(mat: &Matrix, cols: usize, b: &[ParamExpr], reduce: Reducer) -> Result<Option<Vec<ParamExpr>>> {
    let aug: Matrix = mat
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    if aug.is_empty() {
        return Ok(Some(vec![ParamExpr::zero(); cols]));
    }
    let e = echelon(&aug, reduce)?;
    if e.pivots.contains(&cols) {
        return Ok(None);
    }
    let mut x = vec![ParamExpr::zero(); cols];
    for (row, &pc) in e.pivots.iter().enumerate() {
        x[pc] = e.rref[row][cols].clone();
    }
    Ok(Some(x))
}

/// Inverse of a square matrix; `None` when it is singular.
pub fn inverse(mat: &Matrix, reduce: Reducer) -> Result<Option<Matrix>> {
    let n = mat.len();
    if n <= 6 && mat.iter().flatten().any(|e| !e.is_constant()) {
        return adjugate_inverse(mat, reduce);
    }
    let aug: Matrix = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit(n, i));
            r
        })
        .collect();
    let e = echelon(&aug, reduce)?;
    if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
        return Ok(None);
    }
    Ok(Some(e.rref.into_iter().map(|r| r[n..].to_vec()).collect()))
}

// Clears row denominators, then inverts as adj(M)/det(M) with polynomial arithmetic only.
fn adjugate_inverse(mat: &Matrix, reduce: Reducer) -> Result<Option<Matrix>> {
    let n = mat.len();
    let mut scales = Vec::with_capacity(n);
    let mut m: Vec<Vec<Poly>> = Vec::with_capacity(n);
    for row in mat {
        let mut l = Poly::one();
        for e in row {
            let d = e.denom();
            if !d.is_constant() {
                let g = Poly::gcd(&l, d);
                l = l.mul(&d.div_exact(&g).expect("gcd divides"));
            }
        }
        m.push(row.iter().map(|e| e.numer().mul(&l.div_exact(e.denom()).expect("lcm"))).collect());
        scales.push(l);
    }
    let det = poly_minor(&m, usize::MAX, usize::MAX);
    let det = ParamExpr::from_poly(det);
    if reduce(&det)?.is_zero() {
        return Ok(None);
    }
    let mut out = vec![vec![ParamExpr::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let c = poly_minor(&m, j, i);
            let c = if (i + j) % 2 == 1 { c.neg() } else { c };
            *slot = ParamExpr::from_parts(c.mul(&scales[j]), det.numer().clone())?;
        }
    }
    Ok(Some(out))
}

// Determinant of `m` with row `skip_r` and column `skip_c` removed, by Laplace expansion over column masks.
fn poly_minor(m: &[Vec<Poly>], skip_r: usize, skip_c: usize) -> Poly {
    let rows: Vec<usize> = (0..m.len()).filter(|&r| r != skip_r).collect();
    let cols: Vec<usize> = (0..m.len()).filter(|&c| c != skip_c).collect();
    let k = rows.len();
    // memo[mask] = det of rows[k - popcount(mask)..] against the columns in mask
    let mut memo: Vec<Option<Poly>> = vec![None; 1 << k];
    memo[0] = Some(Poly::one());
    for mask in 1usize..(1 << k) {
        let r = rows[k - mask.count_ones() as usize];
        let mut acc = Poly::zero();
        let mut sign = false;
        for (ci, &c) in cols.iter().enumerate() {
            if mask & (1 << ci) == 0 {
                continue;
            }
            let e = &m[r][c];
            if !e.is_zero() {
                let sub = memo[mask & !(1 << ci)].as_ref().expect("filled");
                if !sub.is_zero() {
                    let t = e.mul(sub);
                    acc = if sign { acc.sub(&t) } else { acc.add(&t) };
                }
            }
            sign = !sign;
        }
        memo[mask] = Some(acc);
    }
    memo[(1 << k) - 1].take().expect("filled")
}

pub fn determinant(mat: &Matrix) -> Result<ParamExpr> {
    let n = mat.len();
    let mut a = mat.clone();
    let mut det = ParamExpr::one();
    for c in 0..n {
        let Some(pi) = (c..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| cost(&a[i][c])) else {
            return Ok(ParamExpr::zero());
        };
        if pi != c {
            a.swap(pi, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det = &det * &pv;
        let inv = pv.inv()?;
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] = &a[i][j] - &t;
            }
        }
    }
    Ok(det)
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = ParamExpr::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc = &acc + &(&row[k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| unit(n, i)).collect()
}

pub fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn mat_conj(a: &Matrix) -> Matrix {
    a.iter().map(|r| r.iter().map(ParamExpr::conj).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn require_inverse(mat: &Matrix, err: impl Fn(String) -> Error) -> Result<Matrix> {
    match inverse(mat, &no_reduce)? {
        Some(m) => Ok(m),
        None => Err(err(determinant(mat)?.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| ParamExpr::int(x)).collect()).collect()
    }

    #[test]
    fn symbolic_inverse() {
        let t = ParamExpr::real_var("t").unwrap();
        let one = ParamExpr::one();
        let a = vec![
            vec![one.clone(), t.checked_div(&(&one + &t)).unwrap(), ParamExpr::zero()],
            vec![t.clone(), ParamExpr::int(2), &t * &t],
            vec![ParamExpr::zero(), one.clone(), &one - &t],
        ];
        let inv = inverse(&a, &no_reduce).unwrap().unwrap();
        let prod = mat_mul(&a, &inv);
        for (i, r) in prod.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                assert_eq!(e.is_one(), i == j);
                assert_eq!(e.is_zero(), i != j);
            }
        }
        let sing = vec![vec![t.clone(), &t * &t], vec![one.clone(), t.clone()]];
        assert!(inverse(&sing, &no_reduce).unwrap().is_none());
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a, &no_reduce).unwrap(), 2);
        let k = kernel(&a, 3, &no_reduce).unwrap();
        assert_eq!(k.len(), 1);
        let prod = mat_mul(&a, &transpose(&k));
        assert!(prod.iter().all(|r| r[0].is_zero()));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a, &no_reduce).unwrap().unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]]), &no_reduce).unwrap().is_none());
        assert_eq!(determinant(&a).unwrap(), ParamExpr::one());
    }

    #[test]
    fn inconsistent_system() {
        let a = m(&[&[1, 1], &[2, 2]]);
        let b = [ParamExpr::int(1), ParamExpr::int(3)];
        assert!(solve(&a, 2, &b, &no_reduce).unwrap().is_none());
    }
}
