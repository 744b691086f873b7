#![allow(dead_code)]

use std::path::PathBuf;

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nilskt::deformation::VectorForm01;
use nilskt::exterior::{basis, Form, Monomial};
use nilskt::fixture::{Fixture, Setup};
use nilskt::linalg::Matrix;
use nilskt::obstruction::MetricFamily;
use nilskt::scalars::{vars, Assignment, GaussRat, ParamExpr};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> Fixture {
    let text = std::fs::read_to_string(fixture_dir().join(name)).expect("fixture file");
    Fixture::parse(&text).expect("fixture parses")
}

pub fn setup(name: &str) -> Result<Setup, nilskt::Error> {
    fixture(name).setup(false, &Assignment::new())
}

/// Substitutes the fixture's own assignments plus `extra`, keeping only
/// declared names.
pub fn setup_numeric(name: &str, extra: &Assignment) -> Result<Setup, nilskt::Error> {
    let fx = fixture(name);
    let declared: Assignment =
        extra.iter().filter(|(k, _)| fx.params.contains(k) || fx.reals.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    fx.setup(true, &declared)
}

pub fn expr(s: &str) -> ParamExpr {
    ParamExpr::parse(s).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

pub fn mono(h: &[usize], a: &[usize]) -> Monomial {
    Monomial::from_indices(h, a).expect("distinct indices").1
}

fn small(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=4).into())
}

pub fn gauss(rng: &mut ChaCha8Rng) -> GaussRat {
    GaussRat::new(small(rng), small(rng))
}

pub fn nonzero_gauss(rng: &mut ChaCha8Rng) -> GaussRat {
    loop {
        let g = gauss(rng);
        if !g.is_zero() {
            return g;
        }
    }
}

/// Parameters of the first example satisfying its SKT constraint, with
/// `a5` and `a10` nonzero when `generic`.
pub fn ex1_sample(rng: &mut ChaCha8Rng, generic: bool) -> Assignment {
    let mut a = Assignment::new();
    let a2 = gauss(rng);
    let (a5, a10) = if generic { (nonzero_gauss(rng), nonzero_gauss(rng)) } else { (GaussRat::zero(), GaussRat::zero()) };
    let a12 = nonzero_gauss(rng);
    let sum = &(&a2.norm_sqr() + &a5.norm_sqr()) + &a10.norm_sqr();
    // a3 * conj(a12) = sum / 2 makes 2 Re(a3 conj(a12)) = sum
    let a3 = &GaussRat::real(sum / BigRational::from_integer(2.into())) * &a12.conj().inv().unwrap();
    for (k, v) in [("a2", a2), ("a3", a3), ("a5", a5), ("a10", a10), ("a12", a12)] {
        a.insert(k.into(), v);
    }
    a.insert("u".into(), nonzero_gauss(rng));
    a.insert("v".into(), GaussRat::zero());
    a
}

/// A diagonally dominant positive metric in the second example's labels.
pub fn ex2_metric_sample(rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = Assignment::new();
    for j in 1..=4 {
        a.insert(format!("al{}{}", j, j), GaussRat::from(rng.gen_range(2i64..=4)));
        for k in j + 1..=4 {
            let x = BigRational::new(rng.gen_range(-2i64..=2).into(), 4.into());
            let y = BigRational::new(rng.gen_range(-2i64..=2).into(), 4.into());
            a.insert(format!("al{}{}", j, k), GaussRat::new(x, y));
        }
    }
    a
}

pub fn ex2_sample(rng: &mut ChaCha8Rng) -> Assignment {
    let mut a = ex2_metric_sample(rng);
    for name in ["a11", "a22", "a32", "a33", "a34", "a41", "a43", "a44", "b34"] {
        a.insert(name.into(), gauss(rng));
    }
    a
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, diag: bool) -> Vec<Vec<GaussRat>> {
    let mut h = vec![vec![GaussRat::zero(); n]; n];
    for j in 0..n {
        h[j][j] = if diag { GaussRat::real(small(rng)) } else { GaussRat::zero() };
        for k in j + 1..n {
            let z = gauss(rng);
            h[k][j] = z.conj();
            h[j][k] = z;
        }
    }
    h
}

/// `h(t) = 4 I + t H1 + t^2 H2` with random Hermitian `H1`, `H2`.
pub fn random_family(rng: &mut ChaCha8Rng, n: usize) -> MetricFamily {
    let t = ParamExpr::var(vars::curve_var());
    let h1 = random_hermitian(rng, n, true);
    let h2 = random_hermitian(rng, n, true);
    let h: Matrix = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let base = if j == k { ParamExpr::int(4) } else { ParamExpr::zero() };
                    &(&base + &(&t * &ParamExpr::constant(h1[j][k].clone()))) + &(&t.pow(2) * &ParamExpr::constant(h2[j][k].clone()))
                })
                .collect()
        })
        .collect();
    MetricFamily { h }
}

/// `φ(t) = t A + t^2 B` with random exact entries.
pub fn random_curve(rng: &mut ChaCha8Rng, n: usize) -> VectorForm01 {
    let t = ParamExpr::var(vars::curve_var());
    let m: Matrix = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| &(&t * &ParamExpr::constant(gauss(rng))) + &(&t.pow(2) * &ParamExpr::constant(gauss(rng))))
                .collect()
        })
        .collect();
    VectorForm01::from_matrix(&m)
}

/// A random combination of a few basis monomials of one random bidegree.
pub fn random_form(rng: &mut ChaCha8Rng, n: usize) -> Form {
    let p = rng.gen_range(0..=n.min(2));
    let q = rng.gen_range(0..=n.min(2));
    let b = basis(n, p, q);
    let mut f = Form::zero(n);
    for _ in 0..3 {
        let m = b[rng.gen_range(0..b.len())];
        f.add_term(m, ParamExpr::constant(gauss(rng)));
    }
    f
}

/// Every shipped fixture except the non-integrable one, at exact sample
/// values for its parameters.
pub fn numeric_fixtures(rng: &mut ChaCha8Rng) -> Result<Vec<(String, Setup)>, nilskt::Error> {
    let mut out = Vec::new();
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .expect("fixture dir")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".alg") && n != "nonintegrable.alg")
        .collect();
    names.sort();
    for name in names {
        let mut a = ex1_sample(rng, name != "ex1_case1.alg");
        a.extend(ex2_sample(rng));
        out.push((name.clone(), setup_numeric(&name, &a)?));
    }
    Ok(out)
}
