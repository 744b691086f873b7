use std::path::PathBuf;

use nilskt::fixture::Fixture;
use nilskt::Error;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn shipped() -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "alg"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn render_parse_fixpoint() {
    for (name, text) in shipped() {
        let f = Fixture::parse(&text).unwrap_or_else(|e| panic!("{}: {}", name, e));
        let again = Fixture::parse(&f.render()).unwrap_or_else(|e| panic!("{} rendered: {}\n{}", name, e, f.render()));
        assert_eq!(f, again, "{}", name);
        assert_eq!(f.render(), again.render());
    }
}

#[test]
fn ex1_shape() {
    let f = Fixture::parse(&std::fs::read_to_string(fixture_dir().join("ex1.alg")).unwrap()).unwrap();
    assert_eq!(f.n, 4);
    assert_eq!(f.params.len(), 5);
    assert_eq!(f.constraints.len(), 1);
    f.setup(false, &Default::default()).unwrap();
}

#[test]
fn validation_outcomes() {
    for (name, text) in shipped() {
        let res = Fixture::parse(&text).unwrap().setup(false, &Default::default());
        if name == "nonintegrable.alg" {
            assert!(matches!(res, Err(Error::IntegrabilityFailure { .. })), "{:?}", res.err());
        } else {
            res.unwrap_or_else(|e| panic!("{}: {}", name, e));
        }
    }
}

#[test]
fn real_coframe_input_rejected() {
    let e = Fixture::parse("dim 4\nd e6 = -1/2*e1^e2\n").unwrap_err();
    assert!(matches!(e, Error::DimensionMismatch { line: 2, .. }), "{:?}", e);
}

#[test]
fn assignments_must_be_declared_and_exact() {
    assert!(matches!(Fixture::parse("dim 1\nassign q = 1\n"), Err(Error::UnknownParameter { .. })));
    assert!(matches!(Fixture::parse("dim 1\nparam q\nassign q = q\n"), Err(Error::UnknownParameter { .. }) | Err(Error::Parse { .. })));
    assert!(matches!(Fixture::parse("dim 1\nparam real q\nassign q = i\n"), Err(Error::Parse { .. })));
}
