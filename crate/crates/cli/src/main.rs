use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use serde_json::{json, Value};

use nilskt::exterior::Form;
use nilskt::fixture::{self, Fixture, Setup};
use nilskt::hermitian;
use nilskt::obstruction::{self, MetricFamily, Verdict};
use nilskt::scalars::{Assignment, ParamExpr};
use nilskt::{deformation, Error};

mod pretty;

const SCOPE: &str = "invariant subcomplex";

#[derive(Parser)]
#[command(name = "nilskt", version, about = "SKT metrics and deformations on nilpotent Lie algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Aligned text instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Directory used to resolve relative fixture paths.
    #[arg(long, global = true)]
    fixture_dir: Option<PathBuf>,
    /// Numeric value for a declared parameter, `name=value`. Repeatable.
    #[arg(long = "assign", global = true, value_name = "NAME=VALUE")]
    assign: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a fixture and check integrability and the Jacobi identity.
    Validate { fixture: PathBuf },
    /// SKT, astheno-Kähler and Gauduchon defects of the metric.
    Skt { fixture: PathBuf },
    /// Bott-Chern cohomology of the invariant forms.
    Cohomology {
        fixture: PathBuf,
        #[arg(long, value_name = "P,Q")]
        pq: Option<String>,
    },
    /// Structure equations of the deformed coframe.
    Deform { fixture: PathBuf },
    /// First-order obstruction to SKT metrics along the curve.
    Obstruct { fixture: PathBuf },
    /// Squared norm of the deformed SKT defect over a grid of t values (CSV).
    Sweep {
        fixture: PathBuf,
        #[arg(long, value_name = "A,B,STEPS")]
        grid: String,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Validate { .. } => "validate",
            Cmd::Skt { .. } => "skt",
            Cmd::Cohomology { .. } => "cohomology",
            Cmd::Deform { .. } => "deform",
            Cmd::Obstruct { .. } => "obstruct",
            Cmd::Sweep { .. } => "sweep",
        }
    }

    fn fixture(&self) -> &Path {
        match self {
            Cmd::Validate { fixture }
            | Cmd::Skt { fixture }
            | Cmd::Cohomology { fixture, .. }
            | Cmd::Deform { fixture }
            | Cmd::Obstruct { fixture }
            | Cmd::Sweep { fixture, .. } => fixture,
        }
    }
}

enum Output {
    Report(Value, u8),
    Csv(String),
}

#[derive(Debug)]
enum Failure {
    Engine(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.cmd.name();
    match run(&cli) {
        Ok(Output::Report(mut v, code)) => {
            v["schema"] = json!(1);
            v["command"] = json!(name);
            emit(&v, cli.pretty);
            ExitCode::from(code)
        }
        Ok(Output::Csv(s)) => {
            print!("{}", s);
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, message) = match &f {
                Failure::Engine(e) => (e.code(), e.to_string()),
                Failure::Io(m) => ("Io", m.clone()),
                Failure::Usage(m) => ("Usage", m.clone()),
            };
            let v = json!({ "schema": 1, "command": name, "error": { "code": code, "message": message } });
            emit(&v, cli.pretty);
            ExitCode::from(1)
        }
    }
}

fn emit(v: &Value, pretty: bool) {
    if pretty {
        print!("{}", pretty::render(v));
    } else {
        println!("{}", serde_json::to_string(v).expect("serializable"));
    }
}

fn load(cli: &Cli) -> Result<(Fixture, Assignment), Failure> {
    let path = cli.cmd.fixture();
    let path = match (&cli.fixture_dir, path.is_relative()) {
        (Some(dir), true) => dir.join(path),
        _ => path.to_path_buf(),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {}", path.display(), e)))?;
    let fx = Fixture::parse(&text)?;
    let mut extra = Assignment::new();
    for a in &cli.assign {
        let (k, v) = a.split_once('=').ok_or_else(|| Failure::Usage(format!("expected name=value, got `{}`", a)))?;
        let k = k.trim();
        if !fx.params.iter().chain(&fx.reals).any(|p| p == k) {
            return Err(Error::UnknownParameter { name: k.to_string(), line: 0, col: 0 }.into());
        }
        let val = fixture::parse_scalar(v)?
            .as_constant()
            .ok_or_else(|| Failure::Usage(format!("value for `{}` must be a Gaussian rational", k)))?;
        extra.insert(k.to_string(), val);
    }
    Ok((fx, extra))
}

fn setup(fx: &Fixture, extra: &Assignment) -> Result<Setup, Failure> {
    Ok(fx.setup(true, extra)?)
}

fn form_json(f: &Form) -> Value {
    json!(f.render())
}

fn forms_json(fs: &[Form]) -> Value {
    Value::Array(fs.iter().map(form_json).collect())
}

fn mode(s: &Setup) -> &'static str {
    let symbolic = !s.alg.params().is_empty() || !s.alg.reals().is_empty() || s.metric.assumed_positive();
    if symbolic {
        "symbolic"
    } else {
        "numeric"
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let (fx, extra) = load(cli)?;
    match &cli.cmd {
        Cmd::Validate { .. } => validate(&fx, &extra),
        Cmd::Skt { .. } => skt(&fx, &extra),
        Cmd::Cohomology { pq, .. } => cohomology(&fx, &extra, pq.as_deref()),
        Cmd::Deform { .. } => deform(&fx, &extra),
        Cmd::Obstruct { .. } => obstruct(&fx, &extra),
        Cmd::Sweep { grid, .. } => sweep(&fx, &extra, grid),
    }
}

fn validate(fx: &Fixture, extra: &Assignment) -> Result<Output, Failure> {
    match fx.setup(true, extra) {
        Ok(s) => {
            let v = json!({
                "valid": true,
                "n": fx.n,
                "params": fx.params,
                "reals": fx.reals,
                "constraints": s.alg.constraints().iter().map(|c| c.poly.to_string()).collect::<Vec<_>>(),
                "structure": forms_json(s.alg.d_eta()),
                "metric_assumed_positive": s.metric.assumed_positive(),
                "has_phi": s.phi.is_some(),
                "has_family": s.family.is_some(),
                "mode": mode(&s),
            });
            Ok(Output::Report(v, 0))
        }
        Err(e @ (Error::IntegrabilityFailure { .. } | Error::JacobiFailure { .. })) => {
            let v = json!({ "valid": false, "reason": { "code": e.code(), "message": e.to_string() } });
            Ok(Output::Report(v, 2))
        }
        Err(e) => Err(e.into()),
    }
}

fn skt(fx: &Fixture, extra: &Assignment) -> Result<Output, Failure> {
    let s = setup(fx, extra)?;
    let alg = &s.alg;
    let skt = alg.reduce_form(&s.metric.skt_defect(alg))?;
    let ak = alg.reduce_form(&s.metric.astheno_defect(alg))?;
    let gd = alg.reduce_form(&s.metric.gauduchon_defect(alg))?;
    let v = json!({
        "omega": form_json(&s.metric.fundamental_form()),
        "skt_defect": form_json(&skt),
        "astheno_kahler_defect": form_json(&ak),
        "gauduchon_defect": form_json(&gd),
        "skt": skt.is_zero(),
        "astheno_kahler": ak.is_zero(),
        "gauduchon": gd.is_zero(),
        "metric_assumed_positive": s.metric.assumed_positive(),
        "mode": mode(&s),
    });
    Ok(Output::Report(v, 0))
}

fn parse_pq(s: &str, n: usize) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--pq expects p,q with 0 <= p,q <= {}, got `{}`", n, s));
    let (p, q) = s.split_once(',').ok_or_else(bad)?;
    let p: usize = p.trim().parse().map_err(|_| bad())?;
    let q: usize = q.trim().parse().map_err(|_| bad())?;
    if p > n || q > n {
        return Err(bad());
    }
    Ok((p, q))
}

fn cohomology(fx: &Fixture, extra: &Assignment, pq: Option<&str>) -> Result<Output, Failure> {
    let s = setup(fx, extra)?;
    let n = s.alg.n();
    let degrees: Vec<(usize, usize)> = match pq {
        Some(pq) => vec![parse_pq(pq, n)?],
        None => (0..=n).flat_map(|p| (0..=n).map(move |q| (p, q))).collect(),
    };
    let mut groups = Vec::new();
    for (p, q) in degrees {
        let c = hermitian::bc_cohomology(&s.alg, &s.metric, p, q)?;
        groups.push(json!({
            "p": p,
            "q": q,
            "dim": c.dim,
            "dim_closed": c.dim_closed,
            "rank_ddbar": c.rank_image,
            "dim_harmonic": c.dim_harmonic,
            "harmonic_basis": forms_json(&c.harmonic_basis),
            "generic_rank": c.generic,
        }));
    }
    let v = json!({
        "scope": SCOPE,
        "groups": groups,
        "metric_assumed_positive": s.metric.assumed_positive(),
        "mode": mode(&s),
    });
    Ok(Output::Report(v, 0))
}

fn need_phi(s: &Setup) -> Result<&deformation::VectorForm01, Failure> {
    s.phi.as_ref().ok_or(Failure::Engine(Error::MissingBlock("phi")))
}

fn deform(fx: &Fixture, extra: &Assignment) -> Result<Output, Failure> {
    let s = setup(fx, extra)?;
    let phi = need_phi(&s)?;
    let alg = &s.alg;
    let ds = deformation::deformed_structure(alg, phi)?;
    let d_theta: Vec<Form> = ds.d_theta.iter().map(|f| alg.reduce_form(f)).collect::<nilskt::Result<_>>()?;
    let defect: Vec<Form> = ds.defect.iter().map(|f| alg.reduce_form(f)).collect::<nilskt::Result<_>>()?;
    let integrable = defect.iter().all(Form::is_zero);
    let mut v = json!({
        "phi": phi.render(),
        "d_theta": forms_json(&d_theta),
        "defect_02": forms_json(&defect),
        "integrable": integrable,
        "mode": mode(&s),
    });
    if phi.components().iter().any(|c| c.terms().any(|(_, x)| x.vars().contains(&nilskt::scalars::vars::curve_var()))) {
        let cd = deformation::mc_defect_on_curve(alg, phi)?;
        v["first_order_defect"] = forms_json(&cd.first_order);
        v["linearized_defect"] = forms_json(&cd.linearized);
    }
    Ok(Output::Report(v, if integrable { 0 } else { 2 }))
}

fn obstruct(fx: &Fixture, extra: &Assignment) -> Result<Output, Failure> {
    let s = setup(fx, extra)?;
    let curve = need_phi(&s)?;
    let alg = &s.alg;
    let fam = s.family.clone().unwrap_or_else(|| MetricFamily::constant(&s.metric));
    let metric0 = fam.metric_at_zero()?;
    let phi1 = curve.derivative_at_zero()?;
    let obs = obstruction::first_order_obstruction(alg, &metric0.fundamental_form(), &phi1)?;
    let rep = obstruction::class_test(alg, Some(&metric0), &obs.form)?;
    let mut v = json!({
        "scope": SCOPE,
        "phi_prime_0": phi1.render(),
        "del_contract_del_omega": form_json(&obs.x),
        "obstruction": form_json(&rep.obstruction),
        "verdict": rep.verdict.as_str(),
        "del_residue": form_json(&rep.del_residue),
        "delbar_residue": form_json(&rep.delbar_residue),
        "mode": mode(&s),
        "metric_assumed_positive": metric0.assumed_positive(),
    });
    if let Some(ex) = rep.exact {
        v["ddbar_exact"] = json!(ex);
    }
    if let Some(w) = &rep.witness {
        v["witness"] = form_json(w);
    }
    if let Some(hp) = &rep.harmonic_projection {
        v["harmonic_projection"] = form_json(hp);
    }
    if !rep.condition.is_empty() {
        let terms: Vec<String> = rep.condition.iter().map(ParamExpr::to_string).collect();
        v["condition"] = json!(terms);
        v["summary"] = json!(format!("obstructed unless {} = 0", terms.join(" = ")));
    }
    if let Some(w) = &obs.mc_warning {
        v["warning"] = json!(w);
    }
    if s.family.is_some() {
        let fc = obstruction::family_condition(alg, curve, &fam)?;
        v["ddbar_omega_prime"] = form_json(&fc.ddbar_omega_prime);
        v["family_residual"] = form_json(&fc.residual);
    }
    let code = match rep.verdict {
        Verdict::NoObstruction => 0,
        Verdict::Obstructed => 2,
        Verdict::NotClosed => {
            return Err(Error::PreconditionFailure(format!("obstruction form is not closed: {}", rep.obstruction)).into())
        }
    };
    Ok(Output::Report(v, code))
}

fn parse_grid(s: &str) -> Result<Vec<BigRational>, Failure> {
    let bad = || Failure::Usage(format!("--grid expects a,b,steps, got `{}`", s));
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let real = |x: &str| -> Result<BigRational, Failure> {
        let c = fixture::parse_scalar(x)?.as_constant().filter(|c| c.is_real()).ok_or_else(bad)?;
        Ok(c.re)
    };
    let (a, b) = (real(parts[0])?, real(parts[1])?);
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 {
        return Ok(vec![a]);
    }
    let step = (&b - &a) / BigRational::from_integer(steps.into());
    Ok((0..=steps).map(|k| &a + &step * BigRational::from_integer(k.into())).collect())
}

fn sweep(fx: &Fixture, extra: &Assignment, grid: &str) -> Result<Output, Failure> {
    let s = setup(fx, extra)?;
    let curve = need_phi(&s)?;
    let fam = s.family.as_ref().ok_or(Failure::Engine(Error::MissingBlock("family")))?;
    let rows = obstruction::sweep(&s.alg, curve, fam, &parse_grid(grid)?)?;
    Ok(Output::Csv(obstruction::sweep_csv(&rows)))
}
