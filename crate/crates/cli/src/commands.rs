use serde_json::{json, Map, Value};
use thiserror::Error;

use hodge_wp::family::ModelKind;
use hodge_wp::hodge::{check_hodge_riemann, HodgeFiltration, HodgeRiemannVerdict};
use hodge_wp::hyperkahler::{coordinate_coincidence, hc_membership, hk20_family, HKModel, HcVerdict};
use hodge_wp::model_io::{parse_points, AnyModel, ModelFile, ModelIoError};
use hodge_wp::period::{abelian_check, cy3_sigma, grading_decompose, orbit_filtration, q_compat_check};
use hodge_wp::random::{float_point, rng};
use hodge_wp::scalar::{NumberMode, Scalar, C64};
use hodge_wp::series::TruncatedSeries;
use hodge_wp::wpgeom::oracle::{nabla_fd, PotentialEvaluator};
use hodge_wp::wpgeom::{
    base_curvature_closed_form, geometry_at_with, symmetry_verdict, SignConvention, FdConfig, GeometryOptions, WPPotential, DEFAULT_EPSILON,
};

use crate::report::{matrix, num, tensor, vector, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelIoError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    CheckHodgeRiemann,
    ExpandFamily,
    QuantumCorrection,
    Yukawa,
    WpMetric,
    Curvature,
    NablaR,
    CheckSymmetric,
    Sigma,
    AbelianCheck,
    HkDomain,
    HkCoincidence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckHodgeRiemann => "check-hodge-riemann",
            Command::ExpandFamily => "expand-family",
            Command::QuantumCorrection => "quantum-correction",
            Command::Yukawa => "yukawa",
            Command::WpMetric => "wp-metric",
            Command::Curvature => "curvature",
            Command::NablaR => "nabla-r",
            Command::CheckSymmetric => "check-symmetric",
            Command::Sigma => "sigma",
            Command::AbelianCheck => "abelian-check",
            Command::HkDomain => "hk-domain",
            Command::HkCoincidence => "hk-coincidence",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub tol: f64,
    pub fd_tol: f64,
    pub at: Option<String>,
    pub points: Option<String>,
    pub seed: u64,
}

impl Options {
    pub fn echo(&self) -> Value {
        json!({
            "tol": self.tol,
            "fd_tol": self.fd_tol,
            "at": self.at,
            "points": self.points,
            "seed": self.seed,
        })
    }
}

const SIGN_NOTE: &str = "curvature sign: R(0) = g g + g g - q_{ik,jl} from g = -d d-bar log q (expansion convention); \
                         the alternative statement convention flips the q term";
const NABLA_NOTE: &str = "covariant derivative sign: nabla_r R(0) = -q_{ikr,jl}, nabla_rbar R(0) = -q_{ik,jlr}";
const REAL_NOTE: &str = "real structure: entrywise conjugation composed with the mirror permutation of the basis";

fn at_point<S: Scalar>(opts: &Options, n: usize) -> Result<Vec<S>, CliError> {
    match &opts.at {
        None => Ok(vec![S::zero(); n]),
        Some(text) => {
            let mut pts = parse_points::<S>(text, n)?;
            if pts.len() != 1 {
                return Err(CliError::Usage("--at takes exactly one point".into()));
            }
            Ok(pts.remove(0))
        }
    }
}

/// `--points` as a count (seeded random sample) or an explicit list.
fn sample_points<S: Scalar>(opts: &Options, n: usize, radius: f64, default: usize) -> Result<Vec<Vec<S>>, CliError> {
    let count = match &opts.points {
        None => default,
        Some(text) => match text.trim().parse::<usize>() {
            Ok(c) => c,
            Err(_) => return Ok(parse_points::<S>(text, n)?),
        },
    };
    let mut r = rng(opts.seed);
    Ok((0..count)
        .map(|_| {
            float_point(&mut r, n, radius)
                .into_iter()
                .map(|z| {
                    // snap to a dyadic grid so rational runs stay exact and short
                    let snap = |x: f64| (x * 1024.0).round() / 1024.0;
                    S::from_parts_f64(snap(z.re), snap(z.im))
                })
                .collect()
        })
        .collect())
}

fn radius(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Hyperkahler => 0.6,
        _ => 0.2,
    }
}

fn series_table<S: Scalar>(s: &TruncatedSeries<S>) -> Value {
    let mut out = Map::new();
    for (m, c) in s.terms() {
        let key = if m.anti.order() == 0 {
            format!("{:?}", m.holo.exponents())
        } else {
            format!("{:?};{:?}", m.holo.exponents(), m.anti.exponents())
        };
        let v = if c.data.len() == 1 { num(&c.data[0]) } else { vector(&c.data) };
        out.insert(key, v);
    }
    Value::Object(out)
}

fn need_hk<S: Scalar>(model: &AnyModel<S>, cmd: Command) -> Result<&HKModel<S>, CliError> {
    model.hk().ok_or_else(|| {
        CliError::Usage(format!(
            "`{}` needs a hyperkahler model, got {:?}",
            cmd.name(),
            model.kind()
        ))
    })
}

pub fn run<S: Scalar>(cmd: Command, file: &ModelFile, model: &AnyModel<S>, opts: &Options) -> Result<Report, CliError> {
    let mut report = Report::new(cmd.name(), file, opts.echo());
    report.tolerance("tol", opts.tol);
    report.verdict("number_mode", S::MODE);
    let vhs = model.vhs();
    let n = vhs.n_moduli();
    match cmd {
        Command::CheckHodgeRiemann => {
            let mut pts = vec![at_point::<S>(opts, n)?];
            if opts.points.is_some() {
                pts.extend(sample_points::<S>(opts, n, radius(model.kind()), 0)?);
            }
            let f_ref = HodgeFiltration::reference(vhs.hodge());
            let base = check_hodge_riemann(&f_ref, vhs.polarization(), vhs.hodge(), opts.tol).map_err(compute)?;
            report.check("reference_in_d", base.verdict == HodgeRiemannVerdict::InD);
            report.residual("reference_isotropy", base.isotropy_residual);
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for p in &pts {
                let (_, hr) = orbit_filtration(
                    vhs.interior_operators(),
                    p,
                    &f_ref,
                    vhs.polarization(),
                    vhs.hodge(),
                    opts.tol,
                )
                .map_err(compute)?;
                worst = worst.max(hr.isotropy_residual);
                report.passed &= hr.verdict == HodgeRiemannVerdict::InD;
                rows.push(json!({
                    "point": vector(p),
                    "verdict": hr.verdict,
                    "isotropy_residual": hr.isotropy_residual,
                    "positivity": hr.positivity,
                }));
            }
            report.verdict("at", rows[0]["verdict"].clone());
            report.residual("isotropy", worst);
            report.table("orbit_points", Value::Array(rows));
            report.convention(REAL_NOTE);
        }
        Command::ExpandFamily => {
            if let Some(hk) = model.hk() {
                report.table("hk20_family", series_table(&hk20_family(hk).series));
            }
            report.table("classic", series_table(&vhs.classic_family().series));
            let canonical = vhs.canonical_family().map_err(compute)?;
            report.table("canonical", series_table(&canonical.series));
            let at = at_point::<S>(opts, n)?;
            let value = canonical.eval(&at).map_err(compute)?;
            report.table("canonical_at", vector(&value));
            let fam = vhs.classic_family().series;
            let resid = canonical.series.sub(&fam).map_err(compute)?;
            report.residual("canonical_minus_classic", resid.max_abs());
            report.verdict("order", vhs.order());
        }
        Command::QuantumCorrection => {
            let qc = vhs.quantum_correction().map_err(compute)?;
            report.verdict("strong_is_zero", qc.strong_is_zero);
            report.verdict("weak_is_zero", qc.weak_is_zero);
            report.residual("strong_max", qc.strong.max_abs());
            report.residual("weak_max", qc.weak.max_abs());
            report.table("strong", series_table(&qc.strong));
            let mut weak = Map::new();
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let w = qc.weak_tensor(i, j, k);
                        if w.iter().any(|x| !x.is_negligible(0.0)) {
                            weak.insert(format!("{i},{j},{k}"), vector(&w));
                        }
                    }
                }
            }
            report.table("weak_tensor", Value::Object(weak));
        }
        Command::Yukawa => {
            if vhs.weight() != 3 {
                return Err(CliError::Usage(format!(
                    "`yukawa` needs a weight-3 model, this model has weight {}",
                    vhs.weight()
                )));
            }
            let y = vhs.yukawa().map_err(compute)?;
            let mut base = Map::new();
            let mut corr = Map::new();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        base.insert(format!("{i},{j},{k}"), num(&y.full(i, j, k).constant_term().as_scalar()));
                        let c = y.correction(i, j, k);
                        worst = worst.max(c.max_abs());
                        if !c.is_negligible(0.0) {
                            corr.insert(format!("{i},{j},{k}"), series_table(c));
                        }
                    }
                }
            }
            if let Some(c) = vhs.couplings() {
                let mut diff: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let v = y.full(i, j, k).constant_term().as_scalar() - c[(i * n + j) * n + k].clone();
                            diff = diff.max(v.magnitude());
                        }
                    }
                }
                report.residual("constant_term_vs_couplings", diff);
            }
            report.verdict("correction_is_zero", y.correction_is_zero(opts.tol));
            report.verdict("first_order_correction_is_zero", y.first_order_correction_is_zero(opts.tol));
            report.residual("correction_max", worst);
            report.table("yukawa_at_base", Value::Object(base));
            report.table("correction", Value::Object(corr));
        }
        Command::WpMetric | Command::Curvature | Command::NablaR => {
            let at = at_point::<S>(opts, n)?;
            let p = WPPotential::from_model(vhs).map_err(compute)?;
            let go = GeometryOptions {
                nabla: cmd == Command::NablaR,
                oracle: true,
                fd: FdConfig::default(),
                epsilon: DEFAULT_EPSILON,
            };
            let geo = geometry_at_with(&p, &at, &go).map_err(compute)?;
            let res = geo.residuals.unwrap_or_default();
            report.tolerance("fd_tol", opts.fd_tol);
            report.tolerance("validity_epsilon", DEFAULT_EPSILON);
            report.table("point", vector(&at));
            report.verdict("potential", num(&geo.potential));
            report.table("finite_differences", json!(go.fd));
            report.table("metric", matrix(&geo.metric));
            report.residual("metric", res.metric);
            report.check("metric_oracle", res.metric < opts.fd_tol);
            if cmd != Command::WpMetric {
                report.table("christoffel", tensor(&geo.christoffel));
                report.table("curvature", tensor(&geo.curvature));
                report.residual("christoffel", res.christoffel);
                report.residual("curvature", res.curvature);
                report.residual("kahler_symmetry", geo.kahler_symmetry_defect());
                report.check("curvature_oracle", res.curvature < opts.fd_tol);
                if at.iter().all(|x| x.is_negligible(0.0)) {
                    let closed = base_curvature_closed_form(&p, SignConvention::Expansion);
                    report.residual("curvature_closed_form", closed.max_abs_diff(&geo.curvature));
                }
                let sectional: Vec<Value> = (0..n)
                    .map(|i| {
                        let s = geo.sectional(i);
                        json!({ "re": s.re, "im": s.im })
                    })
                    .collect();
                report.table("holomorphic_sectional", Value::Array(sectional));
                report.convention(SIGN_NOTE);
            }
            if cmd == Command::NablaR {
                if let (Some(a), Some(b)) = (&geo.nabla_r, &geo.nabla_rbar) {
                    report.table("nabla_r", tensor(a));
                    report.table("nabla_rbar", tensor(b));
                }
                report.residual("nabla_r", res.nabla_r);
                report.residual("nabla_rbar", res.nabla_rbar);
                report.verdict("max_nabla", geo.max_nabla());
                report.check(
                    "nabla_oracle",
                    res.nabla_r.unwrap_or(0.0).max(res.nabla_rbar.unwrap_or(0.0)) < opts.fd_tol,
                );
                report.convention(NABLA_NOTE);
            }
        }
        Command::CheckSymmetric => {
            // sampling away from the base runs in floating point
            let float = file.build::<C64>()?;
            let samples = sample_points::<C64>(opts, n, radius(model.kind()), 5)?;
            let sym = symmetry_verdict(float.vhs(), &samples, opts.tol, opts.fd_tol).map_err(compute)?;
            report.tolerance("fd_tol", opts.fd_tol);
            report.verdict("symmetry", sym.verdict);
            report.residual("base_max_nabla", sym.base_max);
            let pot = WPPotential::from_model(float.vhs()).map_err(compute)?;
            let ev = PotentialEvaluator::new(pot.series()).map_err(compute)?;
            let (fa, fb) = nabla_fd(&ev, &vec![C64::new(0.0, 0.0); n], &FdConfig::default());
            report.residual("base_max_nabla_fd", fa.max_abs().max(fb.max_abs()));
            if !sym.sample_fd.is_empty() {
                report.residual(
                    "sample_max_nabla_fd",
                    sym.sample_fd.iter().copied().fold(0.0, f64::max),
                );
                report.residual(
                    "sample_max_nabla_analytic",
                    sym.sample_analytic.iter().copied().fold(0.0, f64::max),
                );
            }
            report.passed &= sym.verdict != hodge_wp::wpgeom::SymmetryVerdict::NotSymmetric;
            let rows: Vec<Value> = samples
                .iter()
                .take(sym.sample_fd.len())
                .enumerate()
                .map(|(i, s)| {
                    json!({
                        "point": vector(s),
                        "analytic": sym.sample_analytic.get(i),
                        "fd": sym.sample_fd.get(i),
                    })
                })
                .collect();
            report.table("samples", Value::Array(rows));
            report.table("finite_differences", json!(FdConfig::default()));
            report.convention(NABLA_NOTE);
        }
        Command::Sigma => {
            if model.kind() != ModelKind::Cy3 {
                return Err(CliError::Usage(format!("`sigma` needs a cy3 model, got {:?}", model.kind())));
            }
            let at = at_point::<S>(opts, n)?;
            let s = cy3_sigma(vhs, &at, opts.tol).map_err(compute)?;
            report.table("point", vector(&at));
            report.table("sigma", matrix(&s.sigma));
            report.table("e", Value::Array(s.e.iter().map(matrix).collect()));
            report.check("preserves_q", s.preserves_q.holds);
            report.check("is_exponential", s.is_exponential.holds);
            report.check("transversal", s.transversal);
            report.check("abelian", s.abelian.abelian);
            report.residual("preserves_q", s.preserves_q.residual);
            report.residual("is_exponential", s.is_exponential.residual);
            report.residual("max_commutator", s.abelian.max_commutator);
        }
        Command::AbelianCheck => {
            let e = vhs.interior_operators();
            let ab = abelian_check(e, opts.tol);
            report.check("abelian", ab.abelian);
            report.residual("max_commutator", ab.max_commutator);
            let f_ref = HodgeFiltration::reference(vhs.hodge());
            let mut worst: f64 = 0.0;
            let mut degrees = Vec::new();
            for (i, x) in e.iter().enumerate() {
                let c = q_compat_check(x, vhs.polarization(), opts.tol);
                worst = worst.max(c.residual);
                report.check(format!("q_compatible_{i}"), c.holds);
                let g = grading_decompose(x, &f_ref, vhs.hodge()).map_err(compute)?;
                degrees.push(json!(g.degrees()));
            }
            report.residual("q_compat", worst);
            report.table("grading_degrees", Value::Array(degrees));
        }
        Command::HkDomain => {
            let hk = need_hk(model, cmd)?;
            let mut pts = vec![at_point::<S>(opts, n)?];
            if opts.points.is_some() {
                pts.extend(sample_points::<S>(opts, n, radius(model.kind()), 0)?);
            }
            let mut rows = Vec::new();
            for p in &pts {
                let m = hc_membership(hk, p, opts.tol).map_err(compute)?;
                report.passed &= m.verdict == HcVerdict::Inside;
                let mut row = json!(m);
                row["point"] = vector(p);
                rows.push(row);
            }
            report.verdict("at", rows[0]["verdict"].clone());
            report.residual("positivity_at", rows[0]["positivity"].clone());
            report.residual("positivity_unsquared_at", rows[0]["positivity_unsquared"].clone());
            report.table("points", Value::Array(rows));
            report.convention(
                "membership is decided by the Hodge-Riemann relations; positivity = 1 - sum|tau|^2 + |sum tau^2|^2/4, \
                 the unsquared variant is reported for comparison",
            );
        }
        Command::HkCoincidence => {
            let hk = need_hk(model, cmd)?;
            let mut pts = vec![at_point::<S>(opts, n)?];
            if opts.points.is_some() {
                pts.extend(sample_points::<S>(opts, n, radius(model.kind()), 0)?);
            }
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for p in &pts {
                let c = coordinate_coincidence(hk, p, opts.tol).map_err(compute)?;
                worst = worst.max(c.residual);
                let ok = if S::MODE == NumberMode::Rational { c.exact } else { c.residual <= opts.tol };
                report.passed &= ok;
                rows.push(json!({
                    "point": vector(p),
                    "orbit_row": vector(&c.orbit_row),
                    "family": vector(&c.family),
                    "residual": c.residual,
                    "exact": c.exact,
                }));
            }
            report.verdict("coincide", report.passed);
            report.residual("max", worst);
            report.table("points", Value::Array(rows));
        }
    }
    Ok(report)
}
