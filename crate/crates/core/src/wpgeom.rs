//! Weil–Petersson geometry from the potential `q(t) = Q̃(Ω^c(t), Ω̄^c(t))`.
//!
//! The metric is `g_{ij̄} = −∂_i ∂_j̄ log q`. Away from the base point the
//! (polynomial) potential is recentered exactly, so every tensor below is a
//! Taylor coefficient of `log(q / q(c))` at the evaluation point `c`.
//!
//! Index conventions: `curvature[i][j][k][l] = R_{i j̄ k l̄}`,
//! `christoffel[p][k][i] = Γ^p_{ki}`, `nabla_r[r][i][j][k][l] = ∇_r R_{i j̄ k l̄}`.

use serde::Serialize;
use thiserror::Error;

use crate::family::{FamilyError, VHSModel};
use crate::linalg::Matrix;
use crate::scalar::{Scalar, C64};
use crate::series::{Coeff, Monomial, MultiIndex, SeriesError, Shape, TruncatedSeries, VarKind};

pub mod oracle;

pub use oracle::FdConfig;

/// Smallest admissible value of `q` at an evaluation point.
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WpError {
    #[error("q = {value:e} at the requested point is below the validity threshold {epsilon:e}")]
    OutsideValidity { value: f64, epsilon: f64 },
    #[error("the potential is not an exact polynomial; only the base point can be evaluated")]
    NonPolynomial,
    #[error("truncation order {found} is too small, need at least {needed}")]
    OrderTooSmall { found: usize, needed: usize },
    #[error("the metric is singular at the requested point")]
    SingularMetric,
    #[error("point has {got} coordinates, the model has {expected} moduli")]
    PointDimension { expected: usize, got: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Dense tensor with every index running over `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    n: usize,
    rank: usize,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Tensor {
            n,
            rank,
            data: vec![S::zero(); n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let mut idx = vec![0; rank];
        let mut data = Vec::with_capacity(n.pow(rank as u32));
        for flat in 0..n.pow(rank as u32) {
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            data.push(f(&idx));
        }
        Tensor { n, rank, data }
    }

    pub(crate) fn from_flat(n: usize, rank: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), n.pow(rank as u32));
        Tensor { n, rank, data }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.flat(idx)]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> Tensor<C64> {
        Tensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(Scalar::to_c64).collect(),
        }
    }

    /// Largest entrywise distance to another tensor, in binary64.
    pub fn max_abs_diff<T: Scalar>(&self, other: &Tensor<T>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.to_c64() - b.to_c64()).norm())
            .fold(0.0, f64::max)
    }
}

/// The potential `q(t)` of a model.
#[derive(Clone, Debug)]
pub struct WPPotential<S> {
    q: TruncatedSeries<S>,
    n: usize,
}

impl<S: Scalar> WPPotential<S> {
    /// Pairs the canonical family with its conjugate. The series is kept at
    /// an order high enough to hold the whole polynomial.
    pub fn from_model(model: &VHSModel<S>) -> Result<Self, WpError> {
        let fam = model.canonical_family()?.series;
        let deg = fam.max_degree().unwrap_or(0);
        let order = model.order().max(2 * deg);
        let fam = fam.with_max_order(order);
        let hodge = model.hodge();
        let d = model.dim();
        let bar = fam.conj().map_coeffs(Shape::Vector(d), |c| {
            // series conj already conjugated the entries; permute by the real structure
            Coeff::vector((0..d).map(|b| c.data[hodge.conjugation()[b]].clone()).collect())
        });
        let pol = model.polarization();
        let q = fam.pair_with(&bar, |u, v| pol.qtilde(u, v))?;
        Ok(WPPotential {
            q,
            n: model.n_moduli(),
        })
    }

    pub fn from_series(q: TruncatedSeries<S>) -> Self {
        let n = q.num_vars();
        WPPotential { q, n }
    }

    pub fn series(&self) -> &TruncatedSeries<S> {
        &self.q
    }

    pub fn n_moduli(&self) -> usize {
        self.n
    }

    pub fn is_polynomial(&self) -> bool {
        self.q.is_polynomial()
    }

    pub fn value_at(&self, t: &[S]) -> Result<S, WpError> {
        Ok(self.q.eval(t)?.as_scalar())
    }

    fn d(&self, holo: &[usize], anti: &[usize]) -> S {
        self.q
            .derivative_at_origin(
                &MultiIndex::from_indices(self.n, holo),
                &MultiIndex::from_indices(self.n, anti),
            )
            .as_scalar()
    }

    /// `q_{ik, j̄l̄} = ∂_i ∂_k ∂_j̄ ∂_l̄ q (0)`.
    pub fn q22(&self, i: usize, k: usize, j: usize, l: usize) -> S {
        self.d(&[i, k], &[j, l])
    }

    /// `q_{ikr, j̄l̄}`.
    pub fn q32(&self, i: usize, k: usize, r: usize, j: usize, l: usize) -> S {
        self.d(&[i, k, r], &[j, l])
    }

    /// `q_{ik, j̄l̄r̄}`.
    pub fn q23(&self, i: usize, k: usize, j: usize, l: usize, r: usize) -> S {
        self.d(&[i, k], &[j, l, r])
    }
}

pub fn wp_potential<S: Scalar>(model: &VHSModel<S>) -> Result<WPPotential<S>, WpError> {
    WPPotential::from_model(model)
}

/// Matrix series `g_{ij̄}(t) = −∂_i ∂_j̄ log q`, truncated at `order − 2`.
pub fn wp_metric_series<S: Scalar>(
    p: &WPPotential<S>,
    order: usize,
) -> Result<TruncatedSeries<S>, WpError> {
    if order < 2 {
        return Err(WpError::OrderTooSmall {
            found: order,
            needed: 2,
        });
    }
    let n = p.n;
    let log = p.q.truncate(order).log_unit()?;
    let mut terms: std::collections::BTreeMap<Monomial, Vec<S>> = Default::default();
    for i in 0..n {
        for j in 0..n {
            let gij = log
                .derivative(i, VarKind::Holo)?
                .derivative(j, VarKind::Anti)?
                .neg();
            for (m, c) in gij.terms() {
                let e = terms
                    .entry(m.clone())
                    .or_insert_with(|| vec![S::zero(); n * n]);
                e[i * n + j] = c.as_scalar();
            }
        }
    }
    Ok(TruncatedSeries::from_terms(
        n,
        order - 2,
        Shape::Matrix(n, n),
        terms.into_iter().map(|(m, v)| {
            (
                m,
                Coeff {
                    shape: Shape::Matrix(n, n),
                    data: v,
                },
            )
        }),
    ))
}

/// Which sign the closed-form base-point tensors carry in front of the
/// potential coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Obtained by differentiating `log q`:
    /// `R(0) = δδ + δδ − q_{ik,j̄l̄}`, `∇_r R(0) = −q_{ikr,j̄l̄}`.
    Expansion,
    /// The opposite sign in front of the `q` coefficients.
    Statement,
}

impl SignConvention {
    fn sign<S: Scalar>(self) -> S {
        match self {
            SignConvention::Expansion => -S::one(),
            SignConvention::Statement => S::one(),
        }
    }
}

fn delta<S: Scalar>(a: usize, b: usize) -> S {
    if a == b {
        S::one()
    } else {
        S::zero()
    }
}

/// `R_{ij̄kl̄}(0)` read from the potential coefficients.
pub fn base_curvature_closed_form<S: Scalar>(p: &WPPotential<S>, conv: SignConvention) -> Tensor<S> {
    let s = conv.sign::<S>();
    Tensor::from_fn(p.n, 4, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        delta::<S>(i, j) * delta(k, l) + delta::<S>(i, l) * delta(k, j) + s.clone() * p.q22(i, k, j, l)
    })
}

/// `(∇_r R(0), ∇_r̄ R(0))` read from the potential coefficients.
pub fn base_nabla_closed_form<S: Scalar>(
    p: &WPPotential<S>,
    conv: SignConvention,
) -> (Tensor<S>, Tensor<S>) {
    let s = conv.sign::<S>();
    let holo = Tensor::from_fn(p.n, 5, |x| s.clone() * p.q32(x[1], x[3], x[0], x[2], x[4]));
    let anti = Tensor::from_fn(p.n, 5, |x| s.clone() * p.q23(x[1], x[3], x[2], x[4], x[0]));
    (holo, anti)
}

/// `∇R(0)` and `∇̄R(0)` of a model, in the expansion convention.
pub fn nabla_curvature_at_base<S: Scalar>(model: &VHSModel<S>) -> Result<(Tensor<S>, Tensor<S>), WpError> {
    let p = WPPotential::from_model(model)?;
    if p.q.max_order() < 5 {
        return Err(WpError::OrderTooSmall {
            found: p.q.max_order(),
            needed: 5,
        });
    }
    Ok(base_nabla_closed_form(&p, SignConvention::Expansion))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryOptions {
    /// Also compute `∇R` and `∇̄R`.
    pub nabla: bool,
    /// Compare against the finite-difference oracle.
    pub oracle: bool,
    pub fd: FdConfig,
    pub epsilon: f64,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        GeometryOptions {
            nabla: true,
            oracle: true,
            fd: FdConfig::default(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Maximum absolute analytic-minus-oracle differences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OracleResiduals {
    pub metric: f64,
    pub christoffel: f64,
    pub curvature: f64,
    pub nabla_r: Option<f64>,
    pub nabla_rbar: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CurvatureReport<S> {
    pub point: Vec<S>,
    pub potential: S,
    pub metric: Matrix<S>,
    pub christoffel: Tensor<S>,
    pub curvature: Tensor<S>,
    pub nabla_r: Option<Tensor<S>>,
    pub nabla_rbar: Option<Tensor<S>>,
    pub residuals: Option<OracleResiduals>,
    pub fd: FdConfig,
}

impl<S: Scalar> CurvatureReport<S> {
    /// Largest violation of `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄}` and of
    /// `conj R_{ij̄kl̄} = R_{jīlk̄}`.
    pub fn kahler_symmetry_defect(&self) -> f64 {
        kahler_symmetry_defect(&self.curvature)
    }

    /// Holomorphic sectional curvature `R_{iīiī} / g_{iī}²` along `∂_i`.
    pub fn sectional(&self, i: usize) -> C64 {
        let g = self.metric[(i, i)].to_c64();
        self.curvature.get(&[i, i, i, i]).to_c64() / (g * g)
    }

    pub fn max_nabla(&self) -> Option<f64> {
        Some(self.nabla_r.as_ref()?.max_abs().max(self.nabla_rbar.as_ref()?.max_abs()))
    }
}

pub fn kahler_symmetry_defect<S: Scalar>(r: &Tensor<S>) -> f64 {
    let n = r.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r.get(&[i, j, k, l]).to_c64();
                    worst = worst
                        .max((v - r.get(&[k, j, i, l]).to_c64()).norm())
                        .max((v - r.get(&[i, l, k, j]).to_c64()).norm())
                        .max((v.conj() - r.get(&[j, i, l, k]).to_c64()).norm());
                }
            }
        }
    }
    worst
}

/// Geometry at `point` with default options.
pub fn geometry_at<S: Scalar>(model: &VHSModel<S>, point: &[S]) -> Result<CurvatureReport<S>, WpError> {
    let p = WPPotential::from_model(model)?;
    geometry_at_with(&p, point, &GeometryOptions::default())
}

/// Taylor data of `log(q / q(c))` around a point.
struct LocalLog<S> {
    n: usize,
    log: TruncatedSeries<S>,
}

impl<S: Scalar> LocalLog<S> {
    fn new(p: &WPPotential<S>, point: &[S], order: usize, epsilon: f64) -> Result<(Self, S), WpError> {
        let n = p.n;
        if point.len() != n {
            return Err(WpError::PointDimension {
                expected: n,
                got: point.len(),
            });
        }
        if p.q.max_order() < order {
            return Err(WpError::OrderTooSmall {
                found: p.q.max_order(),
                needed: order,
            });
        }
        let at_base = point.iter().all(|x| x.is_zero());
        let local = if at_base {
            p.q.truncate(order)
        } else {
            if !p.q.is_polynomial() {
                return Err(WpError::NonPolynomial);
            }
            p.q.recenter_truncated(point, order)?
        };
        let q0 = local.constant_term().as_scalar();
        let v = q0.to_c64();
        if !(v.re > epsilon) {
            return Err(WpError::OutsideValidity {
                value: v.re,
                epsilon,
            });
        }
        let scaled = local.scale(&(S::one() / q0.clone()));
        // pin the constant term to exactly one (float division may be off by an ulp)
        let one = TruncatedSeries::one(n, order);
        let scaled = scaled
            .sub(&TruncatedSeries::constant(n, order, scaled.constant_term()))?
            .add(&one)?;
        Ok((
            LocalLog {
                n,
                log: scaled.log_unit()?,
            },
            q0,
        ))
    }

    /// `∂^holo ∂̄^anti log q` at the point.
    fn d(&self, holo: &[usize], anti: &[usize]) -> S {
        self.log
            .derivative_at_origin(
                &MultiIndex::from_indices(self.n, holo),
                &MultiIndex::from_indices(self.n, anti),
            )
            .as_scalar()
    }
}

/// Analytic metric, Christoffel symbols, curvature and (optionally) its
/// covariant derivatives at `point`, with oracle residuals.
pub fn geometry_at_with<S: Scalar>(
    p: &WPPotential<S>,
    point: &[S],
    opts: &GeometryOptions,
) -> Result<CurvatureReport<S>, WpError> {
    let n = p.n;
    let order = if opts.nabla { 5 } else { 4 };
    let (ll, q0) = LocalLog::new(p, point, order, opts.epsilon)?;
    let m = |a: &[usize], b: &[usize]| -ll.d(a, b);

    let g = Matrix::from_fn(n, n, |i, j| m(&[i], &[j]));
    let h = g.inverse(0.0).ok_or(WpError::SingularMetric)?;
    // g^{p q̄} = h[q][p]
    let ginv = |pp: usize, qq: usize| h[(qq, pp)].clone();
    let dg = Tensor::from_fn(n, 3, |x| m(&[x[1], x[0]], &[x[2]])); // [k][i][j] = ∂_k g_{ij̄}
    let dbg = Tensor::from_fn(n, 3, |x| m(&[x[1]], &[x[2], x[0]])); // [l][i][j] = ∂̄_l g_{ij̄}

    let christoffel = Tensor::from_fn(n, 3, |x| {
        let (pp, k, i) = (x[0], x[1], x[2]);
        (0..n).fold(S::zero(), |acc, q| acc + ginv(pp, q) * dg.get(&[k, i, q]).clone())
    });
    let correction = |k: usize, i: usize, l: usize, j: usize| {
        let mut acc = S::zero();
        for pp in 0..n {
            for q in 0..n {
                acc = acc + ginv(pp, q) * dg.get(&[k, i, q]).clone() * dbg.get(&[l, pp, j]).clone();
            }
        }
        acc
    };
    let curvature = Tensor::from_fn(n, 4, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        m(&[i, k], &[j, l]) - correction(k, i, l, j)
    });

    let (nabla_r, nabla_rbar) = if opts.nabla {
        let (a, b) = nabla_tensors(n, &m, &h, &dg, &dbg, &christoffel, &curvature);
        (Some(a), Some(b))
    } else {
        (None, None)
    };

    let residuals = if opts.oracle {
        let ev = oracle::PotentialEvaluator::new(&p.q)?;
        let t: Vec<C64> = point.iter().map(Scalar::to_c64).collect();
        let fd = oracle::curvature_fd(&ev, &t, &opts.fd);
        let metric_res = g
            .to_c64()
            .entries()
            .iter()
            .zip(&ev.metric(&t))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let mut res = OracleResiduals {
            metric: metric_res,
            christoffel: christoffel.max_abs_diff(&fd.christoffel),
            curvature: curvature.max_abs_diff(&fd.curvature),
            nabla_r: None,
            nabla_rbar: None,
        };
        if let (Some(a), Some(b)) = (&nabla_r, &nabla_rbar) {
            let (fa, fb) = oracle::nabla_fd(&ev, &t, &opts.fd);
            res.nabla_r = Some(a.max_abs_diff(&fa));
            res.nabla_rbar = Some(b.max_abs_diff(&fb));
        }
        Some(res)
    } else {
        None
    };

    Ok(CurvatureReport {
        point: point.to_vec(),
        potential: q0,
        metric: g,
        christoffel,
        curvature,
        nabla_r,
        nabla_rbar,
        residuals,
        fd: opts.fd,
    })
}

/// Covariant derivatives of the curvature from third derivatives of `g`.
fn nabla_tensors<S: Scalar>(
    n: usize,
    m: &impl Fn(&[usize], &[usize]) -> S,
    h: &Matrix<S>,
    dg: &Tensor<S>,
    dbg: &Tensor<S>,
    christoffel: &Tensor<S>,
    curvature: &Tensor<S>,
) -> (Tensor<S>, Tensor<S>) {
    let ginv = |pp: usize, qq: usize| h[(qq, pp)].clone();
    // ∂ of the inverse: ∂H = −H (∂G) H
    let dinv = |dgm: &Matrix<S>| -&(&(h * dgm) * h);
    let holo_dg = |r: usize| Matrix::from_fn(n, n, |i, j| dg.get(&[r, i, j]).clone());
    let anti_dg = |r: usize| Matrix::from_fn(n, n, |i, j| dbg.get(&[r, i, j]).clone());
    let dh: Vec<Matrix<S>> = (0..n).map(|r| dinv(&holo_dg(r))).collect();
    let dbh: Vec<Matrix<S>> = (0..n).map(|r| dinv(&anti_dg(r))).collect();

    // conjugate Christoffel Γ̄^q̄_{r̄ j̄} = g^{p q̄} ∂̄_r g_{p j̄}
    let cbar = Tensor::from_fn(n, 3, |x| {
        let (q, r, j) = (x[0], x[1], x[2]);
        (0..n).fold(S::zero(), |acc, pp| acc + ginv(pp, q) * dbg.get(&[r, pp, j]).clone())
    });

    let holo = Tensor::from_fn(n, 5, |x| {
        let (r, i, j, k, l) = (x[0], x[1], x[2], x[3], x[4]);
        let mut d = m(&[i, k, r], &[j, l]);
        for pp in 0..n {
            for q in 0..n {
                d = d - dh[r][(q, pp)].clone() * dg.get(&[k, i, q]).clone() * dbg.get(&[l, pp, j]).clone()
                    - ginv(pp, q) * m(&[i, k, r], &[q]) * dbg.get(&[l, pp, j]).clone()
                    - ginv(pp, q) * dg.get(&[k, i, q]).clone() * m(&[pp, r], &[j, l]);
            }
        }
        for q in 0..n {
            d = d - christoffel.get(&[q, r, i]).clone() * curvature.get(&[q, j, k, l]).clone()
                - christoffel.get(&[q, r, k]).clone() * curvature.get(&[i, j, q, l]).clone();
        }
        d
    });
    let anti = Tensor::from_fn(n, 5, |x| {
        let (r, i, j, k, l) = (x[0], x[1], x[2], x[3], x[4]);
        let mut d = m(&[i, k], &[j, l, r]);
        for pp in 0..n {
            for q in 0..n {
                d = d - dbh[r][(q, pp)].clone() * dg.get(&[k, i, q]).clone() * dbg.get(&[l, pp, j]).clone()
                    - ginv(pp, q) * m(&[i, k], &[q, r]) * dbg.get(&[l, pp, j]).clone()
                    - ginv(pp, q) * dg.get(&[k, i, q]).clone() * m(&[pp], &[j, l, r]);
            }
        }
        for q in 0..n {
            d = d - cbar.get(&[q, r, j]).clone() * curvature.get(&[i, q, k, l]).clone()
                - cbar.get(&[q, r, l]).clone() * curvature.get(&[i, j, k, q]).clone();
        }
        d
    });
    (holo, anti)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVerdict {
    SymmetricAtBase,
    SymmetricOnSamples,
    NotSymmetric,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub verdict: SymmetryVerdict,
    /// `max |∇R(0)|`, both types.
    pub base_max: f64,
    /// Analytic `max |∇R|` at each sample.
    pub sample_analytic: Vec<f64>,
    /// Finite-difference `max |∇R|` at each sample.
    pub sample_fd: Vec<f64>,
}

/// Decides `∇R = 0` at the base point and on sample points.
///
/// `tol` bounds the analytic values, `fd_tol` the finite-difference ones.
pub fn symmetry_verdict<S: Scalar>(
    model: &VHSModel<S>,
    samples: &[Vec<S>],
    tol: f64,
    fd_tol: f64,
) -> Result<SymmetryReport, WpError> {
    let p = WPPotential::from_model(model)?;
    let opts = GeometryOptions {
        oracle: false,
        ..Default::default()
    };
    let base = geometry_at_with(&p, &vec![S::zero(); p.n], &opts)?;
    let base_max = base.max_nabla().unwrap_or(0.0);
    let mut report = SymmetryReport {
        verdict: SymmetryVerdict::NotSymmetric,
        base_max,
        sample_analytic: Vec::new(),
        sample_fd: Vec::new(),
    };
    if base_max >= tol {
        return Ok(report);
    }
    let ev = oracle::PotentialEvaluator::new(&p.q)?;
    let mut all = true;
    for s in samples {
        let r = geometry_at_with(&p, s, &opts)?;
        let a = r.max_nabla().unwrap_or(0.0);
        let t: Vec<C64> = s.iter().map(Scalar::to_c64).collect();
        let (fa, fb) = oracle::nabla_fd(&ev, &t, &opts.fd);
        let f = fa.max_abs().max(fb.max_abs());
        all &= a < tol && f < fd_tol;
        report.sample_analytic.push(a);
        report.sample_fd.push(f);
    }
    report.verdict = if !samples.is_empty() && all {
        SymmetryVerdict::SymmetricOnSamples
    } else {
        SymmetryVerdict::SymmetricAtBase
    };
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct ProjectionReport<S> {
    pub curvature: Tensor<S>,
    /// Distance to the curvature from `log q`.
    pub residual: f64,
    /// Distance between the closed forms of the two sign conventions and
    /// the curvature from `log q`, at the base point.
    pub expansion_residual: f64,
    pub statement_residual: f64,
}

/// Curvature from `R = g g + g g − Q̃(D_kD_iΩ, D_lD_j Ω̄) / Q̃(Ω, Ω̄)` with
/// `D_iΩ = ∂_iΩ + K_iΩ`, `K_i = −∂_i log q`, evaluated at `point`.
pub fn curvature_via_projection<S: Scalar>(
    model: &VHSModel<S>,
    point: &[S],
) -> Result<ProjectionReport<S>, WpError> {
    let n = model.n_moduli();
    let p = WPPotential::from_model(model)?;
    let opts = GeometryOptions {
        nabla: false,
        oracle: false,
        ..Default::default()
    };
    let geo = geometry_at_with(&p, point, &opts)?;
    let (ll, q0) = LocalLog::new(&p, point, 3, DEFAULT_EPSILON)?;

    let fam = model.canonical_family()?.series;
    let fam = if point.iter().all(|x| x.is_zero()) {
        fam
    } else {
        fam.recenter_truncated(point, fam.max_order())?
    };
    let dom = |holo: &[usize]| -> Vec<S> {
        fam.derivative_at_origin(&MultiIndex::from_indices(n, holo), &MultiIndex::zero(n))
            .data
    };
    let axpy = |a: &S, x: &[S], y: &[S]| -> Vec<S> {
        x.iter().zip(y).map(|(xi, yi)| a.clone() * xi.clone() + yi.clone()).collect()
    };
    let omega = dom(&[]);
    let k1: Vec<S> = (0..n).map(|i| -ll.d(&[i], &[])).collect();
    let d_omega: Vec<Vec<S>> = (0..n).map(|i| axpy(&k1[i], &omega, &dom(&[i]))).collect();
    let g = &geo.metric;
    let h = g.inverse(0.0).ok_or(WpError::SingularMetric)?;
    let gamma = |k: usize, i: usize, j: usize| -> S {
        // Γ^k_{ij} = g^{k l̄} ∂_i g_{j l̄}
        (0..n).fold(S::zero(), |acc, l| acc + h[(l, k)].clone() * -ll.d(&[i, j], &[l]))
    };
    let dd_omega = |j: usize, i: usize| -> Vec<S> {
        // ∂_j D_iΩ = ∂_j∂_iΩ + (∂_j K_i) Ω + K_i ∂_jΩ
        let djki = -ll.d(&[i, j], &[]);
        let mut v = axpy(&djki, &omega, &dom(&[i, j]));
        v = axpy(&k1[i], &dom(&[j]), &v);
        for k in 0..n {
            v = axpy(&-gamma(k, i, j), &d_omega[k], &v);
        }
        axpy(&k1[j], &d_omega[i], &v)
    };
    let dd: Vec<Vec<Vec<S>>> = (0..n).map(|k| (0..n).map(|i| dd_omega(k, i)).collect()).collect();
    let pol = model.polarization();
    let hodge = model.hodge();
    let norm = pol.hermitian(hodge, &omega, &omega);
    debug_assert!((norm.clone() - q0).is_negligible(1e-9));
    let curvature = Tensor::from_fn(n, 4, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        g[(i, j)].clone() * g[(k, l)].clone() + g[(i, l)].clone() * g[(k, j)].clone()
            - pol.hermitian(hodge, &dd[k][i], &dd[l][j]) / norm.clone()
    });
    let residual = curvature.max_abs_diff(&geo.curvature);
    let (expansion_residual, statement_residual) = if point.iter().all(|x| x.is_zero()) && p.q.max_order() >= 4 {
        (
            base_curvature_closed_form(&p, SignConvention::Expansion).max_abs_diff(&geo.curvature),
            base_curvature_closed_form(&p, SignConvention::Statement).max_abs_diff(&geo.curvature),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ProjectionReport {
        curvature,
        residual,
        expansion_residual,
        statement_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::build_cy3_model;
    use crate::scalar::Cq;
    use num::{One, Zero};

    fn q(v: i64) -> Cq {
        Cq::from_i64(v)
    }

    #[test]
    fn zero_coupling_potential_is_one_minus_norm() {
        let m = build_cy3_model(1, vec![Cq::zero()], 6).unwrap();
        let p = wp_potential(&m).unwrap();
        assert_eq!(p.series().len(), 2);
        assert_eq!(p.series().scalar_coeff(&[0], &[0]), Cq::one());
        assert_eq!(p.series().scalar_coeff(&[1], &[1]), q(-1));
    }

    #[test]
    fn one_modulus_potential_coefficients() {
        let a = q(3);
        let m = build_cy3_model(1, vec![a.clone()], 6).unwrap();
        let p = wp_potential(&m).unwrap();
        let s = p.series();
        assert_eq!(s.scalar_coeff(&[2], &[2]), a.clone() * a.clone() / q(4));
        assert_eq!(s.scalar_coeff(&[3], &[3]), -(a.clone() * a) / q(36));
        assert!(p.is_polynomial());
    }

    #[test]
    fn metric_series_starts_at_identity() {
        let m = build_cy3_model(1, vec![Cq::zero()], 6).unwrap();
        let g = wp_metric_series(&wp_potential(&m).unwrap(), 6).unwrap();
        assert_eq!(g.constant_term().data, vec![Cq::one()]);
        // −∂∂̄ log(1 − |t|²) = (1 − |t|²)^{-2}
        assert_eq!(g.coeff_at(&[1], &[1]).data, vec![q(2)]);
        assert_eq!(g.coeff_at(&[2], &[2]).data, vec![q(3)]);
    }

    #[test]
    fn zero_coupling_curvature_is_two_at_base() {
        let m = build_cy3_model(1, vec![Cq::zero()], 6).unwrap();
        let r = geometry_at(&m, &[Cq::zero()]).unwrap();
        assert_eq!(r.metric, Matrix::identity(1));
        assert_eq!(r.christoffel.max_abs(), 0.0);
        assert_eq!(*r.curvature.get(&[0, 0, 0, 0]), q(2));
        let res = r.residuals.unwrap();
        assert!(res.curvature < 1e-6, "{res:?}");
        assert!(res.nabla_r.unwrap() < 1e-6, "{res:?}");
    }

    #[test]
    fn refuses_points_outside_validity() {
        let m = build_cy3_model(1, vec![Cq::zero()], 6).unwrap();
        let err = geometry_at(&m, &[q(1)]).unwrap_err();
        assert!(matches!(err, WpError::OutsideValidity { .. }));
    }

    #[test]
    fn projection_route_matches_at_base() {
        let m = build_cy3_model(1, vec![q(2)], 6).unwrap();
        let r = curvature_via_projection(&m, &[Cq::zero()]).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.expansion_residual, 0.0);
    }
}
