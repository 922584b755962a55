//! Finite-difference oracle for the Weil–Petersson tensors.
//!
//! The metric is evaluated pointwise in binary64 from the potential and its
//! formal first derivatives, `g = q⁻²(∂q ∂̄q − q ∂∂̄q)`. Everything after
//! that (Christoffel symbols, curvature, `∇R`) is obtained by central
//! differences in the real coordinates `t_k = x_k + i y_k`, with
//! `∂_k = ½(∂_x − i∂_y)` and `∂̄_k = ½(∂_x + i∂_y)`.

use serde::Serialize;

use super::Tensor;
use crate::linalg::Matrix;
use crate::scalar::{Scalar, C64};
use crate::series::{SeriesError, TruncatedSeries, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdConfig {
    /// Step for derivatives of the metric.
    pub step: f64,
    /// Step for derivatives of the metric inside the `∇R` oracle, where the
    /// curvature is differenced once more and its noise gets amplified.
    pub nabla_inner_step: f64,
    /// Outer step when differentiating the curvature itself.
    pub nabla_step: f64,
    /// One level of Richardson extrapolation on every difference quotient.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-4,
            nabla_inner_step: 1e-3,
            nabla_step: 2e-3,
            richardson: true,
        }
    }
}

/// Polynomial in `t, t̄` with binary64 coefficients.
#[derive(Clone, Debug)]
struct Poly {
    terms: Vec<(Vec<u16>, Vec<u16>, C64)>,
    max_exp: usize,
}

impl Poly {
    fn new<S: Scalar>(s: &TruncatedSeries<S>) -> Self {
        let terms: Vec<_> = s
            .terms()
            .map(|(m, c)| {
                (
                    m.holo.exponents().to_vec(),
                    m.anti.exponents().to_vec(),
                    c.as_scalar().to_c64(),
                )
            })
            .collect();
        let max_exp = terms
            .iter()
            .flat_map(|(h, a, _)| h.iter().chain(a))
            .copied()
            .max()
            .unwrap_or(0) as usize;
        Poly { terms, max_exp }
    }

    fn eval(&self, powers: &[Vec<C64>], conj_powers: &[Vec<C64>]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (h, a, c) in &self.terms {
            let mut w = *c;
            for i in 0..h.len() {
                w *= powers[i][h[i] as usize] * conj_powers[i][a[i] as usize];
            }
            acc += w;
        }
        acc
    }
}

/// Pointwise evaluator of the potential and the metric it induces.
#[derive(Clone, Debug)]
pub struct PotentialEvaluator {
    n: usize,
    q: Poly,
    dq: Vec<Poly>,
    dbq: Vec<Poly>,
    ddq: Vec<Poly>,
}

impl PotentialEvaluator {
    pub fn new<S: Scalar>(q: &TruncatedSeries<S>) -> Result<Self, SeriesError> {
        let n = q.num_vars();
        let mut dq = Vec::with_capacity(n);
        let mut dbq = Vec::with_capacity(n);
        let mut ddq = Vec::with_capacity(n * n);
        for i in 0..n {
            dq.push(Poly::new(&q.derivative(i, VarKind::Holo)?));
            dbq.push(Poly::new(&q.derivative(i, VarKind::Anti)?));
        }
        for i in 0..n {
            let di = q.derivative(i, VarKind::Holo)?;
            for j in 0..n {
                ddq.push(Poly::new(&di.derivative(j, VarKind::Anti)?));
            }
        }
        Ok(PotentialEvaluator {
            n,
            q: Poly::new(q),
            dq,
            dbq,
            ddq,
        })
    }

    pub fn n_moduli(&self) -> usize {
        self.n
    }

    fn powers(&self, t: &[C64]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let e = self.q.max_exp;
        let table = |z: C64| {
            let mut v = Vec::with_capacity(e + 1);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..=e {
                v.push(p);
                p *= z;
            }
            v
        };
        (
            t.iter().map(|&z| table(z)).collect(),
            t.iter().map(|&z| table(z.conj())).collect(),
        )
    }

    pub fn potential(&self, t: &[C64]) -> C64 {
        let (p, cp) = self.powers(t);
        self.q.eval(&p, &cp)
    }

    /// `g_{ij̄}(t)`, row-major.
    pub fn metric(&self, t: &[C64]) -> Vec<C64> {
        let n = self.n;
        let (p, cp) = self.powers(t);
        let q = self.q.eval(&p, &cp);
        let dq: Vec<C64> = self.dq.iter().map(|d| d.eval(&p, &cp)).collect();
        let dbq: Vec<C64> = self.dbq.iter().map(|d| d.eval(&p, &cp)).collect();
        let mut g = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let ddq = self.ddq[i * n + j].eval(&p, &cp);
                g.push((dq[i] * dbq[j] - q * ddq) / (q * q));
            }
        }
        g
    }
}

fn shifted(t: &[C64], dir: usize, h: f64) -> Vec<C64> {
    let n = t.len();
    let mut s = t.to_vec();
    if dir < n {
        s[dir] += C64::new(h, 0.0);
    } else {
        s[dir - n] += C64::new(0.0, h);
    }
    s
}

fn combine(a: &[C64], b: &[C64], ca: f64, cb: f64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * ca + y * cb).collect()
}

/// Central first difference along real direction `dir`.
fn d1<F: Fn(&[C64]) -> Vec<C64>>(f: &F, t: &[C64], dir: usize, h: f64, richardson: bool) -> Vec<C64> {
    let quotient = |h: f64| {
        combine(&f(&shifted(t, dir, h)), &f(&shifted(t, dir, -h)), 0.5 / h, -0.5 / h)
    };
    if richardson {
        combine(&quotient(h / 2.0), &quotient(h), 4.0 / 3.0, -1.0 / 3.0)
    } else {
        quotient(h)
    }
}

/// Central mixed second difference along real directions `a`, `b`.
fn d2<F: Fn(&[C64]) -> Vec<C64>>(f: &F, t: &[C64], a: usize, b: usize, h: f64, richardson: bool) -> Vec<C64> {
    let quotient = |h: f64| {
        let pp = f(&shifted(&shifted(t, a, h), b, h));
        let pm = f(&shifted(&shifted(t, a, h), b, -h));
        let mp = f(&shifted(&shifted(t, a, -h), b, h));
        let mm = f(&shifted(&shifted(t, a, -h), b, -h));
        let s = 0.25 / (h * h);
        pp.iter()
            .zip(&pm)
            .zip(mp.iter().zip(&mm))
            .map(|((pp, pm), (mp, mm))| (pp - pm - mp + mm) * s)
            .collect::<Vec<_>>()
    };
    if richardson {
        combine(&quotient(h / 2.0), &quotient(h), 4.0 / 3.0, -1.0 / 3.0)
    } else {
        quotient(h)
    }
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `∂_k f` and `∂̄_k f`.
fn wirtinger<F: Fn(&[C64]) -> Vec<C64>>(f: &F, t: &[C64], k: usize, h: f64, rich: bool) -> (Vec<C64>, Vec<C64>) {
    let n = t.len();
    let dx = d1(f, t, k, h, rich);
    let dy = d1(f, t, n + k, h, rich);
    let holo = dx.iter().zip(&dy).map(|(x, y)| (x - I * y) * 0.5).collect();
    let anti = dx.iter().zip(&dy).map(|(x, y)| (x + I * y) * 0.5).collect();
    (holo, anti)
}

/// `∂_k ∂̄_l f = ¼(f_{x_k x_l} + f_{y_k y_l} + i f_{x_k y_l} − i f_{y_k x_l})`.
fn mixed<F: Fn(&[C64]) -> Vec<C64>>(f: &F, t: &[C64], k: usize, l: usize, h: f64, rich: bool) -> Vec<C64> {
    let n = t.len();
    let xx = d2(f, t, k, l, h, rich);
    let yy = d2(f, t, n + k, n + l, h, rich);
    let xy = d2(f, t, k, n + l, h, rich);
    let yx = d2(f, t, n + k, l, h, rich);
    (0..xx.len())
        .map(|a| (xx[a] + yy[a] + I * xy[a] - I * yx[a]) * 0.25)
        .collect()
}

/// Oracle values at one point.
#[derive(Clone, Debug)]
pub struct FdGeometry {
    pub metric: Vec<C64>,
    pub christoffel: Tensor<C64>,
    pub curvature: Tensor<C64>,
    /// `Γ̄^q̄_{r̄ j̄}`, indexed `[q][r][j]`.
    pub christoffel_bar: Tensor<C64>,
}

fn inverse(n: usize, g: &[C64]) -> Matrix<C64> {
    Matrix::from_fn(n, n, |i, j| g[i * n + j])
        .inverse(1e-300)
        .unwrap_or_else(|| Matrix::from_fn(n, n, |_, _| C64::new(f64::NAN, f64::NAN)))
}

pub fn curvature_fd(ev: &PotentialEvaluator, t: &[C64], cfg: &FdConfig) -> FdGeometry {
    let n = ev.n;
    let f = |s: &[C64]| ev.metric(s);
    let g = ev.metric(t);
    let h = inverse(n, &g);
    let ginv = |p: usize, q: usize| h[(q, p)];
    let mut dg = Vec::with_capacity(n);
    let mut dbg = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = wirtinger(&f, t, k, cfg.step, cfg.richardson);
        dg.push(a);
        dbg.push(b);
    }
    let christoffel = Tensor::from_fn(n, 3, |x| {
        let (p, k, i) = (x[0], x[1], x[2]);
        (0..n).map(|q| ginv(p, q) * dg[k][i * n + q]).sum()
    });
    let christoffel_bar = Tensor::from_fn(n, 3, |x| {
        let (q, r, j) = (x[0], x[1], x[2]);
        (0..n).map(|p| ginv(p, q) * dbg[r][p * n + j]).sum()
    });
    let dd: Vec<Vec<C64>> = (0..n * n)
        .map(|kl| mixed(&f, t, kl / n, kl % n, cfg.step, cfg.richardson))
        .collect();
    let curvature = Tensor::from_fn(n, 4, |x| {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let mut v = dd[k * n + l][i * n + j];
        for p in 0..n {
            for q in 0..n {
                v -= ginv(p, q) * dg[k][i * n + q] * dbg[l][p * n + j];
            }
        }
        v
    });
    FdGeometry {
        metric: g,
        christoffel,
        curvature,
        christoffel_bar,
    }
}

/// `(∇_r R, ∇_r̄ R)` by differencing the oracle curvature.
pub fn nabla_fd(ev: &PotentialEvaluator, t: &[C64], cfg: &FdConfig) -> (Tensor<C64>, Tensor<C64>) {
    let n = ev.n;
    let inner = FdConfig {
        step: cfg.nabla_inner_step,
        ..*cfg
    };
    let base = curvature_fd(ev, t, &inner);
    let r_of = |s: &[C64]| curvature_fd(ev, s, &inner).curvature.data().to_vec();
    let mut dr = Vec::with_capacity(n);
    let mut dbr = Vec::with_capacity(n);
    for r in 0..n {
        let (a, b) = wirtinger(&r_of, t, r, cfg.nabla_step, cfg.richardson);
        dr.push(Tensor::from_flat(n, 4, a));
        dbr.push(Tensor::from_flat(n, 4, b));
    }
    let rr = &base.curvature;
    let gam = &base.christoffel;
    let gbar = &base.christoffel_bar;
    let holo = Tensor::from_fn(n, 5, |x| {
        let (r, i, j, k, l) = (x[0], x[1], x[2], x[3], x[4]);
        let mut v = *dr[r].get(&[i, j, k, l]);
        for q in 0..n {
            v -= gam.get(&[q, r, i]) * rr.get(&[q, j, k, l]) + gam.get(&[q, r, k]) * rr.get(&[i, j, q, l]);
        }
        v
    });
    let anti = Tensor::from_fn(n, 5, |x| {
        let (r, i, j, k, l) = (x[0], x[1], x[2], x[3], x[4]);
        let mut v = *dbr[r].get(&[i, j, k, l]);
        for q in 0..n {
            v -= gbar.get(&[q, r, j]) * rr.get(&[i, q, k, l]) + gbar.get(&[q, r, l]) * rr.get(&[i, j, k, q]);
        }
        v
    });
    (holo, anti)
}
