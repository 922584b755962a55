//! Matrix side of the period domain: the Lie algebra `g` of `Q`, its Hodge
//! grading, unipotent exponentials, and the CY3 period matrix `σ(t)`.
//!
//! Matrices act on row vectors of reference coordinates, matching the
//! interior operators of [`VHSModel`]: the image of basis vector `b_a` is
//! row `a`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::family::{FamilyError, ModelKind, VHSModel};
use crate::hodge::{
    check_hodge_riemann, HodgeData, HodgeError, HodgeFiltration, HodgeRiemannReport, PolarizationForm,
};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::series::{Coeff, Monomial, MultiIndex, SeriesError, Shape, TruncatedSeries, VarKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("matrix is not nilpotent (X^{dim} has entries up to {residual:e})")]
    NotNilpotent { dim: usize, residual: f64 },
    #[error("operators do not commute (max |[E_i, E_j]| = {max_commutator:e})")]
    NonCommuting { max_commutator: f64 },
    #[error("the model carries a strong quantum correction; σ(t) is only defined without one")]
    StrongCorrection,
    #[error("σ(t) is defined for CY3 models only")]
    NotCy3,
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("matrix shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Outcome of a matrix identity check.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Check {
    pub holds: bool,
    pub residual: f64,
}

impl Check {
    fn of<S: Scalar>(m: &Matrix<S>, tol: f64) -> Self {
        Check {
            holds: m.is_zero(tol),
            residual: m.max_abs(),
        }
    }
}

/// `Xᵀ M + M X = 0` with `M` the Gram matrix of `Q`.
pub fn q_compat_check<S: Scalar>(x: &Matrix<S>, pol: &PolarizationForm<S>, tol: f64) -> Check {
    let m = pol.gram_q();
    Check::of(&(&(&x.transpose() * m) + &(m * x)), tol)
}

/// A matrix split into its Hodge-graded pieces `g^{k,−k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedLieElement<S> {
    /// The matrix in the adapted basis.
    pub matrix: Matrix<S>,
    /// Nonzero components, keyed by `k`.
    pub components: BTreeMap<i64, Matrix<S>>,
}

impl<S: Scalar> GradedLieElement<S> {
    /// Degrees with a nonzero component.
    pub fn degrees(&self) -> Vec<i64> {
        self.components.keys().copied().collect()
    }

    pub fn is_pure(&self, k: i64) -> bool {
        self.components.keys().all(|&d| d == k)
    }

    pub fn component(&self, k: i64) -> Matrix<S> {
        self.components
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.matrix.rows(), self.matrix.cols()))
    }
}

/// Decomposes `x` into pieces mapping `H^{r,n−r}` to `H^{r+k,n−r−k}`,
/// relative to the adapted basis of `f_ref`.
pub fn grading_decompose<S: Scalar>(
    x: &Matrix<S>,
    f_ref: &HodgeFiltration<S>,
    hodge: &HodgeData,
) -> Result<GradedLieElement<S>, PeriodError> {
    let d = hodge.total_dim();
    if x.shape() != (d, d) {
        return Err(PeriodError::Shape(format!("expected {d}x{d}, got {:?}", x.shape())));
    }
    let b = f_ref.basis();
    let binv = b.inverse(0.0).ok_or(HodgeError::SingularBasis)?;
    // column action Xᵀ rewritten in the adapted basis, then back to rows
    let adapted = (&(&binv * &x.transpose()) * b).transpose();
    let mut components: BTreeMap<i64, Matrix<S>> = BTreeMap::new();
    for a in 0..d {
        for c in 0..d {
            let v = &adapted[(a, c)];
            if v.is_zero() {
                continue;
            }
            let k = hodge.type_of_index(c) as i64 - hodge.type_of_index(a) as i64;
            let comp = components.entry(k).or_insert_with(|| Matrix::zeros(d, d));
            comp[(a, c)] = v.clone();
        }
    }
    Ok(GradedLieElement {
        matrix: adapted,
        components,
    })
}

/// `exp(X)` for nilpotent `X`, as a finite sum. Nilpotency is verified.
pub fn exp_nilpotent<S: Scalar>(x: &Matrix<S>, tol: f64) -> Result<Matrix<S>, PeriodError> {
    let d = x.rows();
    if x.cols() != d {
        return Err(PeriodError::Shape(format!("{:?} is not square", x.shape())));
    }
    let mut power = Matrix::identity(d);
    let mut sum = Matrix::identity(d);
    for k in 1..=d {
        power = (&power * x).scale(&S::from_ratio(1, k as i64));
        sum = &sum + &power;
    }
    // power now holds X^d / d!
    let top = &power * x;
    if !power.is_zero(tol) || !top.is_zero(tol) {
        return Err(PeriodError::NotNilpotent {
            dim: d,
            residual: power.max_abs(),
        });
    }
    Ok(sum)
}

/// Pairwise commutators of a family of matrices.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AbelianReport {
    pub abelian: bool,
    pub max_commutator: f64,
}

pub fn abelian_check<S: Scalar>(e: &[Matrix<S>], tol: f64) -> AbelianReport {
    let mut worst: f64 = 0.0;
    let mut abelian = true;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let c = e[i].commutator(&e[j]);
            abelian &= c.is_zero(tol);
            worst = worst.max(c.max_abs());
        }
    }
    AbelianReport {
        abelian,
        max_commutator: worst,
    }
}

fn linear_combination<S: Scalar>(e: &[Matrix<S>], params: &[S]) -> Result<Matrix<S>, PeriodError> {
    let d = e.first().map_or(0, Matrix::rows);
    if e.len() != params.len() {
        return Err(PeriodError::ParameterCount {
            expected: e.len(),
            got: params.len(),
        });
    }
    Ok(e.iter()
        .zip(params)
        .fold(Matrix::zeros(d, d), |acc, (m, p)| &acc + &m.scale(p)))
}

/// A point `exp(Σ τ_i E_i)` of the unipotent orbit through a reference filtration.
#[derive(Clone, Debug)]
pub struct NilpotentOrbitPoint<S> {
    pub parameters: Vec<S>,
    pub matrix: Matrix<S>,
    pub filtration: HodgeFiltration<S>,
}

impl<S: Scalar> NilpotentOrbitPoint<S> {
    /// Block upper triangular with identity diagonal blocks.
    pub fn is_unipotent(&self, hodge: &HodgeData, tol: f64) -> bool {
        let d = hodge.total_dim();
        (0..d).all(|a| {
            (0..d).all(|b| {
                let (pa, pb) = (hodge.type_of_index(a), hodge.type_of_index(b));
                let v = &self.matrix[(a, b)];
                if pa == pb {
                    let expect = if a == b { S::one() } else { S::zero() };
                    (v.clone() - expect).is_negligible(tol)
                } else {
                    pb < pa || v.is_negligible(tol)
                }
            })
        })
    }
}

/// `exp(Σ params_i E_i)` applied to `f_ref`, with its Hodge–Riemann verdict.
pub fn orbit_filtration<S: Scalar>(
    e: &[Matrix<S>],
    params: &[S],
    f_ref: &HodgeFiltration<S>,
    pol: &PolarizationForm<S>,
    hodge: &HodgeData,
    tol: f64,
) -> Result<(NilpotentOrbitPoint<S>, HodgeRiemannReport), PeriodError> {
    let ab = abelian_check(e, tol);
    if !ab.abelian {
        return Err(PeriodError::NonCommuting {
            max_commutator: ab.max_commutator,
        });
    }
    let x = linear_combination(e, params)?;
    let matrix = exp_nilpotent(&x, tol)?;
    let filtration = f_ref.transformed_by_rows(&matrix);
    let report = check_hodge_riemann(&filtration, pol, hodge, tol)?;
    Ok((
        NilpotentOrbitPoint {
            parameters: params.to_vec(),
            matrix,
            filtration,
        },
        report,
    ))
}

/// `σ(t)` and the checks attached to it.
#[derive(Clone, Debug)]
pub struct SigmaReport<S> {
    pub sigma: Matrix<S>,
    /// Degree-one coefficients of `σ`.
    pub e: Vec<Matrix<S>>,
    /// `σᵀ M σ = M`.
    pub preserves_q: Check,
    /// `σ(t) = exp(Σ t_i E_i)`.
    pub is_exponential: Check,
    /// `∂_i Ω^cc(t)` lies in the span of the first `N + 1` rows.
    pub transversal: bool,
    /// `[E_i, E_j] = 0`.
    pub abelian: AbelianReport,
}

impl<S: Scalar> SigmaReport<S> {
    pub fn all_hold(&self) -> bool {
        self.preserves_q.holds && self.is_exponential.holds && self.transversal && self.abelian.abelian
    }
}

/// Matrix series of `σ(t)` in block form
///
/// ```text
/// [ 1  tᵀ  ½tᵀA(t)  ⅙tᵀA(t)t ]
/// [ 0  I   A(t)     ½A(t)t   ]
/// [ 0  0   I        t        ]
/// [ 0  0   0        1        ]
/// ```
///
/// with `A(t) = Σ t_i A_i`.
pub fn sigma_series<S: Scalar>(model: &VHSModel<S>) -> Result<TruncatedSeries<S>, PeriodError> {
    if model.kind() != ModelKind::Cy3 {
        return Err(PeriodError::NotCy3);
    }
    let n = model.n_moduli();
    let d = 2 * n + 2;
    let c = model.couplings().ok_or(PeriodError::NotCy3)?;
    let cijk = |i: usize, j: usize, k: usize| c[(i * n + j) * n + k].clone();
    let mut terms: BTreeMap<MultiIndex, Matrix<S>> = BTreeMap::new();
    let mut add = |idx: &[usize], row: usize, col: usize, v: S| {
        let key = MultiIndex::from_indices(n, idx);
        let m = terms.entry(key).or_insert_with(|| Matrix::zeros(d, d));
        m[(row, col)] = m[(row, col)].clone() + v;
    };
    for a in 0..d {
        add(&[], a, a, S::one());
    }
    let half = S::from_ratio(1, 2);
    let sixth = S::from_ratio(1, 6);
    for i in 0..n {
        add(&[i], 0, 1 + i, S::one());
        add(&[i], 1 + n + i, d - 1, S::one());
        for j in 0..n {
            for k in 0..n {
                // ½ tᵀ A(t): entry k is ½ Σ_{ij} t_j t_i (A_i)_{jk}
                add(&[i, j], 0, 1 + n + k, half.clone() * cijk(i, j, k));
                // A(t) block
                add(&[i], 1 + j, 1 + n + k, cijk(i, j, k));
                // ½ A(t) t
                add(&[i, k], 1 + j, d - 1, half.clone() * cijk(i, j, k));
                // ⅙ tᵀ A(t) t
                add(&[i, j, k], 0, d - 1, sixth.clone() * cijk(i, j, k));
            }
        }
    }
    Ok(TruncatedSeries::from_terms(
        n,
        3,
        Shape::Matrix(d, d),
        terms
            .into_iter()
            .map(|(idx, m)| (Monomial::new(idx, MultiIndex::zero(n)), Coeff::matrix(&m))),
    ))
}

/// Evaluates `σ(t)` and checks it against `Q`, the exponential of its
/// linear part, and transversality of the classic family.
pub fn cy3_sigma<S: Scalar>(model: &VHSModel<S>, t: &[S], tol: f64) -> Result<SigmaReport<S>, PeriodError> {
    if model.has_extra_coeffs() {
        return Err(PeriodError::StrongCorrection);
    }
    let n = model.n_moduli();
    if t.len() != n {
        return Err(PeriodError::ParameterCount {
            expected: n,
            got: t.len(),
        });
    }
    let series = sigma_series(model)?;
    let sigma = series.eval(t)?.to_matrix();
    let e: Vec<Matrix<S>> = (0..n)
        .map(|i| {
            series
                .coeff(&Monomial::new(MultiIndex::unit(n, i), MultiIndex::zero(n)))
                .to_matrix()
        })
        .collect();
    let m = model.polarization().gram_q();
    let preserves_q = Check::of(&(&(&(&sigma.transpose() * m) * &sigma) - m), tol);
    let exp = exp_nilpotent(&linear_combination(&e, t)?, tol)?;
    let is_exponential = Check::of(&(&exp - &sigma), tol);

    let classic = model.classic_family().series;
    let mut rows: Vec<Vec<S>> = (0..=n).map(|r| sigma.row(r)).collect();
    for i in 0..n {
        let d = classic.derivative(i, VarKind::Holo)?.eval(t)?;
        rows.push(d.data);
    }
    let transversal = Matrix::from_rows(rows).rank(tol) == n + 1;
    Ok(SigmaReport {
        abelian: abelian_check(&e, tol),
        sigma,
        e,
        preserves_q,
        is_exponential,
        transversal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_cy3_model, cy3_interior_operators, hyperkahler_interior_operators};
    use crate::hodge::HodgeRiemannVerdict;
    use crate::scalar::{Cq, C64};
    use num::Zero;

    fn q(v: i64) -> Cq {
        Cq::from_i64(v)
    }

    #[test]
    fn cy3_operators_are_q_compatible_and_lower_degree() {
        let m = build_cy3_model(1, vec![q(3)], 6).unwrap();
        let e = &m.interior_operators()[0];
        let c = q_compat_check(e, m.polarization(), 0.0);
        assert!(c.holds);
        assert_eq!(c.residual, 0.0);
        let g = grading_decompose(e, &HodgeFiltration::reference(m.hodge()), m.hodge()).unwrap();
        assert_eq!(g.degrees(), vec![-1]);
    }

    #[test]
    fn identity_is_not_in_the_lie_algebra() {
        let pol = PolarizationForm::<Cq>::cy3_reference(2);
        assert!(!q_compat_check(&Matrix::identity(6), &pol, 0.0).holds);
    }

    #[test]
    fn hyperkahler_operators_are_q_compatible() {
        let pol = PolarizationForm::<Cq>::hyperkahler_reference(3);
        for e in hyperkahler_interior_operators::<Cq>(3) {
            assert!(q_compat_check(&e, &pol, 0.0).holds);
        }
    }

    #[test]
    fn gradings_of_diagonal_and_square() {
        let h = HodgeData::hyperkahler(1);
        let f = HodgeFiltration::<Cq>::reference(&h);
        let diag = Matrix::from_fn(3, 3, |a, b| if a == b { q(a as i64 + 1) } else { Cq::zero() });
        assert!(grading_decompose(&diag, &f, &h).unwrap().is_pure(0));
        let e = &hyperkahler_interior_operators::<Cq>(1)[0];
        assert_eq!(grading_decompose(&(e * e), &f, &h).unwrap().degrees(), vec![-2]);
    }

    #[test]
    fn exponential_of_twice_the_hyperkahler_operator() {
        let e = &hyperkahler_interior_operators::<Cq>(1)[0];
        let x = e.scale(&q(2));
        let g = exp_nilpotent(&x, 0.0).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![q(1), q(2), q(2)],
            vec![q(0), q(1), q(2)],
            vec![q(0), q(0), q(1)],
        ]);
        assert_eq!(g, expect);
        let inv = exp_nilpotent(&x.scale(&q(-1)), 0.0).unwrap();
        assert_eq!(&g * &inv, Matrix::identity(3));
    }

    #[test]
    fn exponential_refuses_non_nilpotent() {
        let x = Matrix::<Cq>::identity(2);
        assert!(matches!(exp_nilpotent(&x, 0.0), Err(PeriodError::NotNilpotent { .. })));
    }

    #[test]
    fn sigma_for_one_modulus_matches_its_display() {
        let a = q(2);
        let m = build_cy3_model(1, vec![a.clone()], 6).unwrap();
        let t = Cq::from_ratio(1, 2);
        let r = cy3_sigma(&m, std::slice::from_ref(&t), 0.0).unwrap();
        let h = Cq::from_ratio(1, 2);
        let expect = Matrix::from_rows(vec![
            vec![q(1), t.clone(), h.clone() * a.clone() * t.clone() * t.clone(), a.clone() * t.pow_u(3) / q(6)],
            vec![q(0), q(1), a.clone() * t.clone(), h.clone() * a.clone() * t.clone() * t.clone()],
            vec![q(0), q(0), q(1), t.clone()],
            vec![q(0), q(0), q(0), q(1)],
        ]);
        assert_eq!(r.sigma, expect);
        assert!(r.all_hold());
        assert_eq!(r.e[0], m.interior_operators()[0]);
    }

    #[test]
    fn asymmetric_operators_do_not_commute() {
        let mut c = vec![Cq::zero(); 8];
        c[1] = q(1); // C_{112} only
        let e = cy3_interior_operators(2, &c);
        let r = abelian_check(&e, 0.0);
        assert!(!r.abelian);
        assert_eq!(r.max_commutator, 1.0);
    }

    #[test]
    fn orbit_points_on_the_hyperkahler_disk() {
        let h = HodgeData::hyperkahler(1);
        let pol = PolarizationForm::<C64>::hyperkahler_reference(1);
        let e = hyperkahler_interior_operators::<C64>(1);
        let f = HodgeFiltration::reference(&h);
        let (p0, r0) = orbit_filtration(&e, &[C64::new(0.0, 0.0)], &f, &pol, &h, 1e-9).unwrap();
        assert_eq!(p0.filtration.basis(), f.basis());
        assert_eq!(r0.verdict, HodgeRiemannVerdict::InD);
        let (p, r) = orbit_filtration(&e, &[C64::new(0.5, 0.0)], &f, &pol, &h, 1e-9).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InD);
        assert!(p.is_unipotent(&h, 1e-12));
        // |τ| > √2 is the conjugate component, still a polarized Hodge structure
        let (_, r) = orbit_filtration(&e, &[C64::new(2.0, 0.0)], &f, &pol, &h, 1e-9).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InD);

        let h = HodgeData::hyperkahler(2);
        let pol = PolarizationForm::<C64>::hyperkahler_reference(2);
        let e = hyperkahler_interior_operators::<C64>(2);
        let f = HodgeFiltration::reference(&h);
        let tau = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let (_, r) = orbit_filtration(&e, &tau, &f, &pol, &h, 1e-9).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InDualOnly);
    }
}
