//! Weight-2 hyperkähler variations: the model, its (2,0)- and (2n,0)-family
//! expansions, the operators `E_i`, and the Harish-Chandra coordinates.
//!
//! The reference basis is `Ω, η_1..η_N, Ω̄` with `Q(Ω, Ω̄) = −1` and
//! `Q(η_i, η_j) = δ_ij`.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

use crate::family::{
    hyperkahler_interior_operators, FamilyError, FamilyExpansion, FamilyKind, ModelKind, VHSModel,
};
use crate::hodge::{HodgeData, HodgeFiltration, HodgeRiemannVerdict, PolarizationForm};
use crate::linalg::Matrix;
use crate::period::{abelian_check, exp_nilpotent, orbit_filtration, q_compat_check, AbelianReport, Check, PeriodError};
use crate::scalar::Scalar;
use crate::series::{Coeff, Monomial, MultiIndex, Shape, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HkError {
    #[error("need at least one modulus, got N = {0}")]
    NoModuli(usize),
    #[error("half dimension n must be at least 2, got {0}")]
    HalfDimension(usize),
    #[error("expected {expected} coordinates, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("point lies outside the Harish-Chandra domain ({verdict:?})")]
    OutsideDomain { verdict: HcVerdict },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Period(#[from] PeriodError),
}

#[derive(Clone, Debug)]
pub struct HKModel<S> {
    n_moduli: usize,
    half_dim: usize,
    hodge: HodgeData,
    polarization: PolarizationForm<S>,
    interior: Vec<Matrix<S>>,
}

/// Model of a hyperkähler `2n`-fold with `N`-dimensional deformation space.
pub fn build_hk_model<S: Scalar>(n_moduli: usize, half_dim: usize) -> Result<HKModel<S>, HkError> {
    if n_moduli == 0 {
        return Err(HkError::NoModuli(n_moduli));
    }
    if half_dim < 2 {
        return Err(HkError::HalfDimension(half_dim));
    }
    Ok(HKModel {
        n_moduli,
        half_dim,
        hodge: HodgeData::hyperkahler(n_moduli),
        polarization: PolarizationForm::hyperkahler_reference(n_moduli),
        interior: hyperkahler_interior_operators(n_moduli),
    })
}

impl<S: Scalar> HKModel<S> {
    pub fn n_moduli(&self) -> usize {
        self.n_moduli
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn hodge(&self) -> &HodgeData {
        &self.hodge
    }

    pub fn polarization(&self) -> &PolarizationForm<S> {
        &self.polarization
    }

    pub fn gram_q(&self) -> &Matrix<S> {
        self.polarization.gram_q()
    }

    pub fn interior_operators(&self) -> &[Matrix<S>] {
        &self.interior
    }

    pub fn dim(&self) -> usize {
        self.n_moduli + 2
    }

    /// The same data as a generic [`VHSModel`], for the metric computations.
    pub fn to_vhs_model(&self, order: usize) -> Result<VHSModel<S>, HkError> {
        let m = VHSModel::new(
            self.hodge.clone(),
            self.polarization.clone(),
            self.interior.clone(),
            BTreeMap::new(),
            order,
        )?;
        Ok(m.with_kind(ModelKind::Hyperkahler))
    }
}

/// `Ω + Σ t_i η_i + ½ (Σ t_i²) Ω̄`, exact and of degree two.
pub fn hk20_family<S: Scalar>(model: &HKModel<S>) -> FamilyExpansion<S> {
    let n = model.n_moduli;
    let d = model.dim();
    let unit = |a: usize, v: S| {
        let mut x = vec![S::zero(); d];
        x[a] = v;
        Coeff::vector(x)
    };
    let zero = MultiIndex::zero(n);
    let mut terms = vec![(Monomial::new(zero.clone(), zero.clone()), unit(0, S::one()))];
    for i in 0..n {
        terms.push((Monomial::new(MultiIndex::unit(n, i), zero.clone()), unit(1 + i, S::one())));
        terms.push((
            Monomial::new(MultiIndex::from_indices(n, &[i, i]), zero.clone()),
            unit(d - 1, S::from_ratio(1, 2)),
        ));
    }
    FamilyExpansion {
        series: TruncatedSeries::from_terms(n, 2, Shape::Vector(d), terms),
        kind: FamilyKind::Canonical,
    }
}

/// Coefficients of `exp(Σ t_i φ_i) ⌟ ∧ⁿΩ` on the symbols
/// `[φ_{i_1} ⌟ … ⌟ φ_{i_k} ⌟ ∧ⁿΩ]`, keyed by sorted tuples `i_1 ≤ … ≤ i_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeExpansionTable {
    pub n_moduli: usize,
    pub half_dim: usize,
    pub entries: BTreeMap<Vec<usize>, BigRational>,
}

impl WedgeExpansionTable {
    pub fn max_degree(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn get(&self, tuple: &[usize]) -> Option<&BigRational> {
        let mut key = tuple.to_vec();
        key.sort_unstable();
        self.entries.get(&key)
    }
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

/// Sums `1/k!` over all ordered index sequences of each length `k ≤ 2n`.
pub fn wedge_table_ordered(n_moduli: usize, half_dim: usize) -> WedgeExpansionTable {
    let mut entries: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
    for k in 0..=2 * half_dim {
        let weight = BigRational::new(BigInt::one(), factorial(k));
        let total = n_moduli.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut seq: Vec<usize> = (0..k)
                .map(|_| {
                    let v = c % n_moduli;
                    c /= n_moduli;
                    v
                })
                .collect();
            seq.sort_unstable();
            *entries.entry(seq).or_insert_with(BigRational::zero) += &weight;
        }
    }
    WedgeExpansionTable {
        n_moduli,
        half_dim,
        entries,
    }
}

/// Multinomial coefficients `1/(m_1!⋯m_N!)` for every sorted tuple of length `k ≤ 2n`.
pub fn wedge_table_multinomial(n_moduli: usize, half_dim: usize) -> WedgeExpansionTable {
    let mut entries = BTreeMap::new();
    for k in 0..=2 * half_dim {
        for mi in MultiIndex::all_of_order(n_moduli, k) {
            let den = mi
                .exponents()
                .iter()
                .fold(BigInt::one(), |acc, &m| acc * factorial(m as usize));
            entries.insert(mi.to_indices(), BigRational::new(BigInt::one(), den));
        }
    }
    WedgeExpansionTable {
        n_moduli,
        half_dim,
        entries,
    }
}

/// The (2n,0)-family coefficient table, computed from ordered tuples and
/// checked against the multinomial form.
pub fn hk2n0_coefficients<S: Scalar>(model: &HKModel<S>) -> (WedgeExpansionTable, bool) {
    let ordered = wedge_table_ordered(model.n_moduli, model.half_dim);
    let agrees = ordered == wedge_table_multinomial(model.n_moduli, model.half_dim);
    (ordered, agrees)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HcVerdict {
    /// In `D`, on the component through the base point.
    Inside,
    /// A polarized Hodge structure on the conjugate component.
    OtherComponent,
    /// Not in `D`.
    Outside,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HcMembership {
    pub verdict: HcVerdict,
    pub hodge_riemann: HodgeRiemannVerdict,
    /// `1 − Σ|τ_i|² + ¼|Στ_i²|²`, the value of `Q(CΩ(τ), Ω̄(τ))`.
    pub positivity: f64,
    /// `1 − Σ|τ_i|² + ¼|Στ_i²|`.
    pub positivity_unsquared: f64,
    /// `1 − ¼|Στ_i²|²`, positive on the base component.
    pub orientation: f64,
}

/// Locates `exp(Σ τ_i E_i)·F_ref` by the Hodge–Riemann relations.
pub fn hc_membership<S: Scalar>(model: &HKModel<S>, tau: &[S], tol: f64) -> Result<HcMembership, HkError> {
    if tau.len() != model.n_moduli {
        return Err(HkError::ParameterCount {
            expected: model.n_moduli,
            got: tau.len(),
        });
    }
    let f_ref = HodgeFiltration::reference(&model.hodge);
    let (_, hr) = orbit_filtration(&model.interior, tau, &f_ref, &model.polarization, &model.hodge, tol)?;
    let norm2: f64 = tau.iter().map(|x| x.to_c64().norm_sqr()).sum();
    let sq: num::Complex<f64> = tau.iter().map(|x| x.to_c64() * x.to_c64()).sum();
    let s = sq.norm();
    let orientation = 1.0 - 0.25 * s * s;
    let verdict = match hr.verdict {
        HodgeRiemannVerdict::InD if orientation > 0.0 => HcVerdict::Inside,
        HodgeRiemannVerdict::InD => HcVerdict::OtherComponent,
        _ => HcVerdict::Outside,
    };
    Ok(HcMembership {
        verdict,
        hodge_riemann: hr.verdict,
        positivity: 1.0 - norm2 + 0.25 * s * s,
        positivity_unsquared: 1.0 - norm2 + 0.25 * s,
        orientation,
    })
}

/// The operators `E_i` and their structure checks.
#[derive(Clone, Debug)]
pub struct HkOperators<S> {
    pub e: Vec<Matrix<S>>,
    /// `E_i E_j = δ_ij · corner`.
    pub products: Check,
    pub q_compatible: Check,
    pub abelian: AbelianReport,
}

fn corner<S: Scalar>(d: usize) -> Matrix<S> {
    let mut c = Matrix::zeros(d, d);
    c[(0, d - 1)] = S::one();
    c
}

/// `[[1, τᵀ, ½Στ²], [0, I, τ], [0, 0, 1]]`.
pub fn hk_exp_display<S: Scalar>(tau: &[S]) -> Matrix<S> {
    let n = tau.len();
    let d = n + 2;
    let mut m = Matrix::identity(d);
    let mut sq = S::zero();
    for (i, t) in tau.iter().enumerate() {
        m[(0, 1 + i)] = t.clone();
        m[(1 + i, d - 1)] = t.clone();
        sq = sq + t.clone() * t.clone();
    }
    m[(0, d - 1)] = sq * S::from_ratio(1, 2);
    m
}

pub fn hk_e_matrices<S: Scalar>(model: &HKModel<S>, tol: f64) -> HkOperators<S> {
    let d = model.dim();
    let e = model.interior.clone();
    let mut worst = 0.0f64;
    let mut holds = true;
    let mut compat_worst = 0.0f64;
    let mut compat = true;
    for (i, ei) in e.iter().enumerate() {
        let c = q_compat_check(ei, &model.polarization, tol);
        compat &= c.holds;
        compat_worst = compat_worst.max(c.residual);
        for (j, ej) in e.iter().enumerate() {
            let expect = if i == j { corner(d) } else { Matrix::zeros(d, d) };
            let r = &(ei * ej) - &expect;
            holds &= r.is_zero(tol);
            worst = worst.max(r.max_abs());
        }
    }
    HkOperators {
        abelian: abelian_check(&e, tol),
        e,
        products: Check {
            holds,
            residual: worst,
        },
        q_compatible: Check {
            holds: compat,
            residual: compat_worst,
        },
    }
}

impl<S: Scalar> HkOperators<S> {
    /// Compares `exp(Σ τ_i E_i)` with [`hk_exp_display`].
    pub fn exp_check(&self, tau: &[S], tol: f64) -> Result<Check, HkError> {
        if tau.len() != self.e.len() {
            return Err(HkError::ParameterCount {
                expected: self.e.len(),
                got: tau.len(),
            });
        }
        let d = tau.len() + 2;
        let x = self
            .e
            .iter()
            .zip(tau)
            .fold(Matrix::zeros(d, d), |acc, (m, t)| &acc + &m.scale(t));
        let r = &exp_nilpotent(&x, tol)? - &hk_exp_display(tau);
        Ok(Check {
            holds: r.is_zero(tol),
            residual: r.max_abs(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Coincidence<S> {
    /// First row of `exp(Σ t_i E_i)`.
    pub orbit_row: Vec<S>,
    /// The (2,0)-family evaluated at `t`.
    pub family: Vec<S>,
    pub residual: f64,
    pub exact: bool,
}

/// Compares the Harish-Chandra point `τ = t` with the flat-coordinate family.
pub fn coordinate_coincidence<S: Scalar>(model: &HKModel<S>, t: &[S], tol: f64) -> Result<Coincidence<S>, HkError> {
    let m = hc_membership(model, t, tol)?;
    if m.verdict != HcVerdict::Inside {
        return Err(HkError::OutsideDomain { verdict: m.verdict });
    }
    let d = model.dim();
    let x = model
        .interior
        .iter()
        .zip(t)
        .fold(Matrix::zeros(d, d), |acc, (e, ti)| &acc + &e.scale(ti));
    let orbit_row = exp_nilpotent(&x, tol)?.row(0);
    let family = hk20_family(model)
        .eval(t)
        .map_err(FamilyError::from)?;
    let diffs: Vec<S> = orbit_row
        .iter()
        .zip(&family)
        .map(|(a, b)| a.clone() - b.clone())
        .collect();
    Ok(Coincidence {
        residual: diffs.iter().map(|v| v.magnitude()).fold(0.0, f64::max),
        exact: diffs.iter().all(|v| v.is_zero()),
        orbit_row,
        family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Cq, C64};
    use crate::wpgeom::wp_potential;

    fn q(p: i64, d: i64) -> Cq {
        Cq::from_ratio(p, d)
    }

    #[test]
    fn invalid_dimensions_are_refused() {
        assert_eq!(build_hk_model::<Cq>(0, 2).unwrap_err(), HkError::NoModuli(0));
        assert_eq!(build_hk_model::<Cq>(1, 1).unwrap_err(), HkError::HalfDimension(1));
    }

    #[test]
    fn gram_for_two_moduli() {
        let m = build_hk_model::<Cq>(2, 2).unwrap();
        let g = m.gram_q();
        assert_eq!(g[(0, 3)], q(-1, 1));
        assert_eq!(g[(3, 0)], q(-1, 1));
        assert_eq!(g[(1, 1)], q(1, 1));
        assert_eq!(g[(2, 2)], q(1, 1));
        assert_eq!(g[(1, 2)], q(0, 1));
        assert_eq!(g[(0, 0)], q(0, 1));
    }

    #[test]
    fn family_for_one_modulus() {
        let m = build_hk_model::<Cq>(1, 2).unwrap();
        let f = hk20_family(&m);
        assert_eq!(f.coeff(&[0]), vec![q(1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(f.coeff(&[1]), vec![q(0, 1), q(1, 1), q(0, 1)]);
        assert_eq!(f.coeff(&[2]), vec![q(0, 1), q(0, 1), q(1, 2)]);
        assert_eq!(f.series.max_degree(), Some(2));
        let v = f.eval(&[q(3, 5)]).unwrap();
        assert_eq!(v, vec![q(1, 1), q(3, 5), q(9, 50)]);
    }

    #[test]
    fn mixed_degree_two_terms_vanish() {
        let m = build_hk_model::<Cq>(3, 2).unwrap();
        let f = hk20_family(&m);
        assert!(f.coeff(&[1, 1, 0]).iter().all(Zero::is_zero));
        assert_eq!(f.coeff(&[0, 0, 2])[4], q(1, 2));
    }

    #[test]
    fn family_matches_classic_family_of_vhs_model() {
        let m = build_hk_model::<Cq>(2, 3).unwrap();
        let v = m.to_vhs_model(4).unwrap();
        assert_eq!(v.kind(), ModelKind::Hyperkahler);
        let classic = v.classic_family();
        let direct = hk20_family(&m);
        for mi in (0..=4).flat_map(|k| MultiIndex::all_of_order(2, k)) {
            assert_eq!(classic.coeff(mi.exponents()), direct.coeff(mi.exponents()), "{mi:?}");
        }
    }

    #[test]
    fn potential_for_one_modulus() {
        let m = build_hk_model::<Cq>(1, 2).unwrap().to_vhs_model(6).unwrap();
        let p = wp_potential(&m).unwrap();
        let s = p.series();
        let c = |h: u16, a: u16| s.coeff_at(&[h], &[a]).data[0].clone();
        assert_eq!(c(0, 0), q(1, 1));
        assert_eq!(c(1, 1), q(-1, 1));
        assert_eq!(c(2, 2), q(1, 4));
        assert_eq!(c(2, 0), q(0, 1));
        assert_eq!(c(1, 0), q(0, 1));
        assert_eq!(s.terms().count(), 3);
    }

    #[test]
    fn potential_value_for_two_moduli() {
        let m = build_hk_model::<C64>(2, 2).unwrap().to_vhs_model(6).unwrap();
        let p = wp_potential(&m).unwrap();
        let v = p.value_at(&[C64::new(0.3, 0.0), C64::new(0.0, 0.4)]).unwrap();
        assert!((v.re - 0.751225).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn wedge_table_small_cases() {
        let m = build_hk_model::<Cq>(1, 2).unwrap();
        let (t, agrees) = hk2n0_coefficients(&m);
        assert!(agrees);
        assert_eq!(t.max_degree(), 4);
        assert_eq!(t.get(&[]), Some(&BigRational::one()));
        assert_eq!(t.get(&[0]), Some(&BigRational::one()));
        assert_eq!(t.get(&[0, 0, 0]), Some(&BigRational::new(1.into(), 6.into())));
        assert_eq!(t.get(&[0, 0, 0, 0, 0]), None);

        let t = wedge_table_ordered(3, 2);
        // t_0 t_1 t_2: 3! orderings over 3!
        assert_eq!(t.get(&[2, 0, 1]), Some(&BigRational::one()));
        assert_eq!(t.get(&[0, 0, 1]), Some(&BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn membership_examples() {
        let m = build_hk_model::<C64>(1, 2).unwrap();
        let r = hc_membership(&m, &[C64::new(0.0, 0.0)], 1e-9).unwrap();
        assert_eq!(r.verdict, HcVerdict::Inside);
        assert_eq!(r.positivity, 1.0);

        let r = hc_membership(&m, &[C64::new(0.99, 0.0)], 1e-9).unwrap();
        assert_eq!(r.verdict, HcVerdict::Inside);
        assert!((r.positivity - 0.2600490025).abs() < 1e-12);

        let r = hc_membership(&m, &[C64::new(2.0, 0.0)], 1e-9).unwrap();
        assert_eq!(r.verdict, HcVerdict::OtherComponent);
        assert_eq!(r.hodge_riemann, HodgeRiemannVerdict::InD);

        let m = build_hk_model::<C64>(2, 2).unwrap();
        let r = hc_membership(&m, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)], 1e-9).unwrap();
        assert_eq!(r.verdict, HcVerdict::Outside);
        assert!(r.positivity < 0.0);
    }

    #[test]
    fn operator_structure() {
        let m = build_hk_model::<Cq>(2, 2).unwrap();
        let ops = hk_e_matrices(&m, 0.0);
        assert!(ops.products.holds && ops.q_compatible.holds && ops.abelian.abelian);
        assert!((&ops.e[0] * &ops.e[1]).is_zero(0.0));
        assert!(ops.exp_check(&[q(1, 3), q(-2, 7)], 0.0).unwrap().holds);

        let m1 = build_hk_model::<Cq>(1, 2).unwrap();
        let ops = hk_e_matrices(&m1, 0.0);
        let tau = q(5, 3);
        let x = ops.e[0].scale(&tau);
        let expect = Matrix::from_rows(vec![
            vec![q(1, 1), tau.clone(), q(25, 18)],
            vec![q(0, 1), q(1, 1), tau.clone()],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ]);
        assert_eq!(exp_nilpotent(&x, 0.0).unwrap(), expect);
        assert_eq!(&ops.e[0] * &ops.e[0], corner(3));
    }

    #[test]
    fn coincidence_examples() {
        let m = build_hk_model::<Cq>(1, 2).unwrap();
        let c = coordinate_coincidence(&m, &[q(0, 1)], 0.0).unwrap();
        assert!(c.exact);
        let c = coordinate_coincidence(&m, &[q(3, 10)], 0.0).unwrap();
        assert!(c.exact);
        assert_eq!(c.orbit_row, vec![q(1, 1), q(3, 10), q(9, 200)]);

        let m2 = build_hk_model::<Cq>(2, 2).unwrap();
        let t = [Cq::new(q(1, 4).re, q(-1, 3).re), q(2, 5)];
        let c = coordinate_coincidence(&m2, &t, 0.0).unwrap();
        assert!(c.exact && c.residual == 0.0);

        assert!(matches!(
            coordinate_coincidence(&m, &[q(2, 1)], 0.0),
            Err(HkError::OutsideDomain { .. })
        ));
    }
}
