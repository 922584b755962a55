//! Finite models of a polarized variation of Hodge structure and their
//! period expansions.
//!
//! A [`VHSModel`] stores, in the reference adapted basis, the interior
//! operators `E_i` describing `φ_i ⌟ ·` on cohomology, plus optional higher
//! coefficients of the canonical family. Everything downstream (potential,
//! metric, Yukawa couplings, period matrices) is computed from these.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hodge::{HodgeData, HodgeError, PolarizationForm, DEFAULT_TOL};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;
use crate::series::{Coeff, Monomial, MultiIndex, SeriesError, Shape, TruncatedSeries, VarKind};

/// Default truncation order of every series.
pub const DEFAULT_ORDER: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("Yukawa tensor is not symmetric: C[{i}][{j}][{k}] differs from one of its permutations")]
    AsymmetricCouplings { i: usize, j: usize, k: usize },
    #[error("coupling tensor has {found} entries, expected {expected}")]
    CouplingShape { expected: usize, found: usize },
    #[error("normalization violated: {invariant} (entries {entries})")]
    Normalization { invariant: String, entries: String },
    #[error(
        "extra coefficient at t^{index:?} has a nonzero component {component} in the first two \
         Hodge blocks; higher coefficients must lie in the blocks H^(n-j,j), j >= 2"
    )]
    ExtraInLowBlocks { index: Vec<u16>, component: usize },
    #[error("extra coefficient at t^{index:?}: {reason}")]
    BadExtra { index: Vec<u16>, reason: String },
    #[error("interior operator E_{op} has entry ({row},{col}) that does not lower the Hodge degree by one")]
    NotLowering { op: usize, row: usize, col: usize },
    #[error("operation needs weight {expected}, model has weight {found}")]
    WrongWeight { expected: usize, found: usize },
    #[error("model shape: {0}")]
    Shape(String),
    #[error("truncation order {0} is too small for this operation")]
    OrderTooSmall(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
}

/// Which construction produced a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cy3,
    Hyperkahler,
    AbstractVhs,
}

#[derive(Clone, Debug)]
pub struct VHSModel<S> {
    kind: ModelKind,
    hodge: HodgeData,
    polarization: PolarizationForm<S>,
    n_moduli: usize,
    interior: Vec<Matrix<S>>,
    couplings: Option<Vec<S>>,
    extra: BTreeMap<MultiIndex, Vec<S>>,
    order: usize,
}

/// Flat index of `C_ijk`.
fn idx3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

/// CY3 interior operators from a coupling tensor, without any symmetry check.
///
/// Rows act as `[φ_i ⌟ b_a] = Σ_b (E_i)_{ab} b_b` on the basis
/// `Ω, η_1..η_N, η̄_1..η̄_N, Ω̄`.
pub fn cy3_interior_operators<S: Scalar>(n: usize, c: &[S]) -> Vec<Matrix<S>> {
    let d = 2 * n + 2;
    (0..n)
        .map(|i| {
            let mut e = Matrix::zeros(d, d);
            e[(0, 1 + i)] = S::one();
            for j in 0..n {
                for k in 0..n {
                    e[(1 + j, 1 + n + k)] = c[idx3(n, i, j, k)].clone();
                }
            }
            e[(1 + n + i, d - 1)] = S::one();
            e
        })
        .collect()
}

/// Interior operators of the weight-2 hyperkähler reference model.
pub fn hyperkahler_interior_operators<S: Scalar>(n: usize) -> Vec<Matrix<S>> {
    let d = n + 2;
    (0..n)
        .map(|i| {
            let mut e = Matrix::zeros(d, d);
            e[(0, 1 + i)] = S::one();
            e[(1 + i, d - 1)] = S::one();
            e
        })
        .collect()
}

/// Checks full symmetry of an `N×N×N` tensor and reports the first
/// offending triple.
pub fn check_symmetric_tensor<S: Scalar>(n: usize, c: &[S], tol: f64) -> Result<(), FamilyError> {
    if c.len() != n * n * n {
        return Err(FamilyError::CouplingShape {
            expected: n * n * n,
            found: c.len(),
        });
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = &c[idx3(n, i, j, k)];
                let perms = [(j, i, k), (i, k, j), (k, j, i), (j, k, i), (k, i, j)];
                for (a, b, cc) in perms {
                    if !(v.clone() - c[idx3(n, a, b, cc)].clone()).is_negligible(tol) {
                        return Err(FamilyError::AsymmetricCouplings { i, j, k });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Builds the CY3 model attached to a symmetric Yukawa tensor `C` (flat,
/// `C[(i·N + j)·N + k]`), with no higher canonical coefficients.
pub fn build_cy3_model<S: Scalar>(n: usize, c: Vec<S>, order: usize) -> Result<VHSModel<S>, FamilyError> {
    check_symmetric_tensor(n, &c, DEFAULT_TOL)?;
    let model = VHSModel {
        kind: ModelKind::Cy3,
        hodge: HodgeData::cy3(n),
        polarization: PolarizationForm::cy3_reference(n),
        n_moduli: n,
        interior: cy3_interior_operators(n, &c),
        couplings: Some(c),
        extra: BTreeMap::new(),
        order,
    };
    model.validate(DEFAULT_TOL)?;
    Ok(model)
}

/// Degree-3 extra coefficients realizing a prescribed weak correction.
///
/// `shadows[(j, k)]` is an `N×N` matrix `B` with `B[i][l]` the `η̄_l`
/// component of `φ_i ⌟ φ_jk ⌟ Ω`; missing pairs are zero and `(k, j)` falls
/// back to `(j, k)`. The cubic form `Σ t_i t_j t_k B_jk[i]` is returned as
/// coefficients of the monomials `t^I`, `|I| = 3`, in the reference CY3 basis.
pub fn weak_extras_from_shadows<S: Scalar>(
    n: usize,
    shadows: &BTreeMap<(usize, usize), Matrix<S>>,
) -> BTreeMap<MultiIndex, Vec<S>> {
    let d = 2 * n + 2;
    let lookup = |j: usize, k: usize| shadows.get(&(j, k)).or_else(|| shadows.get(&(k, j)));
    let mut out: BTreeMap<MultiIndex, Vec<S>> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let Some(b) = lookup(j, k) else { continue };
                let key = MultiIndex::from_indices(n, &[i, j, k]);
                let v = out.entry(key).or_insert_with(|| vec![S::zero(); d]);
                for l in 0..n {
                    v[1 + n + l] = v[1 + n + l].clone() + b[(i, l)].clone();
                }
            }
        }
    }
    out.retain(|_, v| v.iter().any(|x| !x.is_zero()));
    out
}

impl<S: Scalar> VHSModel<S> {
    /// Generic constructor; validates shapes, degree lowering, and the
    /// reference normalization.
    pub fn new(
        hodge: HodgeData,
        polarization: PolarizationForm<S>,
        interior: Vec<Matrix<S>>,
        extra: BTreeMap<MultiIndex, Vec<S>>,
        order: usize,
    ) -> Result<Self, FamilyError> {
        let n = interior.len();
        if hodge.weight() >= 1 && hodge.h(hodge.weight() - 1) != n {
            return Err(FamilyError::Shape(format!(
                "{n} interior operators but h^(n-1,1) = {}",
                hodge.h(hodge.weight() - 1)
            )));
        }
        let model = VHSModel {
            kind: ModelKind::AbstractVhs,
            hodge,
            polarization,
            n_moduli: n,
            interior,
            couplings: None,
            extra,
            order,
        };
        model.validate(DEFAULT_TOL)?;
        Ok(model)
    }

    pub(crate) fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    /// Same model with higher canonical coefficients attached.
    pub fn with_extra_coeffs(mut self, extra: BTreeMap<MultiIndex, Vec<S>>) -> Result<Self, FamilyError> {
        self.extra = extra;
        self.validate(DEFAULT_TOL)?;
        Ok(self)
    }

    /// Same model with another truncation order.
    pub fn with_order(mut self, order: usize) -> Result<Self, FamilyError> {
        self.order = order;
        self.validate(DEFAULT_TOL)?;
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hodge(&self) -> &HodgeData {
        &self.hodge
    }

    pub fn polarization(&self) -> &PolarizationForm<S> {
        &self.polarization
    }

    pub fn n_moduli(&self) -> usize {
        self.n_moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight(&self) -> usize {
        self.hodge.weight()
    }

    pub fn dim(&self) -> usize {
        self.hodge.total_dim()
    }

    pub fn interior_operators(&self) -> &[Matrix<S>] {
        &self.interior
    }

    /// Flat Yukawa tensor of a CY3 model.
    pub fn couplings(&self) -> Option<&[S]> {
        self.couplings.as_deref()
    }

    /// `A_i` with `[φ_i ⌟ η_j] = Σ_k (A_i)_{jk} [η̄_k]` (CY3 models).
    pub fn a_matrix(&self, i: usize) -> Option<Matrix<S>> {
        let n = self.n_moduli;
        let c = self.couplings.as_ref()?;
        Some(Matrix::from_fn(n, n, |j, k| c[idx3(n, i, j, k)].clone()))
    }

    pub fn extra_coeffs(&self) -> &BTreeMap<MultiIndex, Vec<S>> {
        &self.extra
    }

    pub fn has_extra_coeffs(&self) -> bool {
        self.extra.values().any(|v| v.iter().any(|x| !x.is_zero()))
    }

    /// Reference vector `a_0 = [Ω]`.
    pub fn a0(&self) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[0] = S::one();
        v
    }

    /// `a_i = [φ_i ⌟ Ω]`.
    pub fn a(&self, i: usize) -> Vec<S> {
        self.interior[i].row(0)
    }

    pub fn validate(&self, tol: f64) -> Result<(), FamilyError> {
        let d = self.dim();
        let n = self.n_moduli;
        let w = self.weight();
        self.polarization.validate(&self.hodge, tol)?;
        if self.order < 1 {
            return Err(FamilyError::OrderTooSmall(self.order));
        }
        for (op, e) in self.interior.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(FamilyError::Shape(format!(
                    "E_{op} is {:?}, expected {d}x{d}",
                    e.shape()
                )));
            }
            for row in 0..d {
                for col in 0..d {
                    let lowers = self.hodge.type_of_index(col) + 1 == self.hodge.type_of_index(row);
                    if !e[(row, col)].is_negligible(tol) && !lowers {
                        return Err(FamilyError::NotLowering { op, row, col });
                    }
                }
            }
        }
        let low = self.hodge.f(w.saturating_sub(1));
        for (index, v) in &self.extra {
            let exps = index.exponents().to_vec();
            if index.len() != n {
                return Err(FamilyError::BadExtra {
                    index: exps,
                    reason: format!("multi-index has {} entries, expected {n}", index.len()),
                });
            }
            if index.order() < 2 {
                return Err(FamilyError::BadExtra {
                    index: exps,
                    reason: "only orders |I| >= 2 may be prescribed".into(),
                });
            }
            if index.order() > self.order {
                return Err(FamilyError::BadExtra {
                    index: exps,
                    reason: format!("order exceeds the truncation order {}", self.order),
                });
            }
            if v.len() != d {
                return Err(FamilyError::BadExtra {
                    index: exps,
                    reason: format!("vector has length {}, expected {d}", v.len()),
                });
            }
            if let Some(component) = (0..low).find(|&a| !v[a].is_negligible(tol)) {
                return Err(FamilyError::ExtraInLowBlocks { index: exps, component });
            }
        }
        self.check_normalization(tol)
    }

    fn check_normalization(&self, tol: f64) -> Result<(), FamilyError> {
        let pol = &self.polarization;
        let h = |u: &[S], v: &[S]| pol.hermitian(&self.hodge, u, v);
        let a0 = self.a0();
        let fail = |invariant: &str, entries: String| FamilyError::Normalization {
            invariant: invariant.into(),
            entries,
        };
        if !(h(&a0, &a0) - S::one()).is_negligible(tol) {
            return Err(fail("Q̃(a_0, ā_0) = 1", format!("{:?}", h(&a0, &a0).to_c64())));
        }
        let a: Vec<Vec<S>> = (0..self.n_moduli).map(|i| self.a(i)).collect();
        for i in 0..self.n_moduli {
            if !h(&a0, &a[i]).is_negligible(tol) {
                return Err(fail("Q̃(a_0, ā_i) = 0", format!("i = {i}")));
            }
            for j in 0..self.n_moduli {
                let expect = if i == j { -S::one() } else { S::zero() };
                if !(h(&a[i], &a[j]) - expect).is_negligible(tol) {
                    return Err(fail("Q̃(a_i, ā_j) = −δ_ij", format!("i = {i}, j = {j}")));
                }
            }
        }
        let higher = self.canonical_family()?.series;
        for (m, c) in higher.terms() {
            if m.order() < 2 {
                continue;
            }
            let idx = m.holo.exponents().to_vec();
            if !h(&a0, &c.data).is_negligible(tol) {
                return Err(fail("Q̃(a_0, ā_I) = 0", format!("I = {idx:?}")));
            }
            for (i, ai) in a.iter().enumerate() {
                if !h(ai, &c.data).is_negligible(tol) {
                    return Err(fail("Q̃(a_i, ā_I) = 0", format!("i = {i}, I = {idx:?}")));
                }
            }
        }
        Ok(())
    }

    /// Matrix series `Σ t_i E_iᵀ`, so that `row · Σ t_i E_i` is a
    /// matrix-times-vector product of series.
    fn transposed_generator(&self) -> TruncatedSeries<S> {
        let n = self.n_moduli;
        let d = self.dim();
        TruncatedSeries::from_terms(
            n,
            self.order,
            Shape::Matrix(d, d),
            self.interior.iter().enumerate().map(|(i, e)| {
                (
                    Monomial::new(MultiIndex::unit(n, i), MultiIndex::zero(n)),
                    Coeff::matrix(&e.transpose()),
                )
            }),
        )
    }

    /// `[Ω^cc(t)] = a_0 · exp(Σ t_i E_i)`.
    pub fn classic_family(&self) -> FamilyExpansion<S> {
        let n = self.n_moduli;
        let x = self.transposed_generator();
        let mut term = TruncatedSeries::constant(n, self.order, Coeff::vector(self.a0()));
        let mut sum = term.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            term = x
                .mul(&term)
                .expect("same layout")
                .scale(&S::from_ratio(1, k));
            sum = sum.add(&term).expect("same layout");
            k += 1;
        }
        FamilyExpansion {
            series: sum,
            kind: FamilyKind::Classic,
        }
    }

    /// Strong correction `Σ a_I t^I` over the prescribed extra coefficients.
    fn extra_series(&self) -> TruncatedSeries<S> {
        let n = self.n_moduli;
        TruncatedSeries::from_terms(
            n,
            self.order,
            Shape::Vector(self.dim()),
            self.extra.iter().map(|(i, v)| {
                (
                    Monomial::new(i.clone(), MultiIndex::zero(n)),
                    Coeff::vector(v.clone()),
                )
            }),
        )
    }

    /// `[Ω^c(t)]`: the classic family plus the extra coefficients.
    pub fn canonical_family(&self) -> Result<FamilyExpansion<S>, FamilyError> {
        let series = self.classic_family().series.add(&self.extra_series())?;
        Ok(FamilyExpansion {
            series,
            kind: FamilyKind::Canonical,
        })
    }

    pub fn quantum_correction(&self) -> Result<QuantumCorrection<S>, FamilyError> {
        let strong = self
            .canonical_family()?
            .series
            .sub(&self.classic_family().series)?;
        let weak = strong.homogeneous_part(3);
        Ok(QuantumCorrection {
            strong_is_zero: strong.is_zero(),
            weak_is_zero: weak.is_zero(),
            strong,
            weak,
        })
    }

    /// Yukawa couplings `C_ijk(t) = Q̃(Ω^c(t), ∂_i∂_j∂_k Ω^c(t))`.
    pub fn yukawa(&self) -> Result<Yukawa<S>, FamilyError> {
        if self.weight() != 3 {
            return Err(FamilyError::WrongWeight {
                expected: 3,
                found: self.weight(),
            });
        }
        if self.order < 3 {
            return Err(FamilyError::OrderTooSmall(self.order));
        }
        let n = self.n_moduli;
        let fam = self.canonical_family()?.series;
        let gram = self.polarization.gram_qtilde().clone();
        let pairing = |u: &[S], v: &[S]| dot(u, &gram.mul_vec(v));
        let mut full = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // the family is a polynomial, so differentiating loses nothing
                    let d3 = fam
                        .derivative(i, VarKind::Holo)?
                        .derivative(j, VarKind::Holo)?
                        .derivative(k, VarKind::Holo)?
                        .with_max_order(self.order);
                    full.push(fam.pair_with(&d3, pairing)?);
                }
            }
        }
        let correction = full
            .iter()
            .map(|s| {
                let c = TruncatedSeries::constant(n, self.order, s.constant_term());
                s.sub(&c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Yukawa {
            n,
            full,
            correction,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Classic,
    Canonical,
}

/// Vector-valued expansion of a family in reference coordinates.
#[derive(Clone, Debug)]
pub struct FamilyExpansion<S> {
    pub series: TruncatedSeries<S>,
    pub kind: FamilyKind,
}

impl<S: Scalar> FamilyExpansion<S> {
    /// Coefficient vector of `t^I`.
    pub fn coeff(&self, index: &[u16]) -> Vec<S> {
        let zero = vec![0; index.len()];
        self.series.coeff_at(index, &zero).data
    }

    pub fn eval(&self, t: &[S]) -> Result<Vec<S>, SeriesError> {
        Ok(self.series.eval(t)?.data)
    }
}

#[derive(Clone, Debug)]
pub struct QuantumCorrection<S> {
    /// `Ξ(t)`, the canonical minus the classic family.
    pub strong: TruncatedSeries<S>,
    /// Cubic part of `Ξ(t)`.
    pub weak: TruncatedSeries<S>,
    pub strong_is_zero: bool,
    pub weak_is_zero: bool,
}

impl<S: Scalar> QuantumCorrection<S> {
    /// Symmetric tensor `W_ijk` with `weak = Σ_{ijk} W_ijk t_i t_j t_k`.
    pub fn weak_tensor(&self, i: usize, j: usize, k: usize) -> Vec<S> {
        let n = self.weak.num_vars();
        let mi = MultiIndex::from_indices(n, &[i, j, k]);
        let c = self.weak.coeff(&Monomial::new(mi.clone(), MultiIndex::zero(n)));
        // t^I collects 3!/I! ordered triples
        c.scale(&(mi.factorial::<S>() * S::inv_factorial(3))).data
    }
}

/// Yukawa coupling series, flat in `(i, j, k)`.
#[derive(Clone, Debug)]
pub struct Yukawa<S> {
    n: usize,
    pub full: Vec<TruncatedSeries<S>>,
    pub correction: Vec<TruncatedSeries<S>>,
}

impl<S: Scalar> Yukawa<S> {
    pub fn full(&self, i: usize, j: usize, k: usize) -> &TruncatedSeries<S> {
        &self.full[idx3(self.n, i, j, k)]
    }

    pub fn correction(&self, i: usize, j: usize, k: usize) -> &TruncatedSeries<S> {
        &self.correction[idx3(self.n, i, j, k)]
    }

    pub fn correction_is_zero(&self, tol: f64) -> bool {
        self.correction.iter().all(|s| s.is_negligible(tol))
    }

    /// True when the first-order part of the correction vanishes.
    pub fn first_order_correction_is_zero(&self, tol: f64) -> bool {
        self.correction
            .iter()
            .all(|s| s.homogeneous_part(1).is_negligible(tol))
    }
}
