//! Polarized Hodge structures in an adapted basis.
//!
//! Coordinates are always taken in a reference basis adapted to the Hodge
//! decomposition, ordered from `H^{n,0}` down to `H^{0,n}`. Complex
//! conjugation is the antilinear involution that conjugates coordinates and
//! sends the `k`-th basis vector of `H^{p,q}` to the `k`-th basis vector of
//! `H^{q,p}` (so `[Ω] ↔ [Ω̄]`, `[η_i] ↔ [η̄_i]`).
//!
//! The polarization is stored both as the bilinear form `Q` and as
//! `Q̃ = (√−1)^n Q`. The Hermitian pairing used throughout the crate is
//! `h(u, v) = Q̃(u, v̄)`, which has sign `(−1)^q` on `H^{p,q}`.

use thiserror::Error;

use crate::linalg::{dot, Matrix};
use crate::scalar::{i_pow, Scalar};

/// Default relative tolerance for floating-point decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeError {
    #[error("({p},{q}) is not a Hodge type of weight {weight}")]
    WrongType { p: usize, q: usize, weight: usize },
    #[error("filtration basis matrix is singular")]
    SingularBasis,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("H^{{{p},{q}}} has dimension {found}, expected h^{{{p},{q}}} = {expected}")]
    DimensionMismatch {
        p: usize,
        q: usize,
        expected: usize,
        found: usize,
    },
    #[error("the computed H^{{p,q}} do not span the whole space (rank {rank} of {total})")]
    NotDirectSum { rank: usize, total: usize },
    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),
    #[error("invalid Hodge numbers: {0}")]
    InvalidHodgeNumbers(String),
}

/// Hodge numbers of a weight-`n` structure together with its real structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeData {
    weight: usize,
    /// `h^{n,0}, h^{n−1,1}, …, h^{0,n}`.
    hodge_numbers: Vec<usize>,
    /// Basis index of the conjugate of each basis vector.
    conjugation: Vec<usize>,
}

impl HodgeData {
    /// Hodge data with the mirror real structure.
    pub fn new(weight: usize, hodge_numbers: Vec<usize>) -> Result<Self, HodgeError> {
        if hodge_numbers.len() != weight + 1 {
            return Err(HodgeError::InvalidHodgeNumbers(format!(
                "weight {weight} needs {} Hodge numbers, got {}",
                weight + 1,
                hodge_numbers.len()
            )));
        }
        for p in 0..=weight {
            if hodge_numbers[weight - p] != hodge_numbers[p] {
                return Err(HodgeError::InvalidHodgeNumbers(
                    "Hodge symmetry h^{p,q} = h^{q,p} fails".into(),
                ));
            }
        }
        let mut data = HodgeData {
            weight,
            hodge_numbers,
            conjugation: Vec::new(),
        };
        data.conjugation = data.mirror_conjugation();
        Ok(data)
    }

    /// Replaces the real structure by an explicit involution of basis indices.
    pub fn with_conjugation(mut self, conjugation: Vec<usize>) -> Result<Self, HodgeError> {
        let n = self.total_dim();
        if conjugation.len() != n
            || conjugation.iter().any(|&c| c >= n)
            || (0..n).any(|a| conjugation[conjugation[a]] != a)
        {
            return Err(HodgeError::InvalidHodgeNumbers(
                "conjugation must be an involution of basis indices".into(),
            ));
        }
        for p in 0..=self.weight {
            let q = self.weight - p;
            for a in self.block(p) {
                if !self.block(q).contains(&conjugation[a]) {
                    return Err(HodgeError::InvalidHodgeNumbers(format!(
                        "conjugation must map H^{{{p},{q}}} to H^{{{q},{p}}}"
                    )));
                }
            }
        }
        self.conjugation = conjugation;
        Ok(self)
    }

    /// Calabi–Yau threefold type: weight 3, numbers `1, N, N, 1`.
    pub fn cy3(n_moduli: usize) -> Self {
        Self::new(3, vec![1, n_moduli, n_moduli, 1]).expect("valid CY3 Hodge numbers")
    }

    /// Hyperkähler type: weight 2, numbers `1, N, 1`.
    pub fn hyperkahler(n_moduli: usize) -> Self {
        Self::new(2, vec![1, n_moduli, 1]).expect("valid HK Hodge numbers")
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    /// `h^{p, n−p}`.
    pub fn h(&self, p: usize) -> usize {
        self.hodge_numbers[self.weight - p]
    }

    pub fn hodge_numbers(&self) -> &[usize] {
        &self.hodge_numbers
    }

    pub fn conjugation(&self) -> &[usize] {
        &self.conjugation
    }

    /// `f^k = Σ_{i ≥ k} h^{i, n−i}`.
    pub fn f(&self, k: usize) -> usize {
        if k > self.weight {
            return 0;
        }
        (k..=self.weight).map(|i| self.h(i)).sum()
    }

    pub fn total_dim(&self) -> usize {
        self.f(0)
    }

    /// Basis indices of the reference `H^{p, n−p}` block.
    pub fn block(&self, p: usize) -> std::ops::Range<usize> {
        let start = self.f(p + 1);
        start..start + self.h(p)
    }

    /// Hodge type `p` of reference basis vector `a`.
    pub fn type_of_index(&self, a: usize) -> usize {
        (0..=self.weight)
            .find(|&p| self.block(p).contains(&a))
            .expect("index inside the basis")
    }

    fn mirror_conjugation(&self) -> Vec<usize> {
        let mut conj = vec![0; self.total_dim()];
        for p in 0..=self.weight {
            let q = self.weight - p;
            for (k, a) in self.block(p).enumerate() {
                conj[a] = self.block(q).start + k;
            }
        }
        conj
    }

    /// Conjugate of a coordinate vector under the real structure.
    pub fn conj_vec<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        (0..v.len()).map(|b| v[self.conjugation[b]].conj()).collect()
    }

    /// Columnwise conjugate.
    pub fn conj_matrix<S: Scalar>(&self, m: &Matrix<S>) -> Matrix<S> {
        Matrix::from_fn(m.rows(), m.cols(), |r, c| m[(self.conjugation[r], c)].conj())
    }
}

/// Multiplies a vector of Hodge type `(p, q)` by the Weil operator, `(√−1)^{p−q}`.
pub fn weil_apply<S: Scalar>(
    hodge: &HodgeData,
    v: &[S],
    p: usize,
    q: usize,
) -> Result<Vec<S>, HodgeError> {
    if p + q != hodge.weight {
        return Err(HodgeError::WrongType {
            p,
            q,
            weight: hodge.weight,
        });
    }
    let c: S = i_pow(p as i64 - q as i64);
    Ok(v.iter().map(|x| x.clone() * c.clone()).collect())
}

/// The polarization `Q` together with `Q̃ = (√−1)^n Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarizationForm<S> {
    weight: usize,
    gram_q: Matrix<S>,
    gram_qtilde: Matrix<S>,
}

impl<S: Scalar> PolarizationForm<S> {
    pub fn from_q(weight: usize, gram_q: Matrix<S>) -> Self {
        let gram_qtilde = gram_q.scale(&i_pow(weight as i64));
        PolarizationForm {
            weight,
            gram_q,
            gram_qtilde,
        }
    }

    pub fn from_qtilde(weight: usize, gram_qtilde: Matrix<S>) -> Self {
        let gram_q = gram_qtilde.scale(&i_pow(-(weight as i64)));
        PolarizationForm {
            weight,
            gram_q,
            gram_qtilde,
        }
    }

    /// Reference Calabi–Yau threefold polarization: `Q̃` has the
    /// anti-diagonal block Gram matrix with blocks `1, −I_N, I_N, −1`.
    pub fn cy3_reference(n_moduli: usize) -> Self {
        let d = 2 * n_moduli + 2;
        let mut m = Matrix::zeros(d, d);
        m[(0, d - 1)] = S::one();
        m[(d - 1, 0)] = -S::one();
        for i in 0..n_moduli {
            m[(1 + i, 1 + n_moduli + i)] = -S::one();
            m[(1 + n_moduli + i, 1 + i)] = S::one();
        }
        Self::from_qtilde(3, m)
    }

    /// Reference weight-2 hyperkähler polarization:
    /// `Q(Ω, Ω̄) = −1`, `Q(η_i, η_j) = δ_ij`.
    pub fn hyperkahler_reference(n_moduli: usize) -> Self {
        let d = n_moduli + 2;
        let mut m = Matrix::zeros(d, d);
        m[(0, d - 1)] = -S::one();
        m[(d - 1, 0)] = -S::one();
        for i in 0..n_moduli {
            m[(1 + i, 1 + i)] = S::one();
        }
        Self::from_q(2, m)
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn gram_q(&self) -> &Matrix<S> {
        &self.gram_q
    }

    pub fn gram_qtilde(&self) -> &Matrix<S> {
        &self.gram_qtilde
    }

    pub fn dim(&self) -> usize {
        self.gram_q.rows()
    }

    /// `Q(u, v)`.
    pub fn q(&self, u: &[S], v: &[S]) -> S {
        dot(u, &self.gram_q.mul_vec(v))
    }

    /// `Q̃(u, v)`, bilinear.
    pub fn qtilde(&self, u: &[S], v: &[S]) -> S {
        dot(u, &self.gram_qtilde.mul_vec(v))
    }

    /// `h(u, v) = Q̃(u, v̄)`.
    pub fn hermitian(&self, hodge: &HodgeData, u: &[S], v: &[S]) -> S {
        self.qtilde(u, &hodge.conj_vec(v))
    }

    /// Matrix of `h` in the reference basis: `h(u, v) = uᵀ H v̄` entrywise.
    pub fn hermitian_matrix(&self, hodge: &HodgeData) -> Matrix<S> {
        let d = self.dim();
        // h(e_a, e_b) = Q̃(e_a, e_{σ(b)})
        Matrix::from_fn(d, d, |a, b| self.gram_qtilde[(a, hodge.conjugation()[b])].clone())
    }

    /// Checks symmetry, nondegeneracy and reality of `Q` with respect to
    /// the real structure of `hodge`.
    pub fn validate(&self, hodge: &HodgeData, tol: f64) -> Result<(), HodgeError> {
        let d = hodge.total_dim();
        if self.gram_q.shape() != (d, d) {
            return Err(HodgeError::Shape(format!(
                "Gram matrix is {:?}, Hodge data needs {d}x{d}",
                self.gram_q.shape()
            )));
        }
        if self.weight != hodge.weight() {
            return Err(HodgeError::InvalidPolarization(format!(
                "polarization weight {} differs from Hodge weight {}",
                self.weight,
                hodge.weight()
            )));
        }
        let sign: S = if self.weight.is_multiple_of(2) { S::one() } else { -S::one() };
        let sym = &self.gram_q.transpose().scale(&sign) - &self.gram_q;
        if !sym.is_zero(tol) {
            return Err(HodgeError::InvalidPolarization(format!(
                "Q is not {}symmetric",
                if self.weight.is_multiple_of(2) { "" } else { "skew-" }
            )));
        }
        if self.gram_q.inverse(tol).is_none() {
            return Err(HodgeError::InvalidPolarization("Q is degenerate".into()));
        }
        let sigma = hodge.conjugation();
        let real = Matrix::from_fn(d, d, |a, b| {
            self.gram_q[(sigma[a], sigma[b])].clone() - self.gram_q[(a, b)].conj()
        });
        if !real.is_zero(tol) {
            return Err(HodgeError::InvalidPolarization(
                "Q is not real: Q(ū, v̄) ≠ conj Q(u, v)".into(),
            ));
        }
        Ok(())
    }

    /// True when `h` restricted to each reference block is definite with
    /// sign `(−1)^q` and the blocks are mutually orthogonal.
    pub fn alternating_signs_on_reference(&self, hodge: &HodgeData, tol: f64) -> bool {
        let h = self.hermitian_matrix(hodge);
        let n = hodge.weight();
        for p in 0..=n {
            let q = n - p;
            let block = hodge.block(p);
            let sign: S = if q.is_multiple_of(2) { S::one() } else { -S::one() };
            let sub = Matrix::from_fn(block.len(), block.len(), |a, b| {
                h[(block.start + a, block.start + b)].clone() * sign.clone()
            });
            if !sub.is_hermitian_positive_definite(tol) {
                return false;
            }
            for p2 in 0..=n {
                if p2 == p {
                    continue;
                }
                for a in hodge.block(p) {
                    for b in hodge.block(p2) {
                        if !h[(a, b)].is_negligible(tol) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A point of the compact dual: the leading `f^k` columns of `basis`
/// span `F^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeFiltration<S> {
    basis: Matrix<S>,
}

impl<S: Scalar> HodgeFiltration<S> {
    pub fn new(basis: Matrix<S>) -> Self {
        HodgeFiltration { basis }
    }

    /// The reference filtration: the identity basis.
    pub fn reference(hodge: &HodgeData) -> Self {
        HodgeFiltration {
            basis: Matrix::identity(hodge.total_dim()),
        }
    }

    pub fn basis(&self) -> &Matrix<S> {
        &self.basis
    }

    /// Column basis of `F^k`.
    pub fn f_space(&self, hodge: &HodgeData, k: usize) -> Matrix<S> {
        self.basis.leading_columns(hodge.f(k))
    }

    /// Block boundaries `f^n ≤ f^{n−1} ≤ … ≤ f^0`.
    pub fn block_boundaries(&self, hodge: &HodgeData) -> Vec<usize> {
        (0..=hodge.weight()).rev().map(|k| hodge.f(k)).collect()
    }

    /// New filtration whose `a`-th basis vector is `Σ_b g[a][b] · (b-th basis vector)`,
    /// i.e. `basis · gᵀ`. This is how `σ(t)` and `exp(Σ τ_i E_i)` act.
    pub fn transformed_by_rows(&self, g: &Matrix<S>) -> Self {
        HodgeFiltration {
            basis: &self.basis * &g.transpose(),
        }
    }
}

/// Outcome of the Hodge–Riemann bilinear relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HodgeRiemannVerdict {
    /// Both relations hold: a point of the period domain `D`.
    InD,
    /// Only the isotropy relation holds: a point of `Ď` outside `D`.
    InDualOnly,
    /// The isotropy relation fails.
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HodgeRiemannReport {
    pub verdict: HodgeRiemannVerdict,
    /// `max |Q(F^k, F^{n−k+1})|`.
    pub isotropy_residual: f64,
    /// Per `p` (from `n` down to `0`): whether `Q(C·, ·̄)` is positive definite on `H^{p,q}`.
    pub positivity: Vec<bool>,
    /// Set when the `H^{p,q}` could not be formed with the right dimensions.
    pub component_error: Option<HodgeError>,
}

fn check_shapes<S: Scalar>(
    f: &HodgeFiltration<S>,
    hodge: &HodgeData,
    pol: &PolarizationForm<S>,
) -> Result<(), HodgeError> {
    let d = hodge.total_dim();
    if f.basis.shape() != (d, d) || pol.dim() != d {
        return Err(HodgeError::Shape(format!(
            "basis {:?}, polarization {}x{}, Hodge data needs {d}",
            f.basis.shape(),
            pol.dim(),
            pol.dim()
        )));
    }
    Ok(())
}

/// Intersection of two column spaces, as columns.
pub fn intersect<S: Scalar>(u: &Matrix<S>, w: &Matrix<S>, tol: f64) -> Matrix<S> {
    if u.cols() == 0 || w.cols() == 0 {
        return Matrix::zeros(u.rows(), 0);
    }
    let stacked = u.hstack(&-w);
    let ns = stacked.null_space(tol);
    let coeffs = Matrix::from_fn(u.cols(), ns.cols(), |r, c| ns[(r, c)].clone());
    let raw = u * &coeffs;
    // Drop dependent columns so the result is a basis.
    let mut cols: Vec<Vec<S>> = Vec::new();
    for c in 0..raw.cols() {
        let mut trial = cols.clone();
        trial.push(raw.column(c));
        if Matrix::from_columns(&trial).rank(tol) == trial.len() {
            cols = trial;
        }
    }
    if cols.is_empty() {
        Matrix::zeros(u.rows(), 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Bases of `H^{p,q} = F^p ∩ conj(F^q)`, listed from `p = n` down to `p = 0`.
pub fn hodge_components<S: Scalar>(
    f: &HodgeFiltration<S>,
    hodge: &HodgeData,
    tol: f64,
) -> Result<Vec<Matrix<S>>, HodgeError> {
    let n = hodge.weight();
    let mut out = Vec::with_capacity(n + 1);
    for p in (0..=n).rev() {
        let q = n - p;
        let fp = f.f_space(hodge, p);
        let fq_bar = hodge.conj_matrix(&f.f_space(hodge, q));
        let comp = intersect(&fp, &fq_bar, tol);
        if comp.cols() != hodge.h(p) {
            return Err(HodgeError::DimensionMismatch {
                p,
                q,
                expected: hodge.h(p),
                found: comp.cols(),
            });
        }
        out.push(comp);
    }
    let all = out
        .iter()
        .skip(1)
        .fold(out[0].clone(), |acc, m| acc.hstack(m));
    let rank = all.rank(tol);
    if rank != hodge.total_dim() {
        return Err(HodgeError::NotDirectSum {
            rank,
            total: hodge.total_dim(),
        });
    }
    Ok(out)
}

/// Gram matrix of `Q(C·, ·̄)` on a subspace of type `(p, q)`.
pub fn weil_gram<S: Scalar>(
    pol: &PolarizationForm<S>,
    hodge: &HodgeData,
    basis: &Matrix<S>,
    p: usize,
) -> Matrix<S> {
    let q = hodge.weight() - p;
    let c: S = i_pow(p as i64 - q as i64);
    let conj = hodge.conj_matrix(basis);
    let qm = &(&basis.transpose() * pol.gram_q()) * &conj;
    qm.scale(&c)
}

/// Decides membership in `D`, `Ď` by the two Hodge–Riemann bilinear relations.
pub fn check_hodge_riemann<S: Scalar>(
    f: &HodgeFiltration<S>,
    pol: &PolarizationForm<S>,
    hodge: &HodgeData,
    tol: f64,
) -> Result<HodgeRiemannReport, HodgeError> {
    check_shapes(f, hodge, pol)?;
    if f.basis.inverse(tol).is_none() {
        return Err(HodgeError::SingularBasis);
    }
    let n = hodge.weight();
    let scale = f.basis.max_abs().max(1.0).powi(2) * pol.gram_q().max_abs().max(1.0);
    let mut residual: f64 = 0.0;
    let mut isotropic = true;
    for k in 1..=n {
        let a = f.f_space(hodge, k);
        let b = f.f_space(hodge, n - k + 1);
        let prod = &(&a.transpose() * pol.gram_q()) * &b;
        residual = residual.max(prod.max_abs());
        isotropic &= prod.is_zero(tol * scale);
    }
    if !isotropic {
        return Ok(HodgeRiemannReport {
            verdict: HodgeRiemannVerdict::Outside,
            isotropy_residual: residual,
            positivity: Vec::new(),
            component_error: None,
        });
    }
    let comps = match hodge_components(f, hodge, tol) {
        Ok(c) => c,
        Err(e) => {
            return Ok(HodgeRiemannReport {
                verdict: HodgeRiemannVerdict::InDualOnly,
                isotropy_residual: residual,
                positivity: Vec::new(),
                component_error: Some(e),
            })
        }
    };
    let positivity: Vec<bool> = comps
        .iter()
        .enumerate()
        .map(|(idx, basis)| {
            let p = n - idx;
            weil_gram(pol, hodge, basis, p).is_hermitian_positive_definite(tol)
        })
        .collect();
    let verdict = if positivity.iter().all(|&b| b) {
        HodgeRiemannVerdict::InD
    } else {
        HodgeRiemannVerdict::InDualOnly
    };
    Ok(HodgeRiemannReport {
        verdict,
        isotropy_residual: residual,
        positivity,
        component_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Cq, C64};
    use num::{One, Zero};

    #[test]
    fn weil_operator_powers() {
        let cy = HodgeData::cy3(1);
        let v = vec![Cq::from_i64(2)];
        assert_eq!(weil_apply(&cy, &v, 2, 1).unwrap(), vec![Cq::i() * Cq::from_i64(2)]);
        let hk = HodgeData::hyperkahler(1);
        assert_eq!(weil_apply(&hk, &v, 1, 1).unwrap(), v);
        assert_eq!(weil_apply(&hk, &v, 2, 0).unwrap(), vec![-Cq::from_i64(2)]);
        assert!(matches!(
            weil_apply(&hk, &v, 2, 1),
            Err(HodgeError::WrongType { .. })
        ));
    }

    #[test]
    fn filtration_dims() {
        let h = HodgeData::cy3(3);
        assert_eq!((h.f(3), h.f(2), h.f(1), h.f(0)), (1, 4, 7, 8));
        assert_eq!(h.block(1), 4..7);
        assert_eq!(h.conjugation()[1], 4);
        assert_eq!(h.conjugation()[7], 0);
        let f = HodgeFiltration::<Cq>::reference(&h);
        assert_eq!(f.block_boundaries(&h), vec![1, 4, 7, 8]);
        assert!(HodgeData::new(3, vec![1, 2, 1, 1]).is_err());
    }

    #[test]
    fn reference_polarizations_are_valid() {
        for n in 1..4 {
            let h = HodgeData::cy3(n);
            let p = PolarizationForm::<Cq>::cy3_reference(n);
            p.validate(&h, 0.0).unwrap();
            assert!(p.alternating_signs_on_reference(&h, 0.0));
            let h = HodgeData::hyperkahler(n);
            let p = PolarizationForm::<Cq>::hyperkahler_reference(n);
            p.validate(&h, 0.0).unwrap();
            assert!(p.alternating_signs_on_reference(&h, 0.0));
        }
    }

    #[test]
    fn cy3_reference_is_in_d_exactly() {
        let h = HodgeData::cy3(2);
        let p = PolarizationForm::<Cq>::cy3_reference(2);
        let f = HodgeFiltration::reference(&h);
        let r = check_hodge_riemann(&f, &p, &h, 0.0).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InD);
        assert_eq!(r.isotropy_residual, 0.0);
        let dims: Vec<usize> = hodge_components(&f, &h, 0.0)
            .unwrap()
            .iter()
            .map(Matrix::cols)
            .collect();
        assert_eq!(dims, vec![1, 2, 2, 1]);
    }

    #[test]
    fn mixing_an_f2_column_with_its_conjugate_fails_positivity() {
        let h = HodgeData::cy3(1);
        let p = PolarizationForm::<Cq>::cy3_reference(1);
        let mut b = Matrix::<Cq>::identity(4);
        // η₁ ↦ η₁ + η̄₁: still Lagrangian, since Q is alternating
        b[(2, 1)] = Cq::one();
        let r = check_hodge_riemann(&HodgeFiltration::new(b), &p, &h, 0.0).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InDualOnly);
        assert_eq!(r.isotropy_residual, 0.0);
    }

    #[test]
    fn tilting_f2_towards_omega_bar_breaks_isotropy() {
        let h = HodgeData::cy3(1);
        let p = PolarizationForm::<Cq>::cy3_reference(1);
        let mut b = Matrix::<Cq>::identity(4);
        // η₁ ↦ η₁ + Ω̄
        b[(3, 1)] = Cq::one();
        let r = check_hodge_riemann(&HodgeFiltration::new(b), &p, &h, 0.0).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::Outside);
        assert!(r.isotropy_residual > 0.0);
    }

    #[test]
    fn swapping_eta_and_its_conjugate_stays_in_compact_dual() {
        let h = HodgeData::cy3(1);
        let p = PolarizationForm::<Cq>::cy3_reference(1);
        let mut b = Matrix::<Cq>::zeros(4, 4);
        b[(0, 0)] = Cq::one();
        b[(2, 1)] = Cq::one();
        b[(1, 2)] = Cq::one();
        b[(3, 3)] = Cq::one();
        let r = check_hodge_riemann(&HodgeFiltration::new(b), &p, &h, 0.0).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InDualOnly);
    }

    #[test]
    fn hyperkahler_reference_components() {
        let h = HodgeData::hyperkahler(3);
        let p = PolarizationForm::<C64>::hyperkahler_reference(3);
        let f = HodgeFiltration::reference(&h);
        let dims: Vec<usize> = hodge_components(&f, &h, DEFAULT_TOL)
            .unwrap()
            .iter()
            .map(Matrix::cols)
            .collect();
        assert_eq!(dims, vec![1, 3, 1]);
        let r = check_hodge_riemann(&f, &p, &h, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, HodgeRiemannVerdict::InD);
    }

    #[test]
    fn degenerate_filtration_reports_dimension_mismatch() {
        // F² spanned by Ω and Ω̄: F² ∩ conj(F⁰) is fine but F¹ ∩ conj(F¹) jumps.
        let h = HodgeData::hyperkahler(1);
        let mut b = Matrix::<Cq>::zeros(3, 3);
        b[(0, 0)] = Cq::one();
        b[(2, 1)] = Cq::one();
        b[(1, 2)] = Cq::one();
        let err = hodge_components(&HodgeFiltration::new(b), &h, 0.0).unwrap_err();
        assert!(matches!(err, HodgeError::DimensionMismatch { .. }));
    }

    #[test]
    fn singular_basis_is_an_error() {
        let h = HodgeData::cy3(1);
        let p = PolarizationForm::<Cq>::cy3_reference(1);
        let b = Matrix::<Cq>::zeros(4, 4);
        assert_eq!(
            check_hodge_riemann(&HodgeFiltration::new(b), &p, &h, 0.0).unwrap_err(),
            HodgeError::SingularBasis
        );
        assert!(Cq::zero().is_zero());
    }
}
