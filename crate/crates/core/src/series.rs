//! Truncated multivariate power series in `t = (t_1..t_N)` and `t̄`.
//!
//! A series is a map from a pair of multi-indices `(I, J)`, standing for the
//! monomial `t^I t̄^J`, to a coefficient. Coefficients are scalars, vectors
//! or matrices of a fixed [`Shape`]. Only monomials with `|I| + |J| <=
//! max_order` are ever stored, and absent keys are zero.
//!
//! ```
//! use hodge_wp::series::{TruncatedSeries, VarKind};
//! use hodge_wp::scalar::{Cq, Scalar};
//!
//! // (1 + t) (1 + t̄) = 1 + t + t̄ + t t̄
//! let one = TruncatedSeries::<Cq>::one(1, 4);
//! let t = TruncatedSeries::variable(1, 4, 0, VarKind::Holo);
//! let tb = TruncatedSeries::variable(1, 4, 0, VarKind::Anti);
//! let p = one.add(&t).unwrap().mul(&one.add(&tb).unwrap()).unwrap();
//! assert_eq!(p.scalar_coeff(&[1], &[1]), Cq::from_i64(1));
//! assert_eq!(p.len(), 4);
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("num_vars mismatch: {left} vs {right}")]
    NumVars { left: usize, right: usize },
    #[error("max_order mismatch: {left} vs {right}")]
    MaxOrder { left: usize, right: usize },
    #[error("coefficient shape mismatch: {left:?} vs {right:?}")]
    Shape { left: Shape, right: Shape },
    #[error("constant term must be exactly 1 for log_unit (found {found})")]
    NotUnit { found: String },
    #[error("constant term must vanish for exp_nilpotent_part")]
    NonzeroConstant,
    #[error("recenter_polynomial needs an exact polynomial, this series was truncated")]
    NotPolynomial,
    #[error("point has {got} coordinates, series has {expected} variables")]
    PointDimension { expected: usize, got: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    VarIndex { index: usize, num_vars: usize },
}

/// Holomorphic (`t_i`) or antiholomorphic (`t̄_i`) variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Holo,
    Anti,
}

/// Exponent vector of a monomial in `N` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u16>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn new(exponents: Vec<u16>) -> Self {
        MultiIndex(exponents)
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    /// Multi-index of the monomial `t_{i_1} ⋯ t_{i_k}`.
    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut e = vec![0; n];
        for &i in indices {
            e[i] += 1;
        }
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `I!` = product of factorials of the exponents.
    pub fn factorial<S: Scalar>(&self) -> S {
        let mut f = S::one();
        for &e in &self.0 {
            for j in 2..=e as i64 {
                f = f * S::from_i64(j);
            }
        }
        f
    }

    /// Indices `i_1 ≤ … ≤ i_k` with multiplicity.
    pub fn to_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order());
        for (i, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, e as usize));
        }
        out
    }

    /// All multi-indices in `n` variables of total order exactly `d`, graded-lex.
    pub fn all_of_order(n: usize, d: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, d: usize, prefix: &mut Vec<u16>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == n - 1 {
                prefix.push(d as u16);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=d).rev() {
                prefix.push(e as u16);
                rec(n, d - e, prefix, out);
                prefix.pop();
            }
        }
        if n == 0 {
            return if d == 0 { vec![MultiIndex(vec![])] } else { vec![] };
        }
        let mut out = Vec::new();
        rec(n, d, &mut Vec::new(), &mut out);
        out
    }
}

/// Graded lexicographic: lower order first, then larger leading exponents.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The monomial `t^holo t̄^anti`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub holo: MultiIndex,
    pub anti: MultiIndex,
}

impl Monomial {
    pub fn new(holo: MultiIndex, anti: MultiIndex) -> Self {
        Monomial { holo, anti }
    }

    pub fn one(n: usize) -> Self {
        Monomial {
            holo: MultiIndex::zero(n),
            anti: MultiIndex::zero(n),
        }
    }

    pub fn order(&self) -> usize {
        self.holo.order() + self.anti.order()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial {
            holo: self.holo.add(&other.holo),
            anti: self.anti.add(&other.anti),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.holo.cmp(&other.holo))
            .then_with(|| self.anti.cmp(&other.anti))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector(n) => n,
            Shape::Matrix(r, c) => r * c,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    /// Result shape of a coefficient product, if the shapes are compatible.
    fn product(self, rhs: Shape) -> Option<Shape> {
        match (self, rhs) {
            (Shape::Scalar, s) | (s, Shape::Scalar) => Some(s),
            (Shape::Matrix(_, c), Shape::Vector(n)) if c == n => match self {
                Shape::Matrix(r, _) => Some(Shape::Vector(r)),
                _ => None,
            },
            (Shape::Matrix(r, k1), Shape::Matrix(k2, c)) if k1 == k2 => Some(Shape::Matrix(r, c)),
            _ => None,
        }
    }
}

/// A coefficient: flat data of a given shape (matrices row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Coeff<S> {
    pub shape: Shape,
    pub data: Vec<S>,
}

impl<S: Scalar> Coeff<S> {
    pub fn zero(shape: Shape) -> Self {
        Coeff {
            shape,
            data: vec![S::zero(); shape.len()],
        }
    }

    pub fn scalar(s: S) -> Self {
        Coeff {
            shape: Shape::Scalar,
            data: vec![s],
        }
    }

    pub fn vector(v: Vec<S>) -> Self {
        Coeff {
            shape: Shape::Vector(v.len()),
            data: v,
        }
    }

    pub fn matrix(m: &Matrix<S>) -> Self {
        Coeff {
            shape: Shape::Matrix(m.rows(), m.cols()),
            data: m.entries().to_vec(),
        }
    }

    pub fn as_scalar(&self) -> S {
        debug_assert_eq!(self.shape, Shape::Scalar);
        self.data[0].clone()
    }

    pub fn to_matrix(&self) -> Matrix<S> {
        match self.shape {
            Shape::Matrix(r, c) => Matrix::from_fn(r, c, |i, j| self.data[i * c + j].clone()),
            Shape::Vector(n) => Matrix::from_fn(n, 1, |i, _| self.data[i].clone()),
            Shape::Scalar => Matrix::from_fn(1, 1, |_, _| self.data[0].clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(tol))
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = a.clone() + b.clone();
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Coeff {
            shape: self.shape,
            data: self.data.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    fn conj(&self) -> Self {
        Coeff {
            shape: self.shape,
            data: self.data.iter().map(Scalar::conj).collect(),
        }
    }

    fn product(&self, rhs: &Self) -> Self {
        match (self.shape, rhs.shape) {
            (Shape::Scalar, _) => rhs.scale(&self.data[0]),
            (_, Shape::Scalar) => self.scale(&rhs.data[0]),
            (Shape::Matrix(r, k), Shape::Vector(_)) => {
                let data = (0..r)
                    .map(|i| {
                        (0..k).fold(S::zero(), |acc, j| {
                            acc + self.data[i * k + j].clone() * rhs.data[j].clone()
                        })
                    })
                    .collect();
                Coeff {
                    shape: Shape::Vector(r),
                    data,
                }
            }
            (Shape::Matrix(_, _), Shape::Matrix(_, _)) => {
                Coeff::matrix(&(&self.to_matrix() * &rhs.to_matrix()))
            }
            _ => unreachable!("shape compatibility is checked before multiplying"),
        }
    }
}

/// A truncated power series in `t, t̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<S> {
    num_vars: usize,
    max_order: usize,
    shape: Shape,
    terms: BTreeMap<Monomial, Coeff<S>>,
    polynomial: bool,
}

impl<S: Scalar> TruncatedSeries<S> {
    pub fn zero(num_vars: usize, max_order: usize, shape: Shape) -> Self {
        TruncatedSeries {
            num_vars,
            max_order,
            shape,
            terms: BTreeMap::new(),
            polynomial: true,
        }
    }

    pub fn one(num_vars: usize, max_order: usize) -> Self {
        Self::constant(num_vars, max_order, Coeff::scalar(S::one()))
    }

    pub fn constant(num_vars: usize, max_order: usize, c: Coeff<S>) -> Self {
        let mut s = Self::zero(num_vars, max_order, c.shape);
        s.insert(Monomial::one(num_vars), c);
        s
    }

    /// The series `t_i` or `t̄_i`.
    pub fn variable(num_vars: usize, max_order: usize, i: usize, kind: VarKind) -> Self {
        let mut s = Self::zero(num_vars, max_order, Shape::Scalar);
        let e = MultiIndex::unit(num_vars, i);
        let z = MultiIndex::zero(num_vars);
        let m = match kind {
            VarKind::Holo => Monomial::new(e, z),
            VarKind::Anti => Monomial::new(z, e),
        };
        s.insert(m, Coeff::scalar(S::one()));
        s
    }

    /// Builds a series from explicit terms. Terms above `max_order` are
    /// dropped, and then the series is no longer an exact polynomial.
    pub fn from_terms(
        num_vars: usize,
        max_order: usize,
        shape: Shape,
        terms: impl IntoIterator<Item = (Monomial, Coeff<S>)>,
    ) -> Self {
        let mut s = Self::zero(num_vars, max_order, shape);
        for (m, c) in terms {
            assert_eq!(c.shape, shape, "term shape differs from series shape");
            assert_eq!(m.holo.len(), num_vars);
            s.accumulate(m, c);
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// True when no nonzero term was ever dropped by truncation.
    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff<S>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff<S> {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| Coeff::zero(self.shape))
    }

    /// Coefficient of `t^holo t̄^anti` for exponent slices.
    pub fn coeff_at(&self, holo: &[u16], anti: &[u16]) -> Coeff<S> {
        self.coeff(&Monomial::new(
            MultiIndex::new(holo.to_vec()),
            MultiIndex::new(anti.to_vec()),
        ))
    }

    pub fn scalar_coeff(&self, holo: &[u16], anti: &[u16]) -> S {
        self.coeff_at(holo, anti).as_scalar()
    }

    pub fn constant_term(&self) -> Coeff<S> {
        self.coeff(&Monomial::one(self.num_vars))
    }

    fn insert(&mut self, m: Monomial, c: Coeff<S>) {
        if m.order() > self.max_order {
            if !c.is_zero() {
                self.polynomial = false;
            }
            return;
        }
        if c.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    fn accumulate(&mut self, m: Monomial, c: Coeff<S>) {
        if m.order() > self.max_order {
            if !c.is_zero() {
                self.polynomial = false;
            }
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                existing.add_assign(&c);
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.num_vars != other.num_vars {
            return Err(SeriesError::NumVars {
                left: self.num_vars,
                right: other.num_vars,
            });
        }
        if self.max_order != other.max_order {
            return Err(SeriesError::MaxOrder {
                left: self.max_order,
                right: other.max_order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        if self.shape != other.shape {
            return Err(SeriesError::Shape {
                left: self.shape,
                right: other.shape,
            });
        }
        let mut out = self.clone();
        out.polynomial &= other.polynomial;
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.num_vars, self.max_order, self.shape);
        out.polynomial = self.polynomial;
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.scale(s));
        }
        out
    }

    /// Cauchy product truncated at `max_order`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let shape = self
            .shape
            .product(other.shape)
            .ok_or(SeriesError::Shape {
                left: self.shape,
                right: other.shape,
            })?;
        let mut out = Self::zero(self.num_vars, self.max_order, shape);
        out.polynomial = self.polynomial && other.polynomial;
        for (ma, ca) in &self.terms {
            let oa = ma.order();
            for (mb, cb) in &other.terms {
                if oa + mb.order() > self.max_order {
                    out.polynomial = false;
                    continue;
                }
                out.accumulate(ma.mul(mb), ca.product(cb));
            }
        }
        Ok(out)
    }

    /// Scalar series `Σ f(a_I, b_J) t^(I+J)` for vector-valued `self = Σ a_I t^I`
    /// and `other = Σ b_J t^J`, truncated like a product.
    pub fn pair_with(
        &self,
        other: &Self,
        mut f: impl FnMut(&[S], &[S]) -> S,
    ) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.num_vars, self.max_order, Shape::Scalar);
        out.polynomial = self.polynomial && other.polynomial;
        for (ma, ca) in &self.terms {
            let oa = ma.order();
            for (mb, cb) in &other.terms {
                if oa + mb.order() > self.max_order {
                    out.polynomial = false;
                    continue;
                }
                out.accumulate(ma.mul(mb), Coeff::scalar(f(&ca.data, &cb.data)));
            }
        }
        Ok(out)
    }

    /// Lowers the truncation order, dropping higher terms.
    pub fn truncate(&self, max_order: usize) -> Self {
        let mut out = Self::zero(self.num_vars, max_order, self.shape);
        out.polynomial = self.polynomial;
        for (m, c) in &self.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    /// Raises the truncation bound without inventing terms; the result is
    /// only meaningful up to the old order unless the series is a polynomial.
    pub fn with_max_order(&self, max_order: usize) -> Self {
        if max_order <= self.max_order {
            return self.truncate(max_order);
        }
        let mut out = self.clone();
        out.max_order = max_order;
        out
    }

    /// Terms of total order exactly `d`.
    pub fn homogeneous_part(&self, d: usize) -> Self {
        let mut out = Self::zero(self.num_vars, self.max_order, self.shape);
        for (m, c) in self.terms.iter().filter(|(m, _)| m.order() == d) {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    /// Terms with holomorphic order `p` and antiholomorphic order `q`.
    pub fn bidegree_part(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.num_vars, self.max_order, self.shape);
        for (m, c) in &self.terms {
            if m.holo.order() == p && m.anti.order() == q {
                out.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|c| c.data.iter())
            .map(Scalar::magnitude)
            .fold(0.0, f64::max)
    }

    /// Lowest total order carrying a nonzero term.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::order).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::order).max()
    }

    /// `conj(s)`: swaps `t` and `t̄` and conjugates coefficients, so that
    /// `eval(conj(s), p) = conj(eval(s, p))`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.num_vars, self.max_order, self.shape);
        out.polynomial = self.polynomial;
        for (m, c) in &self.terms {
            out.insert(Monomial::new(m.anti.clone(), m.holo.clone()), c.conj());
        }
        out
    }

    /// Maps every coefficient through `f`, which may change the shape.
    pub fn map_coeffs(&self, shape: Shape, mut f: impl FnMut(&Coeff<S>) -> Coeff<S>) -> Self {
        let mut out = Self::zero(self.num_vars, self.max_order, shape);
        out.polynomial = self.polynomial;
        for (m, c) in &self.terms {
            let v = f(c);
            assert_eq!(v.shape, shape);
            out.insert(m.clone(), v);
        }
        out
    }

    /// Scalar component `k` of a vector/matrix-valued series.
    pub fn component(&self, k: usize) -> Self {
        self.map_coeffs(Shape::Scalar, |c| Coeff::scalar(c.data[k].clone()))
    }

    /// Formal partial derivative. The result is truncated one order lower.
    pub fn derivative(&self, var: usize, kind: VarKind) -> Result<Self, SeriesError> {
        if var >= self.num_vars {
            return Err(SeriesError::VarIndex {
                index: var,
                num_vars: self.num_vars,
            });
        }
        let new_order = self.max_order.saturating_sub(1);
        let mut out = Self::zero(self.num_vars, new_order, self.shape);
        out.polynomial = self.polynomial;
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let idx = match kind {
                VarKind::Holo => &mut m2.holo.0,
                VarKind::Anti => &mut m2.anti.0,
            };
            let e = idx[var];
            if e == 0 {
                continue;
            }
            idx[var] = e - 1;
            out.insert(m2, c.scale(&S::from_i64(e as i64)));
        }
        Ok(out)
    }

    /// Mixed derivative `∂^holo ∂̄^anti` evaluated at the origin, read off as
    /// `coeff · holo! · anti!`.
    pub fn derivative_at_origin(&self, holo: &MultiIndex, anti: &MultiIndex) -> Coeff<S> {
        let c = self.coeff(&Monomial::new(holo.clone(), anti.clone()));
        let f = holo.factorial::<S>() * anti.factorial::<S>();
        c.scale(&f)
    }

    /// Substitutes `t_i := p_i`, `t̄_i := conj(p_i)`.
    pub fn eval(&self, point: &[S]) -> Result<Coeff<S>, SeriesError> {
        if point.len() != self.num_vars {
            return Err(SeriesError::PointDimension {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let conj: Vec<S> = point.iter().map(Scalar::conj).collect();
        let mut acc = Coeff::zero(self.shape);
        for (m, c) in &self.terms {
            let mut w = S::one();
            for i in 0..self.num_vars {
                w = w * point[i].pow_u(m.holo.0[i] as usize) * conj[i].pow_u(m.anti.0[i] as usize);
            }
            acc.add_assign(&c.scale(&w));
        }
        Ok(acc)
    }

    /// Rewrites an exact polynomial in the shifted variables `s = t − center`.
    pub fn recenter_polynomial(&self, center: &[S]) -> Result<Self, SeriesError> {
        self.recenter_truncated(center, self.max_order)
    }

    /// Like [`recenter_polynomial`](Self::recenter_polynomial), keeping only
    /// the shifted terms up to order `max_order`.
    pub fn recenter_truncated(&self, center: &[S], max_order: usize) -> Result<Self, SeriesError> {
        if !self.polynomial {
            return Err(SeriesError::NotPolynomial);
        }
        if center.len() != self.num_vars {
            return Err(SeriesError::PointDimension {
                expected: self.num_vars,
                got: center.len(),
            });
        }
        let n = self.num_vars;
        // (c + s)^e expanded once per variable and exponent, reused across terms.
        let shift = |i: usize, kind: VarKind| {
            let c = match kind {
                VarKind::Holo => center[i].clone(),
                VarKind::Anti => center[i].conj(),
            };
            
            Self::constant(n, max_order, Coeff::scalar(c))
                .add(&Self::variable(n, max_order, i, kind))
                .expect("same layout")
        };
        let mut cache: BTreeMap<(usize, bool, u16), Self> = BTreeMap::new();
        let mut power = |i: usize, kind: VarKind, e: u16| -> Self {
            let key = (i, kind == VarKind::Anti, e);
            if let Some(p) = cache.get(&key) {
                return p.clone();
            }
            let base = shift(i, kind);
            let mut p = Self::one(n, max_order);
            for _ in 0..e {
                p = p.mul(&base).expect("same layout");
            }
            cache.insert(key, p.clone());
            p
        };
        let mut out = Self::zero(n, max_order, self.shape);
        for (m, c) in &self.terms {
            let mut prod = Self::one(n, max_order);
            for i in 0..n {
                if m.holo.0[i] > 0 {
                    prod = prod.mul(&power(i, VarKind::Holo, m.holo.0[i])).expect("same layout");
                }
                if m.anti.0[i] > 0 {
                    prod = prod.mul(&power(i, VarKind::Anti, m.anti.0[i])).expect("same layout");
                }
            }
            for (pm, pc) in &prod.terms {
                out.accumulate(pm.clone(), c.scale(&pc.as_scalar()));
            }
        }
        out.polynomial = self.max_degree().unwrap_or(0) <= max_order;
        Ok(out)
    }

    fn require_scalar(&self) -> Result<(), SeriesError> {
        if self.shape != Shape::Scalar {
            return Err(SeriesError::Shape {
                left: self.shape,
                right: Shape::Scalar,
            });
        }
        Ok(())
    }

    /// `log(s)` for a scalar series with constant term exactly one.
    pub fn log_unit(&self) -> Result<Self, SeriesError> {
        self.require_scalar()?;
        let c0 = self.constant_term().as_scalar();
        if !(c0.clone() - S::one()).is_zero() {
            return Err(SeriesError::NotUnit {
                found: format!("{:?}", c0.to_c64()),
            });
        }
        let x = self.sub(&Self::one(self.num_vars, self.max_order))?;
        let mut out = Self::zero(self.num_vars, self.max_order, Shape::Scalar);
        let mut power = x.clone();
        let mut k = 1i64;
        while !power.is_zero() {
            let coef = S::from_ratio(if k % 2 == 1 { 1 } else { -1 }, k);
            out = out.add(&power.scale(&coef))?;
            power = power.mul(&x)?;
            k += 1;
        }
        out.polynomial = false;
        Ok(out)
    }

    /// `exp(s)` for a scalar series without constant term.
    pub fn exp_nilpotent_part(&self) -> Result<Self, SeriesError> {
        self.require_scalar()?;
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let mut out = Self::one(self.num_vars, self.max_order);
        let mut power = self.clone();
        let mut k = 1usize;
        while !power.is_zero() {
            out = out.add(&power.scale(&S::inv_factorial(k)))?;
            power = power.mul(self)?;
            k += 1;
        }
        out.polynomial = false;
        Ok(out)
    }

    /// Multiplicative inverse of a square-matrix-valued (or scalar) series
    /// whose constant term is the identity, by the Neumann series.
    pub fn inverse_unit(&self) -> Result<Self, SeriesError> {
        let id = match self.shape {
            Shape::Scalar => Coeff::scalar(S::one()),
            Shape::Matrix(r, c) if r == c => Coeff::matrix(&Matrix::identity(r)),
            other => {
                return Err(SeriesError::Shape {
                    left: other,
                    right: Shape::Matrix(0, 0),
                })
            }
        };
        if self.constant_term() != id {
            return Err(SeriesError::NotUnit {
                found: "constant term is not the identity".into(),
            });
        }
        let one = Self::constant(self.num_vars, self.max_order, id);
        // s = 1 + x  =>  s⁻¹ = Σ (−x)^k
        let minus_x = one.sub(self)?;
        let mut out = one.clone();
        let mut power = minus_x.clone();
        while !power.is_zero() {
            out = out.add(&power)?;
            power = power.mul(&minus_x)?;
        }
        out.polynomial = false;
        Ok(out)
    }
}
