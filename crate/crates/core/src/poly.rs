//! Sparse multivariate polynomials and polynomial systems.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vector under graded
//! lexicographic order, and zero coefficients are never stored, so two
//! polynomials are equal exactly when their term maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable index {var} out of range for {nvars} variables")]
    VariableOutOfRange { var: usize, nvars: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("direction template has length {found}, expected {expected}")]
    TemplateLength { expected: usize, found: usize },
    #[error("variable names must be distinct and non-empty")]
    BadVariableNames,
}

/// An exponent vector, ordered by total degree and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn product(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial in `nvars` variables with coefficients in `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The coordinate polynomial `y_var`.
    pub fn var(nvars: usize, var: usize) -> Result<Self, PolyError> {
        if var >= nvars {
            return Err(PolyError::VariableOutOfRange { var, nvars });
        }
        let mut e = vec![0; nvars];
        e[var] = 1;
        Ok(Self::monomial(T::one(), Monomial(e)))
    }

    pub fn monomial(coef: T, mono: Monomial) -> Self {
        let mut p = Self::zero(mono.0.len());
        p.add_term(mono, coef);
        p
    }

    /// Builds a polynomial from possibly repeated terms; duplicates are summed.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, mono: Monomial, c: T) {
        if c.is_exact_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(v) => {
                *v += c;
                if v.is_exact_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &T)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> T {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// True when the polynomial mentions `var` with a positive exponent.
    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0.get(var).is_some_and(|&e| e > 0))
    }

    pub fn scale(&self, a: T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * a);
        }
        out
    }

    /// The partial derivative with respect to `var`.
    pub fn differentiate(&self, var: usize) -> Result<Self, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::VariableOutOfRange { var, nvars: self.nvars });
        }
        let mut out = Self::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[var] -= 1;
            out.add_term(Monomial(d), c * T::from_real(f64::from(e)));
        }
        Ok(out)
    }

    /// Floating-point evaluation as the plain sum of term values.
    pub fn evaluate(&self, point: &[T]) -> Result<T, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[T]) -> T {
        let mut acc = T::zero();
        for (m, &c) in &self.terms {
            let mut t = c;
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= point[v].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Re-expresses the polynomial in `new_nvars` variables, sending old
    /// variable `i` to `map[i]`.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Result<Self, PolyError> {
        if map.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: map.len(),
            });
        }
        if let Some(&var) = map.iter().find(|&&v| v >= new_nvars) {
            return Err(PolyError::VariableOutOfRange { var, nvars: new_nvars });
        }
        let mut out = Self::zero(new_nvars);
        for (m, &c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (i, &k) in m.0.iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial(e), c);
        }
        Ok(out)
    }

    /// Embeds into a larger variable set keeping variable indices unchanged.
    pub fn extend_vars(&self, new_nvars: usize) -> Result<Self, PolyError> {
        let map: Vec<usize> = (0..self.nvars).collect();
        self.embed(new_nvars, &map)
    }

    /// Sets every listed variable to zero.
    pub fn substitute_zero(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, &c) in &self.terms {
            if vars.iter().all(|&v| m.0.get(v).is_none_or(|&e| e == 0)) {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    /// Keeps only the listed variables, renumbered in the given order. Fails
    /// if the polynomial depends on a variable that is dropped.
    pub fn select_vars(&self, kept: &[usize]) -> Result<Self, PolyError> {
        if let Some(var) = (0..self.nvars).find(|v| !kept.contains(v) && self.depends_on(*v)) {
            return Err(PolyError::VariableOutOfRange { var, nvars: kept.len() });
        }
        let mut out = Self::zero(kept.len());
        for (m, &c) in &self.terms {
            out.add_term(Monomial(kept.iter().map(|&v| m.0[v]).collect()), c);
        }
        Ok(out)
    }

    /// Drops trailing variables that do not occur, returning a polynomial in
    /// the first `nvars` variables.
    pub fn truncate_vars(&self, nvars: usize) -> Result<Self, PolyError> {
        if let Some(var) = (nvars..self.nvars).find(|&v| self.depends_on(v)) {
            return Err(PolyError::VariableOutOfRange { var, nvars });
        }
        let mut out = Self::zero(nvars);
        for (m, &c) in &self.terms {
            out.add_term(Monomial(m.0[..nvars].to_vec()), c);
        }
        Ok(out)
    }

    fn check_same_ring(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different variable sets");
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_same_ring(rhs);
        let mut out = self.clone();
        for (m, &c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.check_same_ring(rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                out.add_term(ma.product(mb), ca * cb);
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Polynomial<T> {
            type Output = Polynomial<T>;

            fn $m(self, rhs: Polynomial<T>) -> Polynomial<T> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar> Neg for Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        -&self
    }
}

/// One entry of a direction vector used by [`PolySystem::jacobian_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionEntry {
    /// The constant 1.
    One,
    /// The variable with this index.
    Var(usize),
}

/// An ordered list of polynomials over shared, named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem<T> {
    polys: Vec<Polynomial<T>>,
    var_names: Vec<String>,
}

impl<T: Scalar> PolySystem<T> {
    pub fn new(polys: Vec<Polynomial<T>>, var_names: Vec<String>) -> Result<Self, PolyError> {
        let nvars = var_names.len();
        if let Some(p) = polys.iter().find(|p| p.nvars() != nvars) {
            return Err(PolyError::DimensionMismatch {
                expected: nvars,
                found: p.nvars(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        if var_names.iter().any(|n| n.is_empty() || !seen.insert(n.as_str())) {
            return Err(PolyError::BadVariableNames);
        }
        Ok(PolySystem { polys, var_names })
    }

    pub fn polys(&self) -> &[Polynomial<T>] {
        &self.polys
    }

    pub fn into_polys(self) -> Vec<Polynomial<T>> {
        self.polys
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    /// Number of equations.
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn is_square(&self) -> bool {
        self.len() == self.nvars()
    }

    /// Symbolic Jacobian, `len() × nvars()`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial<T>>> {
        self.polys
            .iter()
            .map(|p| {
                (0..self.nvars())
                    .map(|j| p.differentiate(j).expect("index within nvars"))
                    .collect()
            })
            .collect()
    }

    pub fn evaluate(&self, point: &[T]) -> Result<DVector<T>, PolyError> {
        self.check_point(point)?;
        Ok(DVector::from_iterator(
            self.len(),
            self.polys.iter().map(|p| p.eval_unchecked(point)),
        ))
    }

    pub fn jacobian_at(&self, point: &[T]) -> Result<DMatrix<T>, PolyError> {
        self.check_point(point)?;
        Ok(eval_matrix(&self.jacobian(), point))
    }

    fn check_point(&self, point: &[T]) -> Result<(), PolyError> {
        if point.len() != self.nvars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars(),
                found: point.len(),
            });
        }
        Ok(())
    }

    /// Returns `Σ_j ∂p/∂y_{diff_vars[j]} · v_j` for every equation `p`, where
    /// `v_j` is 1 or a variable according to `template`. The result lives in
    /// the same variable set as `self`.
    pub fn jacobian_apply(&self, diff_vars: &[usize], template: &[DirectionEntry]) -> Result<PolySystem<T>, PolyError> {
        if template.len() != diff_vars.len() {
            return Err(PolyError::TemplateLength {
                expected: diff_vars.len(),
                found: template.len(),
            });
        }
        let n = self.nvars();
        let factors = template
            .iter()
            .map(|t| match *t {
                DirectionEntry::One => Ok(None),
                DirectionEntry::Var(v) => Polynomial::var(n, v).map(Some),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::with_capacity(self.len());
        for p in &self.polys {
            let mut acc = Polynomial::zero(n);
            for (&var, f) in diff_vars.iter().zip(&factors) {
                let d = p.differentiate(var)?;
                if d.is_zero() {
                    continue;
                }
                acc = match f {
                    None => &acc + &d,
                    Some(f) => &acc + &(&d * f),
                };
            }
            out.push(acc);
        }
        Ok(PolySystem {
            polys: out,
            var_names: self.var_names.clone(),
        })
    }

    /// Sets the listed variables to zero in every equation.
    pub fn substitute_zero(&self, vars: &[usize]) -> PolySystem<T> {
        PolySystem {
            polys: self.polys.iter().map(|p| p.substitute_zero(vars)).collect(),
            var_names: self.var_names.clone(),
        }
    }
}

/// Evaluates a matrix of polynomials at a point.
pub fn eval_matrix<T: Scalar>(m: &[Vec<Polynomial<T>>], point: &[T]) -> DMatrix<T> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| m[i][j].eval_unchecked(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn p(nvars: usize, terms: &[(&[u32], f64)]) -> Polynomial<f64> {
        Polynomial::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    fn dz1() -> PolySystem<f64> {
        let polys = vec![
            p(4, &[(&[4, 0, 0, 0], 1.0), (&[0, 1, 1, 1], -1.0)]),
            p(4, &[(&[0, 4, 0, 0], 1.0), (&[1, 0, 1, 1], -1.0)]),
            p(4, &[(&[0, 0, 4, 0], 1.0), (&[1, 1, 0, 1], -1.0)]),
            p(4, &[(&[0, 0, 0, 4], 1.0), (&[1, 1, 1, 0], -1.0)]),
        ];
        let names = ["x1", "x2", "x3", "x4"].map(String::from).to_vec();
        PolySystem::new(polys, names).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let f = p(4, &[(&[4, 0, 0, 0], 1.0), (&[0, 1, 1, 1], -1.0)]);
        assert_eq!(f.differentiate(0).unwrap(), p(4, &[(&[3, 0, 0, 0], 4.0)]));
        let c = Polynomial::constant(2, 5.0);
        assert!(c.differentiate(1).unwrap().is_zero());
        let g = p(2, &[(&[2, 1], 1.0), (&[0, 4], 1.0)]);
        assert_eq!(g.differentiate(1).unwrap(), p(2, &[(&[2, 0], 1.0), (&[0, 3], 4.0)]));
        assert_eq!(
            f.differentiate(4),
            Err(PolyError::VariableOutOfRange { var: 4, nvars: 4 })
        );
    }

    #[test]
    fn evaluation_examples() {
        let f = p(4, &[(&[4, 0, 0, 0], 1.0), (&[0, 1, 1, 1], -1.0)]);
        assert_eq!(f.evaluate(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[1.0; 4]).unwrap(), 0.0);
        let g = p(
            3,
            &[
                (&[0, 0, 1], 1.0),
                (&[0, 0, 2], 1.0),
                (&[3, 0, 0], -7.0),
                (&[2, 0, 0], -8.0),
            ],
        );
        assert_eq!(g.evaluate(&[0.0, 0.0, -1.0]).unwrap(), 0.0);
        assert!(g.evaluate(&[0.0]).is_err());
    }

    #[test]
    fn canonical_form_drops_cancelled_terms() {
        let a = p(2, &[(&[1, 0], 1.0), (&[0, 1], 2.0)]);
        let b = p(2, &[(&[1, 0], -1.0)]);
        let s = &a + &b;
        assert_eq!(s.num_terms(), 1);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn dz1_jacobian_vanishes_at_origin() {
        let j = dz1().jacobian_at(&[0.0; 4]).unwrap();
        assert!(j.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_jacobian_is_constant() {
        let s = PolySystem::new(
            vec![p(2, &[(&[1, 0], 2.0), (&[0, 1], 3.0)]), p(2, &[(&[0, 1], -1.0)])],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let j = s.jacobian_at(&[7.0, -4.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 0.0, -1.0]));
    }

    #[test]
    fn dz1_all_ones_direction() {
        let s = dz1();
        let out = s.jacobian_apply(&[0, 1, 2, 3], &[DirectionEntry::One; 4]).unwrap();
        let expected = p(
            4,
            &[
                (&[3, 0, 0, 0], 4.0),
                (&[0, 0, 1, 1], -1.0),
                (&[0, 1, 0, 1], -1.0),
                (&[0, 1, 1, 0], -1.0),
            ],
        );
        assert_eq!(out.polys()[0], expected);
    }

    #[test]
    fn template_length_checked() {
        let s = dz1();
        assert_eq!(
            s.jacobian_apply(&[0, 1], &[DirectionEntry::One]),
            Err(PolyError::TemplateLength { expected: 2, found: 1 })
        );
    }

    #[test]
    fn constant_system_applies_to_zero() {
        let s = PolySystem::new(
            vec![Polynomial::constant(2, 3.0), Polynomial::constant(2, -1.0)],
            vec!["u".into(), "v".into()],
        )
        .unwrap();
        let out = s
            .jacobian_apply(&[0, 1], &[DirectionEntry::One, DirectionEntry::Var(1)])
            .unwrap();
        assert!(out.polys().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn grlex_order() {
        let a = Monomial::new(vec![1, 0]);
        let b = Monomial::new(vec![0, 2]);
        let c = Monomial::new(vec![2, 0]);
        assert!(a < b && b < c);
    }

    #[test]
    fn embed_and_substitute() {
        let f = p(2, &[(&[1, 1], 1.0), (&[0, 1], -2.0)]);
        let g = f.embed(3, &[2, 0]).unwrap();
        assert_eq!(g, p(3, &[(&[1, 0, 1], 1.0), (&[1, 0, 0], -2.0)]));
        assert_eq!(g.substitute_zero(&[2]), p(3, &[(&[1, 0, 0], -2.0)]));
        assert_eq!(g.substitute_zero(&[2]).truncate_vars(1).unwrap(), p(1, &[(&[1], -2.0)]));
        assert!(g.truncate_vars(2).is_err());
    }

    #[test]
    fn complex_coefficients() {
        let i = Complex64::new(0.0, 1.0);
        let f = Polynomial::from_terms(
            1,
            vec![(vec![2], Complex64::new(1.0, 0.0)), (vec![0], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        assert!(f.evaluate(&[i]).unwrap().norm() < 1e-15);
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial<f64>> {
        prop::collection::vec((prop::collection::vec(0u32..4, 3), -8i32..8), 0..7)
            .prop_map(|ts| Polynomial::from_terms(3, ts.into_iter().map(|(e, c)| (e, f64::from(c)))).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn linearity(a in -5i32..5, f in arb_poly(), g in arb_poly(), j in 0usize..3) {
            let a = f64::from(a);
            let lhs = (&f.scale(a) + &g).differentiate(j).unwrap();
            let rhs = &f.differentiate(j).unwrap().scale(a) + &g.differentiate(j).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn product_rule(f in arb_poly(), g in arb_poly(), j in 0usize..3) {
            let lhs = (&f * &g).differentiate(j).unwrap();
            let rhs = &(&f.differentiate(j).unwrap() * &g) + &(&f * &g.differentiate(j).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn derivative_matches_central_difference(
            f in arb_poly(),
            j in 0usize..3,
            t in prop::collection::vec(-1.0..1.0f64, 3),
        ) {
            let h = 1e-5;
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (f.evaluate(&tp).unwrap() - f.evaluate(&tm).unwrap()) / (2.0 * h);
            let d = f.differentiate(j).unwrap().evaluate(&t).unwrap();
            let scale = 1.0 + f.terms().map(|(_, c)| c.abs()).sum::<f64>();
            prop_assert!((fd - d).abs() <= 1e-6 * scale);
        }

        #[test]
        fn derivative_lowers_degree(f in arb_poly(), j in 0usize..3) {
            let d = f.differentiate(j).unwrap();
            for (m, _) in d.terms() {
                let mut up = m.exponents().to_vec();
                up[j] += 1;
                prop_assert!(f.coefficient(&up) != 0.0);
            }
        }
    }
}
