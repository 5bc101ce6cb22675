//! Rigorous real and rectangular-complex interval arithmetic.
//!
//! Bounds are computed in round-to-nearest and then moved outward by one
//! representable float whenever the operation was inexact. Exactness of sums
//! and products is detected with error-free transformations (TwoSum and an
//! FMA residual), so point arithmetic on exactly representable data stays
//! point-valued. No floating-point environment state is touched.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::poly::Polynomial;
use crate::scalar::Scalar;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{inf}, {sup}]")]
    InvalidBounds { inf: f64, sup: f64 },
    #[error("division by an interval containing zero (inconclusive)")]
    DivisionByZero,
}

// Products whose magnitude is at least this large have an exactly
// representable rounding error, so the FMA residual is trustworthy.
const EXACT_PRODUCT_FLOOR: f64 = 1.0e-270;

fn add_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return b;
    }
    if b == 0.0 {
        return a;
    }
    let s = a + b;
    if s.is_nan() {
        return f64::NEG_INFINITY;
    }
    if s.is_infinite() {
        return if s > 0.0 { f64::MAX } else { s };
    }
    let bp = s - a;
    let ap = s - bp;
    let err = (a - ap) + (b - bp);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    -add_down(-a, -b)
}

fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_nan() {
        return f64::NEG_INFINITY;
    }
    if p.is_infinite() {
        return if p > 0.0 { f64::MAX } else { p };
    }
    if p.abs() >= EXACT_PRODUCT_FLOOR {
        let err = a.mul_add(b, -p);
        if err < 0.0 {
            p.next_down()
        } else {
            p
        }
    } else {
        p.next_down()
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    -mul_down(-a, b)
}

fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_nan() {
        return f64::NEG_INFINITY;
    }
    if q.is_infinite() {
        return if q > 0.0 { f64::MAX } else { q };
    }
    q.next_down()
}

fn div_up(a: f64, b: f64) -> f64 {
    -div_down(-a, b)
}

/// `x^k` rounded down, for `x >= 0`.
fn pow_down(x: f64, k: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r = mul_down(r, x);
    }
    r.max(0.0)
}

/// `x^k` rounded up, for `x >= 0`.
fn pow_up(x: f64, k: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r = mul_up(r, x);
    }
    r
}

/// A closed real interval `[inf, sup]`.
///
/// Infinite bounds only arise from overflow; any consumer that needs a
/// finite enclosure checks [`Interval::is_finite`] and gives up otherwise.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    inf: f64,
    sup: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { inf: 0.0, sup: 0.0 };
    pub const ONE: Interval = Interval { inf: 1.0, sup: 1.0 };
    pub const ENTIRE: Interval = Interval {
        inf: f64::NEG_INFINITY,
        sup: f64::INFINITY,
    };

    pub fn new(inf: f64, sup: f64) -> Result<Self, IntervalError> {
        if inf.is_nan() || sup.is_nan() || inf > sup {
            return Err(IntervalError::InvalidBounds { inf, sup });
        }
        Ok(Interval { inf, sup })
    }

    pub const fn point(x: f64) -> Self {
        Interval { inf: x, sup: x }
    }

    fn from_raw(inf: f64, sup: f64) -> Self {
        if inf.is_nan() || sup.is_nan() {
            Interval::ENTIRE
        } else {
            Interval { inf, sup }
        }
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        let r = r.abs();
        Interval { inf: -r, sup: r }
    }

    /// Smallest interval (up to one ulp per side) containing `[mid - rad, mid + rad]`.
    pub fn from_midrad(mid: f64, rad: f64) -> Self {
        let rad = rad.abs();
        Interval::from_raw(add_down(mid, -rad), add_up(mid, rad))
    }

    pub fn inf(&self) -> f64 {
        self.inf
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn mid(&self) -> f64 {
        if self.inf == self.sup {
            return self.inf;
        }
        let m = 0.5 * self.inf + 0.5 * self.sup;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Upper bound on the radius about [`Interval::mid`].
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        add_up(m, -self.inf).max(add_up(self.sup, -m))
    }

    pub fn width(&self) -> f64 {
        add_up(self.sup, -self.inf)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.inf.abs().max(self.sup.abs())
    }

    /// Smallest absolute value in the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.inf.abs().min(self.sup.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.inf <= x && x <= self.sup
    }

    pub fn is_finite(&self) -> bool {
        self.inf.is_finite() && self.sup.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.inf == self.sup
    }

    pub fn subset(&self, outer: &Interval) -> bool {
        outer.inf <= self.inf && self.sup <= outer.sup
    }

    /// Strict containment in the interior of `outer`.
    pub fn subset_interior(&self, outer: &Interval) -> bool {
        outer.inf < self.inf && self.sup < outer.sup
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            inf: self.inf.min(other.inf),
            sup: self.sup.max(other.sup),
        }
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let inf = self.inf.max(other.inf);
        let sup = self.sup.min(other.sup);
        (inf <= sup).then_some(Interval { inf, sup })
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZero);
        }
        let c = [
            (self.inf, rhs.inf),
            (self.inf, rhs.sup),
            (self.sup, rhs.inf),
            (self.sup, rhs.sup),
        ];
        let lo = c.iter().map(|&(a, b)| div_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| div_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::from_raw(lo, hi))
    }

    /// Integer power. Even powers of intervals straddling zero give a
    /// nonnegative result, so `[-1, 1]^2 = [0, 1]`.
    pub fn powi(self, k: u32) -> Interval {
        match k {
            0 => Interval::ONE,
            1 => self,
            _ if k.is_multiple_of(2) => {
                let lo = if self.contains(0.0) {
                    0.0
                } else {
                    pow_down(self.mig(), k)
                };
                Interval::from_raw(lo, pow_up(self.mag(), k))
            }
            _ => {
                let lo = if self.inf >= 0.0 {
                    pow_down(self.inf, k)
                } else {
                    -pow_up(-self.inf, k)
                };
                let hi = if self.sup >= 0.0 {
                    pow_up(self.sup, k)
                } else {
                    -pow_down(-self.sup, k)
                };
                Interval::from_raw(lo, hi)
            }
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.inf, self.sup)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.inf, self.sup)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval::from_raw(add_down(self.inf, rhs.inf), add_up(self.sup, rhs.sup))
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        Interval::from_raw(add_down(self.inf, -rhs.sup), add_up(self.sup, -rhs.inf))
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval {
            inf: -self.sup,
            sup: -self.inf,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        if self.is_point() && rhs.is_point() {
            let (a, b) = (self.inf, rhs.inf);
            return Interval::from_raw(mul_down(a, b), mul_up(a, b));
        }
        let c = [
            (self.inf, rhs.inf),
            (self.inf, rhs.sup),
            (self.sup, rhs.inf),
            (self.sup, rhs.sup),
        ];
        let lo = c.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Interval::from_raw(lo, hi)
    }
}

/// An axis-aligned rectangle `re + i·im` in the complex plane.
#[derive(Clone, Copy, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub const fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub const fn point(z: Complex64) -> Self {
        CInterval {
            re: Interval::point(z.re),
            im: Interval::point(z.im),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im == Interval::ZERO
    }

    pub fn conj(self) -> Self {
        CInterval {
            re: self.re,
            im: -self.im,
        }
    }

    /// Enclosure of `|z|^2` over the rectangle.
    pub fn abs_sqr(self) -> Interval {
        self.re.powi(2) + self.im.powi(2)
    }

    pub fn checked_div(self, rhs: CInterval) -> Result<CInterval, IntervalError> {
        let den = rhs.abs_sqr();
        let num = self * rhs.conj();
        Ok(CInterval {
            re: num.re.checked_div(den)?,
            im: num.im.checked_div(den)?,
        })
    }

    pub fn powi(self, k: u32) -> CInterval {
        if self.is_real() {
            return CInterval {
                re: self.re.powi(k),
                im: Interval::ZERO,
            };
        }
        let mut acc = CInterval::point(Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }
}

impl fmt::Debug for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + i{:?}", self.re, self.im)
    }
}

impl Add for CInterval {
    type Output = CInterval;

    fn add(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for CInterval {
    type Output = CInterval;

    fn sub(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Neg for CInterval {
    type Output = CInterval;

    fn neg(self) -> CInterval {
        CInterval {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for CInterval {
    type Output = CInterval;

    fn mul(self, rhs: CInterval) -> CInterval {
        CInterval {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

/// Common interface of [`Interval`] and [`CInterval`] used by the verifier.
pub trait Enclosure:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Point: Scalar;

    fn from_point(p: Self::Point) -> Self;

    /// `[-r, r]`, or the square `[-r, r] + i[-r, r]` for complex enclosures.
    fn symmetric(r: f64) -> Self;

    fn pow(self, k: u32) -> Self;

    fn midpoint(&self) -> Self::Point;

    /// Largest radius over the real and imaginary parts.
    fn radius(&self) -> f64;

    /// Largest absolute bound over the real and imaginary parts.
    fn magnitude(&self) -> f64;

    fn contains_zero(&self) -> bool;

    fn contains_point(&self, p: Self::Point) -> bool;

    fn subset_of(&self, outer: &Self) -> bool;

    fn subset_interior_of(&self, outer: &Self) -> bool;

    fn is_finite(&self) -> bool;

    fn hull(&self, other: &Self) -> Self;

    fn intersection(&self, other: &Self) -> Option<Self>;

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError>;

    fn zero() -> Self {
        Self::from_point(<Self::Point as nalgebra::ComplexField>::from_real(0.0))
    }

    fn one() -> Self {
        Self::from_point(<Self::Point as nalgebra::ComplexField>::from_real(1.0))
    }
}

impl Enclosure for Interval {
    type Point = f64;

    fn from_point(p: f64) -> Self {
        Interval::point(p)
    }

    fn symmetric(r: f64) -> Self {
        Interval::symmetric(r)
    }

    fn pow(self, k: u32) -> Self {
        self.powi(k)
    }

    fn midpoint(&self) -> f64 {
        self.mid()
    }

    fn radius(&self) -> f64 {
        self.rad()
    }

    fn magnitude(&self) -> f64 {
        self.mag()
    }

    fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    fn contains_point(&self, p: f64) -> bool {
        self.contains(p)
    }

    fn subset_of(&self, outer: &Self) -> bool {
        self.subset(outer)
    }

    fn subset_interior_of(&self, outer: &Self) -> bool {
        self.subset_interior(outer)
    }

    fn is_finite(&self) -> bool {
        Interval::is_finite(self)
    }

    fn hull(&self, other: &Self) -> Self {
        Interval::hull(self, other)
    }

    fn intersection(&self, other: &Self) -> Option<Self> {
        Interval::intersection(self, other)
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        self.checked_div(rhs)
    }
}

impl Enclosure for CInterval {
    type Point = Complex64;

    fn from_point(p: Complex64) -> Self {
        CInterval::point(p)
    }

    fn symmetric(r: f64) -> Self {
        CInterval::new(Interval::symmetric(r), Interval::symmetric(r))
    }

    fn pow(self, k: u32) -> Self {
        self.powi(k)
    }

    fn midpoint(&self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    fn radius(&self) -> f64 {
        self.re.rad().max(self.im.rad())
    }

    fn magnitude(&self) -> f64 {
        self.re.mag().max(self.im.mag())
    }

    fn contains_zero(&self) -> bool {
        self.re.contains(0.0) && self.im.contains(0.0)
    }

    fn contains_point(&self, p: Complex64) -> bool {
        self.re.contains(p.re) && self.im.contains(p.im)
    }

    fn subset_of(&self, outer: &Self) -> bool {
        self.re.subset(&outer.re) && self.im.subset(&outer.im)
    }

    fn subset_interior_of(&self, outer: &Self) -> bool {
        self.re.subset_interior(&outer.re) && self.im.subset_interior(&outer.im)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn hull(&self, other: &Self) -> Self {
        CInterval::new(self.re.hull(&other.re), self.im.hull(&other.im))
    }

    fn intersection(&self, other: &Self) -> Option<Self> {
        Some(CInterval::new(
            self.re.intersection(&other.re)?,
            self.im.intersection(&other.im)?,
        ))
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        self.checked_div(rhs)
    }
}

/// Binary interval operation selector, mirroring the scalar operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies `op` to two enclosures. Division by an enclosure of zero is
/// reported as an error rather than producing an unbounded result.
pub fn interval_arith<E: Enclosure>(op: IntervalOp, a: E, b: E) -> Result<E, IntervalError> {
    Ok(match op {
        IntervalOp::Add => a + b,
        IntervalOp::Sub => a - b,
        IntervalOp::Mul => a * b,
        IntervalOp::Div => a.try_div(b)?,
    })
}

/// True iff every component of `inner` lies strictly inside the matching
/// component of `outer`.
pub fn subset_interior<E: Enclosure>(inner: &[E], outer: &[E]) -> bool {
    inner.len() == outer.len() && inner.iter().zip(outer).all(|(a, b)| a.subset_interior_of(b))
}

/// Natural interval extension of `p` over the box `x`, term by term.
///
/// # Panics
///
/// Panics if `x.len()` differs from the number of variables of `p`.
pub fn enclose_poly<T: Scalar>(p: &Polynomial<T>, x: &[T::Enclosure]) -> T::Enclosure {
    assert_eq!(x.len(), p.nvars(), "box dimension does not match polynomial");
    let mut acc = T::Enclosure::zero();
    for (mono, &coef) in p.terms() {
        let mut term = T::Enclosure::from_point(coef);
        for (var, &e) in mono.exponents().iter().enumerate() {
            if e > 0 {
                term = term * x[var].pow(e);
            }
        }
        acc = acc + term;
    }
    acc
}

/// Dense row-major matrix of enclosures.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Enclosure> IntervalMatrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    pub fn from_points(m: &nalgebra::DMatrix<E::Point>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| E::from_point(m[(i, j)]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> E {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[E]) -> Vec<E> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(E::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `P · self` for a point matrix `P`.
    pub fn left_mul_points(&self, p: &nalgebra::DMatrix<E::Point>) -> Self {
        assert_eq!(p.ncols(), self.rows);
        IntervalMatrix::from_fn(p.nrows(), self.cols, |i, j| {
            (0..self.rows).fold(E::zero(), |acc, k| acc + E::from_point(p[(i, k)]) * self.get(k, j))
        })
    }

    pub fn contains_points(&self, m: &nalgebra::DMatrix<E::Point>) -> bool {
        m.nrows() == self.rows
            && m.ncols() == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j).contains_point(m[(i, j)])))
    }
}
