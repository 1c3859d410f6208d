//! Complex scalars and vectors.
//!
//! The Hermitian inner product is linear in the FIRST argument and
//! conjugate-linear in the second:
//!
//! ```text
//! <x, y> = sum_i x_i * conj(y_i)
//! ```
//!
//! so `<y, x> = conj(<x, y>)`. Every formula in this crate is written against
//! this convention.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{PlankError, Result};

/// Below this norm a vector is treated as zero and cannot be normalized.
pub const UNDERFLOW_NORM: f64 = 1e-300;

/// Moduli closer than this are considered tied by [`CVector::gauge_fix`].
pub const GAUGE_TIE_TOL: f64 = 1e-12;

/// A double precision complex number. Serializes as `[re, im]`.
#[derive(Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };
    pub const I: Complex = Complex { re: 0.0, im: 1.0 };

    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    #[inline]
    pub const fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    /// `r * e^{i theta}`.
    #[inline]
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Complex::new(r * c, r * s)
    }

    /// `e^{i theta}`.
    #[inline]
    pub fn cis(theta: f64) -> Self {
        Self::from_polar(1.0, theta)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Modulus, computed without intermediate overflow.
    #[inline]
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Complex::new(self.re * k, self.im * k)
    }

    #[inline]
    pub fn recip(self) -> Self {
        let d = self.norm_sqr();
        Complex::new(self.re / d, -self.im / d)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<[f64; 2]> for Complex {
    fn from([re, im]: [f64; 2]) -> Self {
        Complex::new(re, im)
    }
}

impl From<Complex> for [f64; 2] {
    fn from(z: Complex) -> Self {
        [z.re, z.im]
    }
}

impl From<f64> for Complex {
    fn from(re: f64) -> Self {
        Complex::real(re)
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:+?}i", self.re, self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, k: f64) -> Complex {
        self.scale(k)
    }
}

impl Div for Complex {
    type Output = Complex;
    #[inline]
    fn div(self, o: Complex) -> Complex {
        let d = o.norm_sqr();
        Complex::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

impl Div<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn div(self, k: f64) -> Complex {
        Complex::new(self.re / k, self.im / k)
    }
}

impl Neg for Complex {
    type Output = Complex;
    #[inline]
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl AddAssign for Complex {
    #[inline]
    fn add_assign(&mut self, o: Complex) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl SubAssign for Complex {
    #[inline]
    fn sub_assign(&mut self, o: Complex) {
        self.re -= o.re;
        self.im -= o.im;
    }
}

impl MulAssign for Complex {
    #[inline]
    fn mul_assign(&mut self, o: Complex) {
        *self = *self * o;
    }
}

impl std::iter::Sum for Complex {
    fn sum<I: Iterator<Item = Complex>>(iter: I) -> Complex {
        iter.fold(Complex::ZERO, Add::add)
    }
}

impl std::iter::Product for Complex {
    fn product<I: Iterator<Item = Complex>>(iter: I) -> Complex {
        iter.fold(Complex::ONE, Mul::mul)
    }
}

/// An element of C^d. Serializes as `[[re, im], ...]`.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(Vec<Complex>);

impl CVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        CVector(entries)
    }

    pub fn zeros(d: usize) -> Self {
        CVector(vec![Complex::ZERO; d])
    }

    /// Standard basis vector `e_i` of C^d (0-based `i`).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d);
        v.0[i] = Complex::ONE;
        v
    }

    pub fn from_real(xs: &[f64]) -> Self {
        CVector(xs.iter().copied().map(Complex::real).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.0.iter()
    }

    /// Hermitian inner product `<self, other>`, linear in `self`.
    pub fn inner(&self, other: &CVector) -> Result<Complex> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.inner_unchecked(other))
    }

    #[inline]
    pub(crate) fn inner_unchecked(&self, other: &CVector) -> Complex {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&x, &y)| x * y.conj())
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self / ||self||`.
    pub fn normalize(&self) -> Result<CVector> {
        let n = self.norm();
        if !(n > UNDERFLOW_NORM) {
            return Err(PlankError::ZeroVector);
        }
        Ok(self.scale_real(1.0 / n))
    }

    /// Componentwise `z * x_i + y_i` with `x = self`.
    pub fn axpy(&self, z: Complex, y: &CVector) -> Result<CVector> {
        check_dims(self.dim(), y.dim())?;
        Ok(self.axpy_unchecked(z, y))
    }

    #[inline]
    pub(crate) fn axpy_unchecked(&self, z: Complex, y: &CVector) -> CVector {
        CVector(self.0.iter().zip(&y.0).map(|(&x, &y)| z * x + y).collect())
    }

    pub fn scale(&self, z: Complex) -> CVector {
        CVector(self.0.iter().map(|&x| z * x).collect())
    }

    pub fn scale_real(&self, k: f64) -> CVector {
        CVector(self.0.iter().map(|&x| x * k).collect())
    }

    /// Multiplies by the unit phase that makes the largest-modulus entry real
    /// and non-negative. Entries whose moduli are within [`GAUGE_TIE_TOL`] of
    /// the maximum are tied; the lowest index wins.
    pub fn gauge_fix(&self) -> Result<CVector> {
        let max = self.0.iter().map(|z| z.abs()).fold(0.0, f64::max);
        if !(max > UNDERFLOW_NORM) {
            return Err(PlankError::ZeroVector);
        }
        let pivot = self
            .0
            .iter()
            .position(|z| z.abs() >= max - GAUGE_TIE_TOL)
            .expect("maximum is attained");
        let p = self.0[pivot];
        let phase = p.conj() / p.abs();
        let mut out = self.scale(phase);
        // exact zero imaginary part at the pivot
        out.0[pivot] = Complex::real(p.abs());
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Index<usize> for CVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.0[i]
    }
}

impl From<Vec<Complex>> for CVector {
    fn from(v: Vec<Complex>) -> Self {
        CVector(v)
    }
}

impl FromIterator<Complex> for CVector {
    fn from_iter<I: IntoIterator<Item = Complex>>(iter: I) -> Self {
        CVector(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a CVector {
    type Item = &'a Complex;
    type IntoIter = std::slice::Iter<'a, Complex>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Add<&CVector> for &CVector {
    type Output = CVector;
    fn add(self, o: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), o.dim());
        self.0.iter().zip(&o.0).map(|(&a, &b)| a + b).collect()
    }
}

impl Sub<&CVector> for &CVector {
    type Output = CVector;
    fn sub(self, o: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), o.dim());
        self.0.iter().zip(&o.0).map(|(&a, &b)| a - b).collect()
    }
}

/// Free-function form of [`CVector::inner`].
pub fn inner(x: &CVector, y: &CVector) -> Result<Complex> {
    x.inner(y)
}

/// Free-function form of [`CVector::norm`].
pub fn norm(x: &CVector) -> f64 {
    x.norm()
}

/// Free-function form of [`CVector::normalize`].
pub fn normalize(x: &CVector) -> Result<CVector> {
    x.normalize()
}

/// `z * x + y`.
pub fn axpy(z: Complex, x: &CVector, y: &CVector) -> Result<CVector> {
    x.axpy(z, y)
}

/// Free-function form of [`CVector::gauge_fix`].
pub fn gauge_fix(u: &CVector) -> Result<CVector> {
    u.gauge_fix()
}

#[inline]
fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(PlankError::DimensionMismatch { expected, found });
    }
    Ok(())
}
