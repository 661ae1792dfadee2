//! Commutative unital C*-algebra with finite spectrum.
//!
//! By Gelfand duality a commutative unital C*-algebra is an algebra of
//! continuous functions on its spectrum. Here the spectrum is `K` discrete
//! points, so an element is just a vector of `K` complex values and every
//! algebraic operation (product, involution, order, square root) acts
//! pointwise. `K = 1` recovers the complex numbers.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute tolerance for positivity and self-adjointness checks.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-10;

/// Number of points of the Gelfand spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spectrum(usize);

impl Spectrum {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Dimension("spectrum must have at least one point".into()));
        }
        Ok(Spectrum(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

/// A complex-valued function on the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    values: Vec<Complex64>,
}

/// Outcome of a positivity test: the verdict plus the point that came
/// closest to (or furthest into) violating it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub point: usize,
    pub value: Complex64,
}

impl AlgebraElement {
    /// Builds an element from its values. Fails on an empty spectrum.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("spectrum must have at least one point".into()));
        }
        Ok(AlgebraElement { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_values(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zero(spectrum: Spectrum) -> Self {
        Self::constant(spectrum, Complex64::new(0.0, 0.0))
    }

    pub fn unit(spectrum: Spectrum) -> Self {
        Self::constant(spectrum, Complex64::new(1.0, 0.0))
    }

    pub fn constant(spectrum: Spectrum, c: Complex64) -> Self {
        AlgebraElement { values: vec![c; spectrum.size()] }
    }

    pub fn real_constant(spectrum: Spectrum, c: f64) -> Self {
        Self::constant(spectrum, Complex64::new(c, 0.0))
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum(self.values.len())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, point: usize) -> Complex64 {
        self.values[point]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::Dimension(format!(
                "spectrum sizes {} and {} differ",
                self.values.len(),
                other.values.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        AlgebraElement { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub(crate) fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        AlgebraElement { values: self.values.iter().map(|&a| f(a)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|a| a * factor)
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        self.map(|a| a * factor)
    }

    /// Involution: pointwise complex conjugation.
    pub fn star(&self) -> Self {
        self.map(|a| a.conj())
    }

    /// C*-norm: the sup norm over the spectrum.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn int_power(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("power must be at least 1".into()));
        }
        Ok(self.map(|a| a.powu(m)))
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.values.iter().all(|a| a.im.abs() <= tol)
    }

    /// Positive iff every value has `|im| <= tol` and `re >= -tol`. The
    /// reported point is the one with the largest violation score
    /// `max(|im|, -re)` (first such point on ties).
    pub fn is_positive(&self, tol: f64) -> Positivity {
        let mut worst = 0;
        let mut worst_score = f64::NEG_INFINITY;
        for (s, a) in self.values.iter().enumerate() {
            let score = a.im.abs().max(-a.re);
            if score > worst_score || score.is_nan() && !worst_score.is_nan() {
                worst_score = score;
                worst = s;
            }
        }
        let positive = self.values.iter().all(|a| a.im.abs() <= tol && a.re >= -tol);
        Positivity { positive, point: worst, value: self.values[worst] }
    }

    /// `self <= other` in the algebra order, i.e. `other - self` positive.
    pub fn leq(&self, other: &Self, tol: f64) -> Result<bool> {
        self.check_same(other)?;
        for x in [self, other] {
            if let Some((point, a)) = x.values.iter().enumerate().find(|(_, a)| a.im.abs() > tol) {
                return Err(Error::Order { point, imag: a.im });
            }
        }
        Ok(other.sub(self)?.is_positive(tol).positive)
    }

    /// Square root of a positive element. Real parts in `[-tol, 0)` are
    /// clamped to zero.
    pub fn sqrt(&self, tol: f64) -> Result<Self> {
        let p = self.is_positive(tol);
        if !p.positive {
            return Err(Error::NotPositive { point: p.point, re: p.value.re, im: p.value.im });
        }
        Ok(self.map(|a| Complex64::new(a.re.max(0.0).sqrt(), 0.0)))
    }

    /// Smallest real part over the spectrum.
    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|a| a.re).fold(f64::INFINITY, f64::min)
    }

    /// Largest real part over the spectrum.
    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|a| a.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest pointwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.values.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        AlgebraElement::from_values(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}
