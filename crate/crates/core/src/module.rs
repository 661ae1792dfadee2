//! The standard Hilbert C*-module `A^d` over the finite-spectrum algebra.
//!
//! Vectors are `d`-tuples of algebra elements with inner product
//! `<x, y> = sum_r x_r y_r^*`. A frame is an ordered family of such vectors;
//! the frame homomorphism `S x = sum_j <x, tau_j> tau_j` is stored as a
//! `d x d` matrix of algebra elements. Evaluating everything at one
//! spectrum point gives the classical picture over `C^d`, which is how the
//! eigenvalue-based predicates are computed.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgebraElement, Spectrum, DEFAULT_POSITIVITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};

/// Default tolerance for `<tau_j, tau_j> = 1`, per spectrum point.
pub const UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector {
    coords: Vec<AlgebraElement>,
}

impl ModuleVector {
    pub fn new(coords: Vec<AlgebraElement>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| Error::Dimension("module vector needs at least one coordinate".into()))?
            .spectrum();
        if coords.iter().any(|c| c.spectrum() != first) {
            return Err(Error::Dimension("coordinates live on different spectra".into()));
        }
        Ok(ModuleVector { coords })
    }

    /// Assembles a vector from its classical slices; `slice(s)` must return
    /// `dim` values for every point `s`.
    pub fn from_slices(spectrum: Spectrum, dim: usize, mut slice: impl FnMut(usize) -> Vec<Complex64>) -> Result<Self> {
        let k = spectrum.size();
        let mut cols = vec![Vec::with_capacity(k); dim];
        for s in 0..k {
            let v = slice(s);
            if v.len() != dim {
                return Err(Error::Dimension(format!("slice has {} entries, expected {dim}", v.len())));
            }
            for (col, z) in cols.iter_mut().zip(v) {
                col.push(z);
            }
        }
        Self::new(cols.into_iter().map(AlgebraElement::from_values).collect::<Result<_>>()?)
    }

    /// The `r`-th canonical basis vector `e_r`.
    pub fn canonical(spectrum: Spectrum, dim: usize, r: usize) -> Self {
        let coords = (0..dim)
            .map(|i| if i == r { AlgebraElement::unit(spectrum) } else { AlgebraElement::zero(spectrum) })
            .collect();
        ModuleVector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn spectrum(&self) -> Spectrum {
        self.coords[0].spectrum()
    }

    pub fn coords(&self) -> &[AlgebraElement] {
        &self.coords
    }

    pub fn coord(&self, r: usize) -> &AlgebraElement {
        &self.coords[r]
    }

    /// Evaluation at spectrum point `s`: a classical vector in `C^d`.
    pub fn slice(&self, s: usize) -> Vec<Complex64> {
        self.coords.iter().map(|c| c.value(s)).collect()
    }

    /// Right action of the algebra: `x . a`.
    pub fn scale_by(&self, a: &AlgebraElement) -> Result<Self> {
        Ok(ModuleVector { coords: self.coords.iter().map(|c| c.mul(a)).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_shape(self, other)?;
        Ok(ModuleVector {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect::<Result<_>>()?,
        })
    }
}

fn check_shape(x: &ModuleVector, y: &ModuleVector) -> Result<()> {
    if x.dim() != y.dim() || x.spectrum() != y.spectrum() {
        return Err(Error::Dimension(format!(
            "vector shapes (d={}, K={}) and (d={}, K={}) differ",
            x.dim(),
            x.spectrum().size(),
            y.dim(),
            y.spectrum().size()
        )));
    }
    Ok(())
}

/// `<x, y> = sum_r x_r y_r^*`: linear in `x`, conjugate-linear in `y`.
pub fn inner_product(x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
    check_shape(x, y)?;
    Ok(inner_unchecked(x, y))
}

pub(crate) fn inner_unchecked(x: &ModuleVector, y: &ModuleVector) -> AlgebraElement {
    let mut acc = AlgebraElement::zero(x.spectrum());
    for (a, b) in x.coords.iter().zip(&y.coords) {
        acc.add_assign_unchecked(&a.zip_with(b, |u, v| u * v.conj()));
    }
    acc
}

/// An ordered family `{tau_j}` of vectors of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Vec<ModuleVector>,
}

impl Frame {
    pub fn new(vectors: Vec<ModuleVector>) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::Dimension("frame needs at least one vector".into()))?;
        for v in &vectors[1..] {
            check_shape(first, v)?;
        }
        Ok(Frame { vectors })
    }

    /// Builds an `n`-vector frame from classical slices `slice(j, s)`.
    pub fn from_slices(
        spectrum: Spectrum,
        dim: usize,
        n: usize,
        mut slice: impl FnMut(usize, usize) -> Vec<Complex64>,
    ) -> Result<Self> {
        let vectors =
            (0..n).map(|j| ModuleVector::from_slices(spectrum, dim, |s| slice(j, s))).collect::<Result<_>>()?;
        Self::new(vectors)
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn spectrum(&self) -> Spectrum {
        self.vectors[0].spectrum()
    }

    pub fn vectors(&self) -> &[ModuleVector] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &ModuleVector {
        &self.vectors[j]
    }

    /// Largest `|<tau_j, tau_j>(s) - 1|` over the spectrum, per vector.
    pub fn unit_deviations(&self) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| {
                let g = inner_unchecked(v, v);
                g.values().iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max)
            })
            .collect()
    }

    /// Checks `<tau_j, tau_j> = 1` within `tol` at every point.
    pub fn check_unit(&self, tol: f64) -> Result<()> {
        let dev = self.unit_deviations();
        let indices: Vec<usize> = dev.iter().enumerate().filter(|(_, &d)| !(d <= tol)).map(|(j, _)| j).collect();
        if indices.is_empty() {
            Ok(())
        } else {
            let deviation = indices.iter().map(|&j| dev[j]).fold(0.0, f64::max);
            Err(Error::NotUnit { indices, deviation })
        }
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        self.check_unit(tol).is_ok()
    }
}

/// Evaluates every vector of the frame at point `s`.
pub fn pointwise_slice(f: &Frame, s: usize) -> Result<Vec<Vec<Complex64>>> {
    if s >= f.spectrum().size() {
        return Err(Error::Dimension(format!("spectrum point {s} out of range (K = {})", f.spectrum().size())));
    }
    Ok(f.vectors.iter().map(|v| v.slice(s)).collect())
}

/// `d x d` matrix of algebra elements, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<AlgebraElement>,
}

impl OperatorMatrix {
    pub fn new(dim: usize, entries: Vec<AlgebraElement>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!("{} entries cannot form a {dim}x{dim} matrix", entries.len())));
        }
        let sp = entries[0].spectrum();
        if entries.iter().any(|e| e.spectrum() != sp) {
            return Err(Error::Dimension("matrix entries live on different spectra".into()));
        }
        Ok(OperatorMatrix { dim, entries })
    }

    pub fn identity(spectrum: Spectrum, dim: usize) -> Self {
        Self::scalar(spectrum, dim, 1.0)
    }

    /// `c * I`.
    pub fn scalar(spectrum: Spectrum, dim: usize, c: f64) -> Self {
        let entries = (0..dim * dim)
            .map(|i| {
                if i / dim == i % dim {
                    AlgebraElement::real_constant(spectrum, c)
                } else {
                    AlgebraElement::zero(spectrum)
                }
            })
            .collect();
        OperatorMatrix { dim, entries }
    }

    /// Reassembles a matrix from one classical matrix per spectrum point.
    pub fn from_points(points: &[CMatrix]) -> Result<Self> {
        let dim = points.first().ok_or_else(|| Error::Dimension("no spectrum points".into()))?.dim();
        if points.iter().any(|m| m.dim() != dim) {
            return Err(Error::Dimension("pointwise matrices differ in size".into()));
        }
        let entries = (0..dim * dim)
            .map(|i| AlgebraElement::from_values(points.iter().map(|m| m[(i / dim, i % dim)]).collect()))
            .collect::<Result<_>>()?;
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spectrum(&self) -> Spectrum {
        self.entries[0].spectrum()
    }

    pub fn get(&self, p: usize, q: usize) -> &AlgebraElement {
        &self.entries[p * self.dim + q]
    }

    /// The classical matrix at spectrum point `s`.
    pub fn at_point(&self, s: usize) -> CMatrix {
        CMatrix::from_fn(self.dim, |p, q| self.get(p, q).value(s))
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let entries = (0..d * d).map(|i| self.get(i % d, i / d).star()).collect();
        OperatorMatrix { dim: d, entries }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let adj = self.adjoint();
        self.entries.iter().zip(&adj.entries).all(|(a, b)| a.max_abs_diff(b).is_ok_and(|e| e <= tol))
    }

    /// `(T x)_p = sum_q T[p][q] x_q`.
    pub fn apply(&self, x: &ModuleVector) -> Result<ModuleVector> {
        if x.dim() != self.dim || x.spectrum() != self.spectrum() {
            return Err(Error::Dimension("operator and vector shapes differ".into()));
        }
        let coords = (0..self.dim)
            .map(|p| {
                let mut acc = AlgebraElement::zero(x.spectrum());
                for q in 0..self.dim {
                    acc.add_assign_unchecked(&self.get(p, q).zip_with(x.coord(q), |a, b| a * b));
                }
                acc
            })
            .collect();
        Ok(ModuleVector { coords })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.spectrum() != other.spectrum() {
            return Err(Error::Dimension("operator shapes differ".into()));
        }
        let d = self.dim;
        let entries = (0..d * d)
            .map(|i| {
                let (p, q) = (i / d, i % d);
                let mut acc = AlgebraElement::zero(self.spectrum());
                for r in 0..d {
                    acc.add_assign_unchecked(&self.get(p, r).zip_with(other.get(r, q), |a, b| a * b));
                }
                acc
            })
            .collect();
        Ok(OperatorMatrix { dim: d, entries })
    }

    /// Largest pointwise entry distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Dimension("operator shapes differ".into()));
        }
        self.entries.iter().zip(&other.entries).try_fold(0.0, |m, (a, b)| Ok(a.max_abs_diff(b)?.max(m)))
    }

    /// Ascending eigenvalues of the Hermitian part at every spectrum point.
    pub fn pointwise_eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.spectrum().size())
            .map(|s| hermitian_eigen(&self.at_point(s)).map(|e| e.values).ok_or(Error::NoConvergence { point: s }))
            .collect()
    }
}

/// `gram[j][k] = <tau_j, tau_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramTable {
    n: usize,
    entries: Vec<AlgebraElement>,
}

impl GramTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> &AlgebraElement {
        &self.entries[j * self.n + k]
    }

    /// Largest deviation from `gram[k][j] = gram[j][k]^*`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for k in j..self.n {
                let a = self.get(j, k);
                let b = self.get(k, j);
                for (x, y) in a.values().iter().zip(b.values()) {
                    worst = worst.max((x - y.conj()).norm());
                }
            }
        }
        worst
    }

    /// `gram[j][k]^m gram[k][j]^m`, the squared-magnitude element of order `m`.
    pub fn product_power(&self, j: usize, k: usize, m: u32) -> AlgebraElement {
        self.get(j, k).zip_with(self.get(k, j), |a, b| a.powu(m) * b.powu(m))
    }

    /// `sum_{j,k} gram[j][k]^m gram[k][j]^m`.
    pub fn power_sum(&self, m: u32) -> AlgebraElement {
        let sp = self.entries[0].spectrum();
        let mut acc = AlgebraElement::zero(sp);
        for j in 0..self.n {
            for k in 0..self.n {
                acc.add_assign_unchecked(&self.product_power(j, k, m));
            }
        }
        acc
    }
}

pub fn gram_table(f: &Frame) -> GramTable {
    let n = f.n();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            entries.push(inner_unchecked(f.vector(j), f.vector(k)));
        }
    }
    GramTable { n, entries }
}

/// The frame homomorphism `S_tau` as a matrix:
/// `S[p][q] = sum_j tau_j[p] tau_j[q]^*`.
pub fn frame_operator(f: &Frame) -> OperatorMatrix {
    let d = f.dim();
    let sp = f.spectrum();
    let entries = (0..d * d)
        .map(|i| {
            let (p, q) = (i / d, i % d);
            let mut acc = AlgebraElement::zero(sp);
            for v in f.vectors() {
                acc.add_assign_unchecked(&v.coord(p).zip_with(v.coord(q), |a, b| a * b.conj()));
            }
            acc
        })
        .collect();
    OperatorMatrix { dim: d, entries }
}

/// Largest `|<e_i, e_j> - delta_ij|` over the family and the spectrum.
pub fn orthonormality_residual(basis: &[ModuleVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            for z in inner_unchecked(a, b).values() {
                worst = worst.max((z - want).norm());
            }
        }
    }
    worst
}

/// `Tra(T) = sum_j <T e_j, e_j>` over an orthonormal basis; the canonical
/// basis (diagonal sum) when `basis` is `None`. A supplied basis must be
/// orthonormal within `tol`.
pub fn trace(t: &OperatorMatrix, basis: Option<&[ModuleVector]>, tol: f64) -> Result<AlgebraElement> {
    let sp = t.spectrum();
    match basis {
        None => {
            let mut acc = AlgebraElement::zero(sp);
            for p in 0..t.dim() {
                acc.add_assign_unchecked(t.get(p, p));
            }
            Ok(acc)
        }
        Some(basis) => {
            if basis.len() != t.dim() {
                return Err(Error::Dimension(format!("basis has {} vectors, rank is {}", basis.len(), t.dim())));
            }
            for e in basis {
                if e.dim() != t.dim() || e.spectrum() != sp {
                    return Err(Error::Dimension("basis vector shape differs from operator".into()));
                }
            }
            let residual = orthonormality_residual(basis);
            if !(residual <= tol) {
                return Err(Error::Basis { residual });
            }
            let mut acc = AlgebraElement::zero(sp);
            for e in basis {
                acc.add_assign_unchecked(&inner_unchecked(&t.apply(e)?, e));
            }
            Ok(acc)
        }
    }
}

/// `Tra(S_tau^2)` recovered from the Gram table:
/// `sum_{j,k} <tau_j, tau_k><tau_k, tau_j>`.
pub fn trace_square_formula(f: &Frame) -> AlgebraElement {
    gram_table(f).power_sum(1)
}

/// Modular frame potential `MFP = sum_{j,k} <tau_j, tau_k><tau_k, tau_j>`.
pub fn frame_potential(f: &Frame) -> AlgebraElement {
    trace_square_formula(f)
}

/// Scalar frame bounds: extreme eigenvalues of `S_tau` over all points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub is_frame: bool,
    pub lower: f64,
    pub upper: f64,
}

pub fn is_frame(f: &Frame, tol: f64) -> Result<FrameBounds> {
    let eig = frame_operator(f).pointwise_eigenvalues()?;
    let lower = eig.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let upper = eig.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameBounds { is_frame: lower > tol, lower, upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tightness {
    pub tight: bool,
    /// The common bound `a` with `S_tau ~ a I`.
    pub bound: f64,
    pub parseval: bool,
    /// Largest pointwise entry of `S_tau - a I`.
    pub residual: f64,
}

/// Tight iff `S_tau = a I` within `tol` at every point, with one real `a`.
pub fn is_tight(f: &Frame, tol: f64) -> Tightness {
    let s = frame_operator(f);
    let d = f.dim();
    let k = f.spectrum().size();
    let tr = trace(&s, None, tol).expect("canonical trace cannot fail");
    let bound = tr.values().iter().map(|z| z.re).sum::<f64>() / (d * k) as f64;
    let residual = s.max_abs_diff(&OperatorMatrix::scalar(f.spectrum(), d, bound)).expect("same shape");
    let tight = residual <= tol;
    Tightness { tight, bound, parseval: tight && (bound - 1.0).abs() <= tol, residual }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equiangularity {
    pub equiangular: bool,
    /// Mean of the off-diagonal `<tau_j, tau_k><tau_k, tau_j>` per point.
    pub gamma: AlgebraElement,
    /// Largest distance of an off-diagonal product from `gamma`.
    pub spread: f64,
}

/// Compares the squared-magnitude elements `<tau_j,tau_k><tau_k,tau_j>`,
/// `j != k`, pointwise.
pub fn is_equiangular(f: &Frame, tol: f64) -> Result<Equiangularity> {
    let n = f.n();
    if n < 2 {
        return Err(Error::Domain("equiangularity needs at least two vectors".into()));
    }
    let g = gram_table(f);
    let sp = f.spectrum();
    let mut sum = AlgebraElement::zero(sp);
    let mut products = Vec::with_capacity(n * (n - 1));
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let p = g.product_power(j, k, 1);
                sum.add_assign_unchecked(&p);
                products.push(p);
            }
        }
    }
    let gamma = sum.scale(1.0 / products.len() as f64).map(|z| Complex64::new(z.re, 0.0));
    let spread = products.iter().map(|p| p.max_abs_diff(&gamma).expect("same spectrum")).fold(0.0, f64::max);
    Ok(Equiangularity { equiangular: spread <= tol && gamma.is_positive(tol).positive, gamma, spread })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub value: f64,
    /// Lexicographically smallest `(j, k)`, `j < k`, attaining the maximum.
    pub witness: (usize, usize),
}

/// Modular frame correlation `max_{j != k} ||<tau_j, tau_k>||`.
pub fn frame_correlation(f: &Frame) -> Result<Correlation> {
    frame_correlation_from_gram(&gram_table(f))
}

pub(crate) fn frame_correlation_from_gram(g: &GramTable) -> Result<Correlation> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Domain("frame correlation needs at least two vectors".into()));
    }
    let mut best = Correlation { value: f64::NEG_INFINITY, witness: (0, 1) };
    for j in 0..n {
        for k in (j + 1)..n {
            let v = g.get(j, k).norm();
            if v > best.value {
                best = Correlation { value: v, witness: (j, k) };
            }
        }
    }
    Ok(best)
}

/// Modular root-mean-square cross relation
/// `((1/(n(n-1))) sum_{j != k} <tau_j,tau_k><tau_k,tau_j>)^{1/2}`.
pub fn mrms(f: &Frame) -> Result<AlgebraElement> {
    let n = f.n();
    if n < 2 {
        return Err(Error::Domain("MRMS needs at least two vectors".into()));
    }
    f.check_unit(UNIT_TOL)?;
    let g = gram_table(f);
    let mut acc = AlgebraElement::zero(f.spectrum());
    for j in 0..n {
        for k in 0..n {
            if j != k {
                acc.add_assign_unchecked(&g.product_power(j, k, 1));
            }
        }
    }
    let mean = acc.scale(1.0 / (n * (n - 1)) as f64);
    mean.map(|z| Complex64::new(z.re, 0.0)).sqrt(DEFAULT_POSITIVITY_TOL)
}
