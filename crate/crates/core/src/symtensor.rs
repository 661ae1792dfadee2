//! Symmetric tensor powers `Sym^m(A^d)` in multiset coordinates.
//!
//! A basis element is indexed by a multiset of `m` coordinates drawn from
//! `0..d`, written as an exponent vector `alpha` with `|alpha| = m`. The
//! lift `x -> x^{(x)m}` has coordinate `sqrt(m!/alpha!) prod_i x_i^{alpha_i}`,
//! which makes the plain coordinate inner product reproduce
//! `<x^{(x)m}, y^{(x)m}> = <x, y>^m`.

use serde::Serialize;

use crate::algebra::{AlgebraElement, Spectrum};
use crate::bounds::binomial;
use crate::error::{Error, Result};
use crate::module::{frame_operator, gram_table, Frame, ModuleVector, OperatorMatrix, UNIT_TOL};

/// Largest `D * K` accepted by the Sym-power operator routines.
pub const MAX_SYM_ENTRIES: u128 = 1_000_000;

/// Exponent vector `alpha` with `sum alpha_i = m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultisetIndex {
    exponents: Vec<u32>,
}

impl MultisetIndex {
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn order(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// The nondecreasing index tuple `(i_1 <= ... <= i_m)`.
    pub fn tuple(&self) -> Vec<usize> {
        self.exponents.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat_n(i, a as usize)).collect()
    }

    /// `m! / (alpha_1! ... alpha_d!)`.
    pub fn multinomial(&self) -> Result<u128> {
        let mut acc: u128 = 1;
        let mut placed: u128 = 0;
        // product of binomials C(placed + a, a)
        for &a in &self.exponents {
            for i in 1..=a as u128 {
                placed += 1;
                acc = acc
                    .checked_mul(placed)
                    .ok_or_else(|| Error::Overflow("multinomial coefficient exceeds 128 bits".into()))?
                    / i;
            }
        }
        Ok(acc)
    }
}

/// `C(d+m-1, m)`.
pub fn sym_rank(d: usize, m: u32) -> Result<u128> {
    if d == 0 || m == 0 {
        return Err(Error::Domain("symmetric rank needs d, m >= 1".into()));
    }
    binomial(d as i128 + m as i128 - 1, m as i128).map(|c| c as u128)
}

/// All multisets of size `m` over `0..d`, ordered lexicographically by
/// their nondecreasing index tuples.
pub fn multiset_indices(d: usize, m: u32) -> Vec<MultisetIndex> {
    fn rec(d: usize, start: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultisetIndex>) {
        if left == 0 {
            out.push(MultisetIndex { exponents: cur.clone() });
            return;
        }
        for i in start..d {
            cur[i] += 1;
            rec(d, i, left - 1, cur, out);
            cur[i] -= 1;
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, 0, m, &mut vec![0; d], &mut out);
    }
    out
}

/// An element of `Sym^m(A^d)` in multiset coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    coords: Vec<AlgebraElement>,
    order: u32,
    base_dim: usize,
}

impl SymVector {
    pub fn coords(&self) -> &[AlgebraElement] {
        &self.coords
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn spectrum(&self) -> Spectrum {
        self.coords[0].spectrum()
    }

    /// The same coordinates viewed as a vector of the free module `A^D`.
    pub fn to_module_vector(&self) -> ModuleVector {
        ModuleVector::new(self.coords.clone()).expect("coordinates share a spectrum")
    }
}

fn check_entry_budget(d: u128, k: usize) -> Result<()> {
    if d.saturating_mul(k as u128) > MAX_SYM_ENTRIES {
        return Err(Error::Overflow(format!("Sym-power shape D*K = {d}*{k} exceeds {MAX_SYM_ENTRIES}")));
    }
    Ok(())
}

/// The lift `x -> x^{(x)m}`.
pub fn lift(x: &ModuleVector, m: u32) -> Result<SymVector> {
    if m == 0 {
        return Err(Error::Domain("tensor order must be at least 1".into()));
    }
    let d = x.dim();
    check_entry_budget(sym_rank(d, m)?, x.spectrum().size())?;
    let coords = multiset_indices(d, m)
        .iter()
        .map(|alpha| {
            let weight = (alpha.multinomial()? as f64).sqrt();
            let mut acc = AlgebraElement::real_constant(x.spectrum(), weight);
            for (i, &a) in alpha.exponents().iter().enumerate() {
                if a > 0 {
                    acc = acc.zip_with(x.coord(i), |u, v| u * v.powu(a));
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(SymVector { coords, order: m, base_dim: d })
}

/// `sum_alpha u_alpha v_alpha^*`.
pub fn sym_inner(u: &SymVector, v: &SymVector) -> Result<AlgebraElement> {
    if u.order != v.order || u.base_dim != v.base_dim || u.spectrum() != v.spectrum() {
        return Err(Error::Dimension("symmetric tensors of different shapes".into()));
    }
    let mut acc = AlgebraElement::zero(u.spectrum());
    for (a, b) in u.coords.iter().zip(&v.coords) {
        acc.add_assign_unchecked(&a.zip_with(b, |x, y| x * y.conj()));
    }
    Ok(acc)
}

/// The lifted family `{tau_j^{(x)m}}` as a frame of `A^D`.
pub fn lifted_frame(f: &Frame, m: u32) -> Result<Frame> {
    let vectors = f.vectors().iter().map(|v| lift(v, m).map(|s| s.to_module_vector())).collect::<Result<_>>()?;
    Frame::new(vectors)
}

/// `x -> sum_j <x, tau_j^{(x)m}> tau_j^{(x)m}` on `Sym^m(A^d)`, as a
/// `D x D` matrix in multiset coordinates.
pub fn sym_frame_operator(f: &Frame, m: u32) -> Result<OperatorMatrix> {
    Ok(frame_operator(&lifted_frame(f, m)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSpectrum {
    pub point: usize,
    /// Ascending eigenvalues of the Sym-power frame operator at this point.
    pub eigenvalues: Vec<f64>,
    /// `sum lambda`
    pub trace: f64,
    /// `sum lambda^2`
    pub trace_square: f64,
    /// `sum_{j,k} |<tau_j, tau_k>|^{2m}` at this point.
    pub gram_power_sum: f64,
    /// `(sum lambda)^2`
    pub cs_lhs: f64,
    /// `D sum lambda^2`
    pub cs_rhs: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymSpectrumReport {
    pub m: u32,
    pub rank: u128,
    pub points: Vec<PointSpectrum>,
    pub inequality_holds: bool,
}

/// Absolute tolerance of the trace reconciliation and of the eigenvalue
/// Cauchy-Schwarz inequality.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Diagonalizes the Sym-power frame operator at every spectrum point and
/// checks `Tra = n`, `Tra(S^2) = sum |<tau_j,tau_k>|^{2m}` and
/// `(sum lambda)^2 <= D sum lambda^2`.
pub fn sym_spectrum_check(f: &Frame, m: u32) -> Result<SymSpectrumReport> {
    f.check_unit(UNIT_TOL)?;
    let rank = sym_rank(f.dim(), m)?;
    check_entry_budget(rank, f.spectrum().size())?;
    let op = sym_frame_operator(f, m)?;
    let eig = op.pointwise_eigenvalues()?;
    let g = gram_table(f);
    let power_sum = g.power_sum(m);
    let n = f.n() as f64;
    let dd = rank as f64;

    let points: Vec<PointSpectrum> = eig
        .into_iter()
        .enumerate()
        .map(|(s, eigenvalues)| {
            let trace: f64 = eigenvalues.iter().sum();
            let trace_square: f64 = eigenvalues.iter().map(|l| l * l).sum();
            let gram_power_sum = power_sum.value(s).re;
            let cs_lhs = trace * trace;
            let cs_rhs = dd * trace_square;
            let passes = (trace - n).abs() <= SPECTRUM_TOL
                && (trace_square - gram_power_sum).abs() <= SPECTRUM_TOL
                && cs_lhs <= cs_rhs + SPECTRUM_TOL;
            PointSpectrum { point: s, eigenvalues, trace, trace_square, gram_power_sum, cs_lhs, cs_rhs, passes }
        })
        .collect();
    let inequality_holds = points.iter().all(|p| p.passes);
    Ok(SymSpectrumReport { m, rank, points, inequality_holds })
}
