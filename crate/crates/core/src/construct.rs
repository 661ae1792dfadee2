//! Named and random frame constructions. Named frames are constant
//! functions on the spectrum: the same classical frame at every point.

use num_complex::Complex64;

use crate::algebra::Spectrum;
use crate::error::Result;
use crate::linalg::{orthonormalize_columns, CMatrix};
use crate::module::{Frame, ModuleVector, OperatorMatrix};
use crate::optimize::project_unit;
use crate::rng::SeededRng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn constant_frame(spectrum: Spectrum, vectors: &[Vec<Complex64>]) -> Frame {
    let d = vectors[0].len();
    Frame::from_slices(spectrum, d, vectors.len(), |j, _| vectors[j].clone()).expect("well-formed constant frame")
}

/// Canonical basis `e_1, ..., e_d`.
pub fn orthonormal_basis(spectrum: Spectrum, d: usize) -> Frame {
    Frame::new((0..d).map(|r| ModuleVector::canonical(spectrum, d, r)).collect()).expect("d >= 1")
}

/// Three equally spaced unit vectors in the plane.
pub fn mercedes_benz(spectrum: Spectrum) -> Frame {
    let h = 3f64.sqrt() / 2.0;
    constant_frame(
        spectrum,
        &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(-0.5, 0.0), c(h, 0.0)], vec![c(-0.5, 0.0), c(-h, 0.0)]],
    )
}

/// The qubit SIC: Weyl-Heisenberg orbit `X^p Z^q psi` of the tetrahedral
/// fiducial `psi = (sqrt((3+sqrt3)/6), e^{i pi/4} sqrt((3-sqrt3)/6))`.
pub fn sic_d2(spectrum: Spectrum) -> Frame {
    let s3 = 3f64.sqrt();
    let a = c(((3.0 + s3) / 6.0).sqrt(), 0.0);
    let b = Complex64::from_polar(((3.0 - s3) / 6.0).sqrt(), std::f64::consts::FRAC_PI_4);
    // psi, Z psi, X psi, X Z psi
    constant_frame(spectrum, &[vec![a, b], vec![a, -b], vec![b, a], vec![-b, a]])
}

/// Pointwise complex Gaussian vectors, not normalized. Draw order is
/// vector, then spectrum point, then coordinate.
pub fn random_raw_frame(rng: &mut SeededRng, spectrum: Spectrum, d: usize, n: usize) -> Result<Frame> {
    Frame::from_slices(spectrum, d, n, |_, _| (0..d).map(|_| rng.complex_gaussian()).collect())
}

/// Gaussian frame projected to unit inner products: each slice is uniform
/// on the unit sphere of `C^d`.
pub fn random_unit_frame(rng: &mut SeededRng, spectrum: Spectrum, d: usize, n: usize) -> Result<Frame> {
    project_unit(&random_raw_frame(rng, spectrum, d, n)?)
}

fn random_unitary(rng: &mut SeededRng, d: usize) -> CMatrix {
    loop {
        let g = CMatrix::from_fn(d, |_, _| rng.complex_gaussian());
        if let Some(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

/// An orthonormal basis of `A^d` built from an independent random unitary
/// at each spectrum point (columns become the basis vectors).
pub fn random_orthonormal_basis(rng: &mut SeededRng, spectrum: Spectrum, d: usize) -> Vec<ModuleVector> {
    let us: Vec<CMatrix> = (0..spectrum.size()).map(|_| random_unitary(rng, d)).collect();
    (0..d)
        .map(|j| ModuleVector::from_slices(spectrum, d, |s| (0..d).map(|r| us[s][(r, j)]).collect()).expect("shape"))
        .collect()
}

/// Random self-adjoint operator: `(G + G^*)/2` with Gaussian `G` per point.
pub fn random_self_adjoint(rng: &mut SeededRng, spectrum: Spectrum, d: usize) -> OperatorMatrix {
    let points: Vec<CMatrix> = (0..spectrum.size())
        .map(|_| {
            let g = CMatrix::from_fn(d, |_, _| rng.complex_gaussian());
            CMatrix::from_fn(d, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5)
        })
        .collect();
    OperatorMatrix::from_points(&points).expect("shape")
}
