//! Welch-type lower bounds and the classical comparator bounds.
//!
//! For a unit-inner-product family of `n` vectors in a rank-`d` module and
//! every order `m >= 1`:
//!
//! ```text
//! sum_{j,k} ||<t_j,t_k>||^{2m} >= sum_{j,k} <t_j,t_k>^m <t_k,t_j>^m >= n^2 / C(d+m-1, m)
//! max_{j!=k} ||<t_j,t_k>||^{2m} >= (n / C(d+m-1, m) - 1) / (n - 1)
//! ```
//!
//! The middle term is an algebra element and its inequality holds in the
//! algebra order. Closed forms are evaluated in exact rationals and only
//! then converted to `f64`.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::module::{frame_correlation_from_gram, gram_table, Frame, UNIT_TOL};

/// Relative slack for `lhs >= rhs` checks: `lhs >= rhs - HOLD_SLACK * max(1, |rhs|)`.
pub const HOLD_SLACK: f64 = 1e-9;
/// Absolute tolerance for reporting that a bound is attained.
pub const EQUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WelchParams {
    pub n: u64,
    pub d: u64,
    pub m: u32,
}

impl WelchParams {
    pub fn new(n: u64, d: u64, m: u32) -> Result<Self> {
        if n == 0 || d == 0 || m == 0 {
            return Err(Error::Domain(format!("need n, d, m >= 1 (got n={n}, d={d}, m={m})")));
        }
        Ok(WelchParams { n, d, m })
    }

    /// `C(d+m-1, m)`, the rank of the m-th symmetric power.
    pub fn sym_rank(&self) -> Result<i128> {
        binomial(self.d as i128 + self.m as i128 - 1, self.m as i128)
    }
}

/// Exact binomial coefficient with overflow detection.
pub fn binomial(n: i128, k: i128) -> Result<i128> {
    if k < 0 || n < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n - i).ok_or_else(|| Error::Overflow(format!("C({n}, {k}) exceeds 128 bits")))? / (i + 1);
    }
    Ok(acc)
}

fn to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(1/(n-1)) (n / C(d+m-1, m) - 1)` as an exact rational.
pub fn welch_max_bound_exact(p: WelchParams) -> Result<Ratio<i128>> {
    if p.n < 2 {
        return Err(Error::Domain("the max-form bound needs n >= 2".into()));
    }
    let c = p.sym_rank()?;
    let n = p.n as i128;
    let denom =
        c.checked_mul(n - 1).ok_or_else(|| Error::Overflow("welch bound denominator exceeds 128 bits".into()))?;
    Ok(Ratio::new(n - c, denom))
}

/// Max-form bound on `max_{j != k} ||<t_j, t_k>||^{2m}`. Negative values
/// (vacuous bounds) are returned as they are.
pub fn welch_max_bound(p: WelchParams) -> Result<f64> {
    welch_max_bound_exact(p).map(to_f64)
}

pub fn welch_sum_bound_exact(p: WelchParams) -> Result<Ratio<i128>> {
    let n = p.n as i128;
    let n2 = n.checked_mul(n).ok_or_else(|| Error::Overflow("n^2 exceeds 128 bits".into()))?;
    Ok(Ratio::new(n2, p.sym_rank()?))
}

/// Sum-form bound `n^2 / C(d+m-1, m)`.
pub fn welch_sum_bound(p: WelchParams) -> Result<f64> {
    welch_sum_bound_exact(p).map(to_f64)
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - HOLD_SLACK * rhs.abs().max(1.0)
}

/// `lhs` of the max form of the generalized bound and its right side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxFormCheck {
    pub lhs: f64,
    /// Largest pointwise value of the right-hand element.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedCheck {
    pub m: u32,
    /// `sum_{j,k} <t_j,t_k>^m <t_k,t_j>^m`
    pub lhs: AlgebraElement,
    /// `(sum_j <t_j,t_j>^m)^2 / C(d+m-1, m)`
    pub rhs: AlgebraElement,
    pub holds: bool,
    pub max_form: Option<MaxFormCheck>,
}

/// The Welch inequality for families that need not have unit inner
/// products. With `with_max_form` (and `n >= 2`) also checks
/// `max ||<t_j,t_k>||^{2m} >= [rhs - sum_j ||t_j||^{4m}] / (n^2 - n)`
/// pointwise.
pub fn generalized_welch_check(f: &Frame, m: u32, with_max_form: bool, tol: f64) -> Result<GeneralizedCheck> {
    let n = f.n();
    let p = WelchParams::new(n as u64, f.dim() as u64, m)?;
    let c = p.sym_rank()? as f64;
    let g = gram_table(f);
    let lhs = g.power_sum(m).map(|z| Complex64::new(z.re, 0.0));

    let mut diag_sum = AlgebraElement::zero(f.spectrum());
    let mut norms_4m = 0.0;
    for j in 0..n {
        let gjj = g.get(j, j);
        diag_sum.add_assign_unchecked(&gjj.int_power(m)?);
        norms_4m += gjj.norm().powi(2 * m as i32);
    }
    let rhs = diag_sum.zip_with(&diag_sum, |a, b| a * b).scale(1.0 / c);
    let scale = rhs.norm().max(1.0);
    let holds = rhs.map(|z| Complex64::new(z.re, 0.0)).leq(&lhs, tol * scale)?;

    let max_form = if with_max_form && n >= 2 {
        let cor = frame_correlation_from_gram(&g)?;
        let lhs = cor.value.powi(2 * m as i32);
        let pairs = (n * n - n) as f64;
        let rhs = (rhs.max_real() - norms_4m) / pairs;
        Some(MaxFormCheck { lhs, rhs, holds: holds_abs(lhs, rhs, tol * scale) })
    } else {
        None
    };
    Ok(GeneralizedCheck { m, lhs, rhs, holds, max_form })
}

fn holds_abs(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs >= rhs - tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// `dim_R(K) / 2`.
    fn half_real_dim(self) -> f64 {
        match self {
            Field::Real => 0.5,
            Field::Complex => 1.0,
        }
    }
}

/// Gerzon's bound on the number of equiangular lines: `d^2` over the
/// complex numbers, `d(d+1)/2` over the reals.
pub fn gerzon_bound(d: u64, field: Field) -> Result<u64> {
    let overflow = || Error::Overflow(format!("Gerzon bound for d={d} exceeds 64 bits"));
    match field {
        Field::Complex => d.checked_mul(d).ok_or_else(overflow),
        Field::Real => d.checked_mul(d + 1).map(|x| x / 2).ok_or_else(overflow),
    }
}

/// A bound value with the condition under which it applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flagged {
    pub value: f64,
    pub applicable: bool,
}

/// Classical lower bounds on `max |<t_j, t_k>|` for unit vectors in `K^d`.
/// `None` marks a bound whose formula is undefined for the given shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparators {
    pub gerzon: u64,
    pub bukh_cox: Option<f64>,
    pub orthoplex: Flagged,
    pub levenstein: Option<f64>,
    pub exponential: Option<f64>,
}

pub fn classical_comparators(n: u64, d: u64, field: Field) -> Result<Comparators> {
    if n == 0 || d == 0 {
        return Err(Error::Domain("comparators need n, d >= 1".into()));
    }
    let m = field.half_real_dim();
    let gerzon = gerzon_bound(d, field)?;
    let (nf, df) = (n as f64, d as f64);

    let bukh_cox = (n > d)
        .then(|| -> Result<f64> {
            let z = gerzon_bound(n - d, field)? as f64;
            let k = nf - df;
            Ok(z / (nf * (1.0 + m * (k - 1.0) * (1.0 / m + k).sqrt()) - z))
        })
        .transpose()?;

    let orthoplex = Flagged { value: 1.0 / df.sqrt(), applicable: n > gerzon };

    let levenstein = (n > gerzon).then(|| {
        let num = nf * (m + 1.0) - df * (m * df + 1.0);
        let den = (nf - df) * (m * df + 1.0);
        (num / den).sqrt()
    });

    let exponential = (d >= 2).then(|| 1.0 - 2.0 * nf.powf(-1.0 / (df - 1.0)));

    Ok(Comparators { gerzon, bukh_cox, orthoplex, levenstein, exponential })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCheck {
    pub m: u32,
    pub max_bound: f64,
    /// `coherence^{2m}`
    pub max_lhs: f64,
    pub holds: bool,
    pub equality: bool,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumCheck {
    pub m: u32,
    pub sum_bound: f64,
    /// `sum_{j,k} ||<t_j,t_k>||^{2m}`
    pub sum_lhs: f64,
    /// Pointwise extremes of `sum_{j,k} <t_j,t_k>^m <t_k,t_j>^m`.
    pub middle_min: f64,
    pub middle_max: f64,
    pub holds: bool,
    /// `sum_bound * 1 <= middle <= sum_lhs * 1` in the algebra order.
    pub middle_holds: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub coherence: f64,
    pub witness: [usize; 2],
    pub orders: Vec<OrderCheck>,
    pub sums: Vec<SumCheck>,
    pub comparators: Comparators,
    pub vacuous_orders: Vec<u32>,
}

impl BoundReport {
    /// Number of failed `holds` / `middle_holds` flags.
    pub fn violations(&self) -> usize {
        self.orders.iter().filter(|o| !o.holds).count()
            + self.sums.iter().map(|s| usize::from(!s.holds) + usize::from(!s.middle_holds)).sum::<usize>()
    }

    pub fn all_hold(&self) -> bool {
        self.violations() == 0
    }
}

/// Checks every Welch-type bound of order `1..=max_order` on a
/// unit-inner-product frame.
pub fn verify_frame(f: &Frame, max_order: u32) -> Result<BoundReport> {
    if max_order == 0 {
        return Err(Error::Domain("max_order must be at least 1".into()));
    }
    let n = f.n();
    if n < 2 {
        return Err(Error::Domain("bound verification needs at least two vectors".into()));
    }
    f.check_unit(UNIT_TOL)?;
    let (d, k) = (f.dim(), f.spectrum().size());
    let g = gram_table(f);
    let cor = frame_correlation_from_gram(&g)?;

    let mut norms = Vec::with_capacity(n * n);
    for j in 0..n {
        for kk in 0..n {
            norms.push(g.get(j, kk).norm());
        }
    }

    let mut orders = Vec::new();
    let mut sums = Vec::new();
    let mut vacuous_orders = Vec::new();
    for m in 1..=max_order {
        let p = WelchParams::new(n as u64, d as u64, m)?;
        let max_bound = welch_max_bound(p)?;
        let max_lhs = cor.value.powi(2 * m as i32);
        let vacuous = max_bound < 0.0;
        if vacuous {
            vacuous_orders.push(m);
        }
        orders.push(OrderCheck {
            m,
            max_bound,
            max_lhs,
            holds: holds(max_lhs, max_bound),
            equality: (max_lhs - max_bound).abs() <= EQUALITY_TOL,
            vacuous,
        });

        let sum_bound = welch_sum_bound(p)?;
        let sum_lhs: f64 = norms.iter().map(|x| x.powi(2 * m as i32)).sum();
        let middle = g.power_sum(m);
        let slack = HOLD_SLACK * sum_bound.abs().max(sum_lhs).max(1.0);
        let lower = AlgebraElement::real_constant(f.spectrum(), sum_bound);
        let upper = AlgebraElement::real_constant(f.spectrum(), sum_lhs);
        let middle_holds = lower.leq(&middle, slack).unwrap_or(false) && middle.leq(&upper, slack).unwrap_or(false);
        sums.push(SumCheck {
            m,
            sum_bound,
            sum_lhs,
            middle_min: middle.min_real(),
            middle_max: middle.max_real(),
            holds: holds(sum_lhs, sum_bound),
            middle_holds,
            equality: (sum_lhs - sum_bound).abs() <= EQUALITY_TOL,
        });
    }

    Ok(BoundReport {
        n,
        d,
        k,
        coherence: cor.value,
        witness: [cor.witness.0, cor.witness.1],
        orders,
        sums,
        comparators: classical_comparators(n as u64, d as u64, Field::Complex)?,
        vacuous_orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Spectrum;
    use crate::construct;
    use crate::module::ModuleVector;
    use crate::rng::SeededRng;

    fn wp(n: u64, d: u64, m: u32) -> WelchParams {
        WelchParams::new(n, d, m).unwrap()
    }

    /// Max-form bound from integer arithmetic alone:
    /// `(n - C) / (C (n - 1))` with `C` counted by enumerating multisets.
    fn oracle_max_bound(n: i64, d: i64, m: i64) -> (i64, i64) {
        fn count(d: i64, m: i64) -> i64 {
            if d == 1 || m == 0 {
                1
            } else {
                (0..=m).map(|first| count(d - 1, m - first)).sum()
            }
        }
        let c = count(d, m);
        (n - c, c * (n - 1))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(3, 0).unwrap(), 1);
        assert_eq!(binomial(2, 3).unwrap(), 0);
        assert_eq!(binomial(60, 30).unwrap(), 118264581564861424);
        assert!(matches!(binomial(400, 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn max_bound_examples() {
        let (num, den) = oracle_max_bound(4, 2, 1);
        assert_eq!((num, den), (2, 6));
        assert_eq!(welch_max_bound_exact(wp(4, 2, 1)).unwrap(), Ratio::new(1, 3));
        assert_eq!(welch_max_bound(wp(4, 2, 1)).unwrap(), 1.0 / 3.0);
        for d in 1..6 {
            assert_eq!(welch_max_bound(wp(d.max(2), d.max(2), 1)).unwrap(), 0.0);
        }
        let (num, den) = oracle_max_bound(4, 2, 2);
        assert_eq!(Ratio::new(num as i128, den as i128), Ratio::new(1, 9));
        assert_eq!(welch_max_bound_exact(wp(4, 2, 2)).unwrap(), Ratio::new(1, 9));
        assert!(matches!(welch_max_bound(wp(1, 1, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn max_bound_matches_enumeration_oracle() {
        for n in 2..12 {
            for d in 1..5 {
                for m in 1..4 {
                    let (num, den) = oracle_max_bound(n, d, m);
                    let want = Ratio::new(num as i128, den as i128);
                    assert_eq!(welch_max_bound_exact(wp(n as u64, d as u64, m as u32)).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn max_bound_is_vacuous_then_increasing() {
        // d = 1 gives the constant 1 for every n
        for n in 2..10 {
            assert_eq!(welch_max_bound(wp(n, 1, 2)).unwrap(), 1.0);
        }
        for d in 2..5u64 {
            for m in 1..4 {
                let mut prev = f64::NEG_INFINITY;
                for n in 2..40 {
                    let b = welch_max_bound(wp(n, d, m)).unwrap();
                    if prev > 0.0 {
                        assert!(b > prev, "n={n} d={d} m={m}");
                    }
                    prev = b;
                }
            }
        }
        assert!(welch_max_bound(wp(2, 3, 1)).unwrap() < 0.0);
    }

    #[test]
    fn sum_bound_examples() {
        assert_eq!(welch_sum_bound(wp(4, 2, 1)).unwrap(), 8.0);
        for d in 1..6 {
            assert_eq!(welch_sum_bound(wp(d, d, 1)).unwrap(), d as f64);
        }
        assert_eq!(welch_sum_bound_exact(wp(9, 3, 2)).unwrap(), Ratio::new(27, 2));
    }

    #[test]
    fn gerzon_examples() {
        assert_eq!(gerzon_bound(3, Field::Complex).unwrap(), 9);
        assert_eq!(gerzon_bound(3, Field::Real).unwrap(), 6);
        assert_eq!(gerzon_bound(1, Field::Complex).unwrap(), 1);
        assert_eq!(gerzon_bound(1, Field::Real).unwrap(), 1);
        assert!(gerzon_bound(u64::MAX, Field::Complex).is_err());
    }

    #[test]
    fn comparator_examples() {
        let c = classical_comparators(10, 4, Field::Complex).unwrap();
        assert_eq!(c.orthoplex.value, 0.5);
        assert!(!c.orthoplex.applicable);
        assert!(classical_comparators(17, 4, Field::Complex).unwrap().orthoplex.applicable);
        assert!(!classical_comparators(16, 4, Field::Complex).unwrap().orthoplex.applicable);

        let c = classical_comparators(3, 3, Field::Complex).unwrap();
        assert_eq!(c.bukh_cox, None);
        assert_eq!(c.levenstein, None);
        assert_eq!(classical_comparators(9, 3, Field::Complex).unwrap().levenstein, None);
        assert_eq!(classical_comparators(6, 3, Field::Real).unwrap().levenstein, None);

        assert_eq!(classical_comparators(2, 2, Field::Complex).unwrap().exponential, Some(0.0));
        assert_eq!(classical_comparators(5, 1, Field::Complex).unwrap().exponential, None);
    }

    #[test]
    fn comparator_closed_forms() {
        // n = 5, d = 2 over C: Z(3) = 9, 9 / (5 (1 + 2 sqrt 4) - 9) = 9/16
        let c = classical_comparators(5, 2, Field::Complex).unwrap();
        assert!((c.bukh_cox.unwrap() - 9.0 / 16.0).abs() < 1e-15);
        // Levenstein n = 5, d = 2 over C: sqrt((10 - 6) / (3 * 3)) = 2/3
        assert!((c.levenstein.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // over R, m = 1/2: n = 4, d = 2, Levenstein sqrt((6 - 4) / (2 * 2)) = 1/sqrt 2
        let r = classical_comparators(4, 2, Field::Real).unwrap();
        assert!((r.levenstein.unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        // Bukh-Cox over R, n = 4, d = 2: Z(2,R) = 3, 3 / (4 (1 + 0.5 * sqrt(4)) - 3) = 3/5
        assert!((r.bukh_cox.unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn verify_orthonormal_basis() {
        let f = construct::orthonormal_basis(Spectrum::new(2).unwrap(), 3);
        let r = verify_frame(&f, 3).unwrap();
        assert!(r.all_hold());
        assert_eq!(r.coherence, 0.0);
        assert!(r.orders[0].equality);
        assert_eq!(r.orders[0].max_bound, 0.0);
        assert!(r.sums[0].equality);
        // m >= 2 bounds are negative for n = d
        assert_eq!(r.vacuous_orders, vec![2, 3]);
    }

    #[test]
    fn verify_mercedes_and_sic() {
        let r = verify_frame(&construct::mercedes_benz(Spectrum::new(1).unwrap()), 2).unwrap();
        assert!(r.all_hold());
        assert!((r.coherence.powi(2) - 0.25).abs() < 1e-15);
        assert_eq!(r.orders[0].max_bound, 0.25);
        assert!(r.orders[0].equality);

        let r = verify_frame(&construct::sic_d2(Spectrum::new(3).unwrap()), 2).unwrap();
        assert!(r.all_hold());
        assert!(r.orders[0].equality && r.orders[1].equality);
        assert_eq!(r.orders[1].max_bound, 1.0 / 9.0);
    }

    #[test]
    fn verify_rejects_non_unit_and_tiny_frames() {
        let sp = Spectrum::new(1).unwrap();
        let two = AlgebraElement::from_real(&[2.0]).unwrap();
        let f = Frame::new(vec![
            ModuleVector::canonical(sp, 2, 0),
            ModuleVector::canonical(sp, 2, 1).scale_by(&two).unwrap(),
        ])
        .unwrap();
        assert!(matches!(verify_frame(&f, 1), Err(Error::NotUnit { ref indices, .. }) if indices == &vec![1]));
        let one = Frame::new(vec![ModuleVector::canonical(sp, 2, 0)]).unwrap();
        assert!(verify_frame(&one, 1).is_err());
        assert!(verify_frame(&construct::mercedes_benz(sp), 0).is_err());
    }

    #[test]
    fn generalized_check_examples() {
        let sp = Spectrum::new(2).unwrap();
        // single vector: lhs = <t,t>^2, rhs = <t,t>^2 / d
        let t = ModuleVector::canonical(sp, 3, 0).scale_by(&AlgebraElement::from_real(&[2.0, 0.5]).unwrap()).unwrap();
        let f = Frame::new(vec![t]).unwrap();
        let g = generalized_welch_check(&f, 1, true, 1e-9).unwrap();
        assert_eq!(g.lhs, AlgebraElement::from_real(&[16.0, 0.0625]).unwrap());
        assert!(g.rhs.max_abs_diff(&AlgebraElement::from_real(&[16.0 / 3.0, 0.0625 / 3.0]).unwrap()).unwrap() < 1e-15);
        assert!(g.holds);
        assert!(g.max_form.is_none());

        // unit frame: rhs collapses to n^2 / C
        let f = construct::sic_d2(sp);
        for m in 1..4 {
            let g = generalized_welch_check(&f, m, true, 1e-9).unwrap();
            let want = welch_sum_bound(wp(4, 2, m)).unwrap();
            assert!(g.rhs.max_abs_diff(&AlgebraElement::real_constant(sp, want)).unwrap() < 1e-12);
            assert!(g.holds);
            assert!(g.max_form.unwrap().holds);
        }
    }

    #[test]
    fn generalized_check_on_scaled_random_frames() {
        let mut rng = SeededRng::new(99);
        for trial in 0..50 {
            let d = 2 + trial % 2;
            let m = 1 + (trial / 2) % 2;
            let sp = Spectrum::new(1 + trial % 3).unwrap();
            let f = construct::random_raw_frame(&mut rng, sp, d, 2 + trial % 5).unwrap();
            let g = generalized_welch_check(&f, m as u32, true, 1e-9).unwrap();
            assert!(g.holds, "trial {trial}");
            assert!(g.max_form.unwrap().holds, "trial {trial}");
        }
    }
}
