//! Coherence minimization over unit-inner-product frames.
//!
//! Every coherence-type quantity decomposes over the spectrum, so the search
//! works on the classical slices `tau_j(s)` directly. The objective is the
//! log-sum-exp smoothing of all squared pointwise cross inner products
//! `q_jks = |<tau_j(s), tau_k(s)>|^2`,
//!
//! ```text
//! F_T = T log sum_{j != k, s} exp(q_jks / T)  >=  max q = coherence^2,
//! ```
//!
//! minimized by projected gradient descent with backtracking while the
//! temperature `T` is cooled geometrically. Results are certified against
//! the first-order Welch bound, never claimed optimal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Spectrum;
use crate::bounds::{welch_max_bound, welch_max_bound_exact, WelchParams, EQUALITY_TOL};
use crate::construct::random_raw_frame;
use crate::error::{Error, Result};
use crate::module::{frame_correlation, frame_operator, is_equiangular, Frame, UNIT_TOL};
use crate::rng::SeededRng;

const MIN_SLICE_NORM: f64 = 1e-14;
const MAX_HALVINGS: u32 = 30;
const ARMIJO: f64 = 0.25;

/// Frame slices stored contiguously: entry `(j, s, r)` at `(j*K + s)*d + r`.
#[derive(Debug, Clone, PartialEq)]
struct Slices {
    n: usize,
    k: usize,
    d: usize,
    data: Vec<Complex64>,
}

impl Slices {
    fn from_frame(f: &Frame) -> Self {
        let (n, k, d) = (f.n(), f.spectrum().size(), f.dim());
        let mut data = Vec::with_capacity(n * k * d);
        for v in f.vectors() {
            for s in 0..k {
                data.extend(v.coords().iter().map(|c| c.value(s)));
            }
        }
        Slices { n, k, d, data }
    }

    fn to_frame(&self) -> Frame {
        let sp = Spectrum::new(self.k).expect("k >= 1");
        Frame::from_slices(sp, self.d, self.n, |j, s| self.slice(j, s).to_vec()).expect("consistent shape")
    }

    fn slice(&self, j: usize, s: usize) -> &[Complex64] {
        let at = (j * self.k + s) * self.d;
        &self.data[at..at + self.d]
    }

    fn slice_mut(&mut self, j: usize, s: usize) -> &mut [Complex64] {
        let at = (j * self.k + s) * self.d;
        &mut self.data[at..at + self.d]
    }

    fn zeros_like(&self) -> Self {
        Slices { data: vec![Complex64::new(0.0, 0.0); self.data.len()], ..*self }
    }

    fn normalize(&mut self) -> Result<()> {
        for j in 0..self.n {
            for s in 0..self.k {
                let v = self.slice_mut(j, s);
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if !(norm >= MIN_SLICE_NORM) {
                    return Err(Error::Degenerate { vector: j, point: s });
                }
                v.iter_mut().for_each(|z| *z /= norm);
            }
        }
        Ok(())
    }
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Scales every slice of every vector to Euclidean norm one, giving
/// `<tau_j, tau_j> = 1`.
pub fn project_unit(f: &Frame) -> Result<Frame> {
    let mut x = Slices::from_frame(f);
    x.normalize()?;
    Ok(x.to_frame())
}

/// Optional equiangularity penalty `weight * sum_{j != k, s} (q_jks - target)^2`.
#[derive(Debug, Clone, Copy)]
struct Penalty {
    weight: f64,
    target: f64,
}

struct Evaluation {
    value: f64,
    max_q: f64,
    grad: Option<Slices>,
}

/// Log-sum-exp objective over ordered pairs (each unordered pair counted
/// twice), plus the optional penalty.
fn evaluate(x: &Slices, temperature: f64, penalty: Option<Penalty>, want_grad: bool) -> Evaluation {
    let (n, k) = (x.n, x.k);
    let mut g = Vec::with_capacity(n * (n - 1) / 2 * k);
    let mut max_q = f64::NEG_INFINITY;
    for j in 0..n {
        for kk in (j + 1)..n {
            for s in 0..k {
                let gi = dot(x.slice(j, s), x.slice(kk, s));
                max_q = max_q.max(gi.norm_sqr());
                g.push(gi);
            }
        }
    }
    let sum_exp: f64 = g.iter().map(|z| ((z.norm_sqr() - max_q) / temperature).exp()).sum();
    let mut value = max_q + temperature * (2.0 * sum_exp).ln();
    if let Some(p) = penalty {
        value += p.weight * 2.0 * g.iter().map(|z| (z.norm_sqr() - p.target).powi(2)).sum::<f64>();
    }
    if !want_grad {
        return Evaluation { value, max_q, grad: None };
    }

    let mut grad = x.zeros_like();
    let mut idx = 0;
    for j in 0..n {
        for kk in (j + 1)..n {
            for s in 0..k {
                let gi = g[idx];
                idx += 1;
                let q = gi.norm_sqr();
                // dF/dq for the unordered pair
                let mut coef = ((q - max_q) / temperature).exp() / sum_exp;
                if let Some(p) = penalty {
                    coef += 4.0 * p.weight * (q - p.target);
                }
                // d q / d x_j = 2 g x_k and d q / d x_k = 2 conj(g) x_j
                let a = gi * (2.0 * coef);
                for r in 0..x.d {
                    let xk = x.slice(kk, s)[r];
                    let xj = x.slice(j, s)[r];
                    grad.slice_mut(j, s)[r] += a * xk;
                    grad.slice_mut(kk, s)[r] += a.conj() * xj;
                }
            }
        }
    }
    Evaluation { value, max_q, grad: Some(grad) }
}

/// Smoothed squared coherence
/// `T log sum_{j != k, s} exp(|<tau_j(s), tau_k(s)>|^2 / T)` and its
/// gradient with respect to the real and imaginary parts of every
/// coordinate (packed as `d/d re + i d/d im`).
pub fn smoothed_coherence(f: &Frame, temperature: f64) -> Result<(f64, Frame)> {
    if !(temperature > 0.0) {
        return Err(Error::Domain("temperature must be positive".into()));
    }
    if f.n() < 2 {
        return Err(Error::Domain("smoothed coherence needs at least two vectors".into()));
    }
    let x = Slices::from_frame(f);
    let e = evaluate(&x, temperature, None, true);
    Ok((e.value, e.grad.expect("requested").to_frame()))
}

/// Removes the radial component of the gradient on each slice.
fn tangent(grad: &mut Slices, x: &Slices) {
    for j in 0..x.n {
        for s in 0..x.k {
            let xs = x.slice(j, s);
            let radial = dot(grad.slice(j, s), xs).re;
            for (gz, xz) in grad.slice_mut(j, s).iter_mut().zip(xs) {
                *gz -= xz * radial;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub initial_temperature: f64,
    /// Per-iteration temperature factor.
    pub cooling: f64,
    pub min_temperature: f64,
    /// Largest trial step.
    pub step: f64,
    /// Per-iteration factor applied to the largest trial step.
    pub step_decay: f64,
    pub seed: u64,
    /// Squared-coherence target; the first-order Welch bound when absent.
    pub target: Option<f64>,
    pub tolerance: f64,
    /// Initial weight of the equiangularity penalty (SIC mode only).
    pub penalty_weight: f64,
    /// The penalty weight grows linearly to `penalty_weight * penalty_growth`.
    pub penalty_growth: f64,
}

impl SearchConfig {
    pub fn new(k: usize, d: usize, n: usize) -> Self {
        SearchConfig {
            k,
            d,
            n,
            restarts: 10,
            max_iters: 5000,
            initial_temperature: 0.1,
            cooling: 0.99,
            min_temperature: 1e-3,
            step: 0.5,
            step_decay: 1.0,
            seed: 0,
            target: None,
            tolerance: 1e-6,
            penalty_weight: 1.0,
            penalty_growth: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.k == 0 || self.d == 0 {
            return bad("K and d must be at least 1");
        }
        if self.n < 2 || self.n < self.d {
            return bad("need n >= d and n >= 2");
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return bad("restarts and max_iters must be at least 1");
        }
        if !(self.initial_temperature > 0.0) || !(self.min_temperature > 0.0) {
            return bad("temperatures must be positive");
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return bad("cooling must lie in (0, 1]");
        }
        if !(self.step > 0.0) || !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return bad("step must be positive and step_decay in (0, 1]");
        }
        if !(self.tolerance >= 0.0) || !(self.penalty_weight >= 0.0) || !(self.penalty_growth >= 1.0) {
            return bad("tolerance, penalty weight and growth out of range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    /// Objective at the current temperature before the step.
    pub smoothed: f64,
    /// True coherence before the step.
    pub coherence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub frame: Frame,
    pub coherence: f64,
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub config: SearchConfig,
    pub best_frame: Frame,
    pub best_coherence: f64,
    pub best_restart: usize,
    /// First-order Welch bound `(n-d)/(d(n-1))` on squared coherence.
    pub welch_bound: f64,
    /// Squared-coherence value the attainment flag is measured against.
    pub target: f64,
    pub attained: bool,
    /// Largest distance of a pointwise squared cross inner product from the
    /// target (SIC mode) or from their mean.
    pub equiangularity_residual: f64,
    /// Largest pointwise Frobenius norm of `S_tau - (n/d) I`.
    pub tightness_residual: f64,
    /// SIC mode: unit, equiangular at `1/(d+1)` and tight within tolerance.
    pub conjecture_witness: Option<bool>,
    pub restarts: Vec<RestartOutcome>,
}

fn pointwise_tightness_residual(f: &Frame) -> f64 {
    let s = frame_operator(f);
    let a = f.n() as f64 / f.dim() as f64;
    (0..f.spectrum().size())
        .map(|p| {
            let m = s.at_point(p);
            let mut acc = 0.0;
            for i in 0..f.dim() {
                for j in 0..f.dim() {
                    let want = if i == j { a } else { 0.0 };
                    acc += (m[(i, j)] - want).norm_sqr();
                }
            }
            acc.sqrt()
        })
        .fold(0.0, f64::max)
}

fn max_deviation_from(f: &Frame, target: f64) -> f64 {
    let x = Slices::from_frame(f);
    let mut worst = 0.0f64;
    for j in 0..x.n {
        for k in (j + 1)..x.n {
            for s in 0..x.k {
                worst = worst.max((dot(x.slice(j, s), x.slice(k, s)).norm_sqr() - target).abs());
            }
        }
    }
    worst
}

/// Worker count for independent jobs: `MODFRAME_THREADS` if set and
/// positive, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("MODFRAME_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_restart(cfg: &SearchConfig, index: usize, goal: f64, sic: Option<f64>) -> Result<RestartOutcome> {
    let mut rng = SeededRng::for_stream(cfg.seed, index as u64);
    let sp = Spectrum::new(cfg.k)?;
    let mut x = Slices::from_frame(&random_raw_frame(&mut rng, sp, cfg.d, cfg.n)?);
    x.normalize()?;

    let mut temperature = cfg.initial_temperature;
    let mut cap = cfg.step;
    let mut last_step = cfg.step;
    let mut trajectory = Vec::with_capacity(cfg.max_iters);
    // stop once comfortably inside the goal
    let margin = 1e-2 * cfg.tolerance;

    for it in 0..cfg.max_iters {
        let penalty = sic.map(|target| {
            let frac = if cfg.max_iters > 1 { it as f64 / (cfg.max_iters - 1) as f64 } else { 0.0 };
            Penalty { weight: cfg.penalty_weight * (1.0 + (cfg.penalty_growth - 1.0) * frac), target }
        });
        let e = evaluate(&x, temperature, penalty, true);
        trajectory.push(TrajectoryPoint { iteration: it, smoothed: e.value, coherence: e.max_q.sqrt() });

        let done = e.max_q <= goal + margin && sic.is_none_or(|t| max_deviation_from(&x.to_frame(), t) <= margin);
        if done {
            break;
        }

        let mut grad = e.grad.expect("requested");
        tangent(&mut grad, &x);
        let slope: f64 = grad.data.iter().map(|z| z.norm_sqr()).sum();
        let mut eta = (2.0 * last_step).min(cap);
        for _ in 0..=MAX_HALVINGS {
            let mut y = x.clone();
            for (yz, gz) in y.data.iter_mut().zip(&grad.data) {
                *yz -= gz * eta;
            }
            if y.normalize().is_ok()
                && evaluate(&y, temperature, penalty, false).value <= e.value - ARMIJO * eta * slope
            {
                x = y;
                last_step = eta;
                break;
            }
            eta *= 0.5;
        }
        temperature = (temperature * cfg.cooling).max(cfg.min_temperature);
        cap *= cfg.step_decay;
    }

    let frame = x.to_frame();
    let coherence = frame_correlation(&frame)?.value;
    Ok(RestartOutcome { frame, coherence, trajectory })
}

fn search(cfg: &SearchConfig, sic: Option<f64>) -> Result<SearchResult> {
    cfg.validate()?;
    let welch_bound = welch_max_bound(WelchParams::new(cfg.n as u64, cfg.d as u64, 1)?)?;
    let target = cfg.target.or(sic).unwrap_or(welch_bound);

    let workers = worker_count().min(cfg.restarts).max(1);
    let mut slots: Vec<Option<Result<RestartOutcome>>> = (0..cfg.restarts).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..cfg.restarts)
                        .step_by(workers)
                        .map(|r| (r, run_restart(cfg, r, target, sic)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (r, out) in h.join().expect("restart worker panicked") {
                slots[r] = Some(out);
            }
        }
    });
    let restarts: Vec<RestartOutcome> =
        slots.into_iter().map(|o| o.expect("every restart ran")).collect::<Result<_>>()?;

    // lowest coherence, ties to the lowest restart index
    let best_restart =
        restarts
            .iter()
            .enumerate()
            .fold(0, |best, (i, r)| if r.coherence < restarts[best].coherence { i } else { best });
    let best = &restarts[best_restart];
    let best_frame = best.frame.clone();
    let best_coherence = best.coherence;

    let equiangularity_residual = match sic {
        Some(t) => max_deviation_from(&best_frame, t),
        None => is_equiangular(&best_frame, 0.0)?.spread,
    };
    let tightness_residual = pointwise_tightness_residual(&best_frame);
    let attained = best_coherence * best_coherence <= target + cfg.tolerance;
    let conjecture_witness = sic.map(|_| {
        best_frame.is_unit(UNIT_TOL) && equiangularity_residual <= cfg.tolerance && tightness_residual <= cfg.tolerance
    });

    Ok(SearchResult {
        config: cfg.clone(),
        best_frame,
        best_coherence,
        best_restart,
        welch_bound,
        target,
        attained,
        equiangularity_residual,
        tightness_residual,
        conjecture_witness,
        restarts,
    })
}

/// Multi-restart search for a low-coherence unit-inner-product frame.
pub fn grassmannian_search(cfg: &SearchConfig) -> Result<SearchResult> {
    search(cfg, None)
}

/// Search for `d^2` unit vectors with every pointwise squared cross inner
/// product equal to `1/(d+1)`, adding an annealed equiangularity penalty
/// to the smoothed coherence.
pub fn sic_search(cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.n != cfg.d * cfg.d {
        return Err(Error::Config(format!("SIC search needs n = d^2 = {}, got n = {}", cfg.d * cfg.d, cfg.n)));
    }
    search(cfg, Some(cfg.target.unwrap_or(1.0 / (cfg.d as f64 + 1.0))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    /// `(n-d)/(d(n-1))`; nonpositive means the bound is vacuous.
    pub gamma_squared: f64,
    pub vacuous: bool,
    pub equiangular: bool,
    /// Largest pointwise value of the common squared inner product.
    pub common_value: Option<f64>,
    /// Equiangular with common value `gamma^2 * 1`.
    pub gamma_equiangular: bool,
    pub coherence_squared: f64,
    /// `coherence^2 = gamma^2` within tolerance.
    pub equality: bool,
    /// gamma-equiangular implies equality.
    pub implication_holds: bool,
}

/// Checks a unit-inner-product frame against the equality case of the
/// first-order bound `M >= gamma = sqrt((n-d)/(d(n-1)))`.
pub fn certify_equality(f: &Frame, tol: f64) -> Result<Certification> {
    f.check_unit(UNIT_TOL)?;
    let (n, d) = (f.n(), f.dim());
    if n < 2 {
        return Err(Error::Domain("certification needs at least two vectors".into()));
    }
    let gamma_squared = welch_max_bound(WelchParams::new(n as u64, d as u64, 1)?)?;
    let coherence_squared = frame_correlation(f)?.value.powi(2);
    if n <= d {
        return Ok(Certification {
            gamma_squared,
            vacuous: true,
            equiangular: false,
            common_value: None,
            gamma_equiangular: false,
            coherence_squared,
            equality: false,
            implication_holds: true,
        });
    }
    let e = is_equiangular(f, tol)?;
    let gamma_equiangular = e.equiangular && e.gamma.values().iter().all(|z| (z.re - gamma_squared).abs() <= tol);
    let equality = (coherence_squared - gamma_squared).abs() <= tol;
    Ok(Certification {
        gamma_squared,
        vacuous: false,
        equiangular: e.equiangular,
        common_value: e.equiangular.then(|| e.gamma.max_real()),
        gamma_equiangular,
        coherence_squared,
        equality,
        implication_holds: !gamma_equiangular || equality,
    })
}

/// Default certification tolerance.
pub const CERTIFY_TOL: f64 = EQUALITY_TOL;

/// `gamma^2` as an exact fraction `(n-d)/(d(n-1))`, for reports.
pub fn gamma_squared_exact(n: u64, d: u64) -> Result<num_rational::Ratio<i128>> {
    welch_max_bound_exact(WelchParams::new(n, d, 1)?)
}
