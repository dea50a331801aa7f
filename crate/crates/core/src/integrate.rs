//! Integration over charted manifolds: top-degree quadrature over truncated
//! and polarized regions, pairings with test forms on `𝔤`, limits in `R`
//! and `ε`, Duistermaat–Heckman histograms, and the weak* limit in `s`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eqforms::{exp_i_omega_tilde_at, EquivariantForm};
use crate::error::{check_dim, Error, Result};
use crate::extrap::neville;
use crate::geometry::{Manifold, Region};
use crate::graded::Graded;
use crate::liealg::{bump_axis_nodes, is_strongly_regular, AlgebraVector, TestForm};
use crate::poly::Polynomial;
use crate::quad::rules::gauss_legendre;
use crate::quad::{adaptive, qmc, tensor, AdaptiveOptions, CSum, Estimate, QmcOptions, TensorOptions};

pub type QuadResult = Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Adaptive,
    Tensor,
    Qmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub target_rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub seed: u64,
    /// Panels per axis for the tensor scheme.
    pub tensor_panels: usize,
    pub tensor_order: usize,
    /// Base panel count and order of the inner `𝔤`-quadrature.
    pub inner_panels: usize,
    pub inner_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::Adaptive,
            target_rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_evals: 2_000_000,
            seed: 0,
            tensor_panels: 16,
            tensor_order: 10,
            inner_panels: 24,
            inner_order: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel: f64) -> Self {
        QuadratureSpec { target_rel_tol: rel, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("target_rel_tol must be positive, got {}", self.target_rel_tol)));
        }
        if self.max_evals == 0 || self.tensor_panels == 0 || self.inner_panels == 0 {
            return Err(Error::InvalidParameter("evaluation budgets and panel counts must be positive".into()));
        }
        if self.tensor_order < 2 || self.inner_order < 6 {
            return Err(Error::InvalidParameter("quadrature orders too low (tensor ≥ 2, inner ≥ 6)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    Converged,
    Slow,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitResult {
    pub value: Complex64,
    pub error_estimate: f64,
    /// `(parameter, partial value)` in grid order.
    pub sequence: Vec<(f64, Complex64)>,
    /// Extrapolant built from all but the first grid point; the error
    /// estimate is `|value − last_extrapolant|` for extrapolated limits.
    pub last_extrapolant: Complex64,
    pub converged: bool,
    pub verdict: LimitVerdict,
    /// Quadrature error of the individual partial values (max).
    pub partial_error: f64,
}

/// Extrapolation model for `limit_in_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    None,
    Richardson,
    TailModel,
}

/// `∫ f(p) dp` over a region, where `f` returns the top-degree coefficient
/// at chart point `p`. With `invariant` the angle coordinates are fixed at
/// one value, which is exact for integrands independent of the angles.
pub fn integrate_top(
    m: &Manifold,
    region: &Region,
    invariant: bool,
    spec: &QuadratureSpec,
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
) -> Result<Estimate> {
    spec.validate()?;
    let map = m.region_map(region)?;
    if map.is_empty() {
        return Ok(Estimate::zero());
    }
    let d = m.dim();
    let free: Vec<usize> =
        if invariant { (0..d).filter(|i| !map.angle_dims().contains(i)).collect() } else { (0..d).collect() };
    let g = |yf: &[f64]| -> Complex64 {
        let mut y = [0.5f64; 12];
        for (j, &i) in free.iter().enumerate() {
            y[i] = yf[j];
        }
        let mut p = [0.0f64; 12];
        let jac = map.map(&y[..d], &mut p[..d]);
        if jac == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        f(&p[..d]) * jac
    };
    let nf = free.len();
    let lo = vec![0.0; nf];
    let hi = vec![1.0; nf];
    let est = match spec.scheme {
        Scheme::Adaptive => adaptive(
            &g,
            &lo,
            &hi,
            &AdaptiveOptions { rel_tol: spec.target_rel_tol, abs_tol: spec.abs_tol, max_evals: spec.max_evals },
        ),
        Scheme::Tensor => tensor(&g, &lo, &hi, &TensorOptions::uniform(nf, spec.tensor_panels, spec.tensor_order)),
        Scheme::Qmc => {
            let reps = 16;
            qmc(
                &g,
                &lo,
                &hi,
                &QmcOptions { points_per_replicate: (spec.max_evals / reps).max(1), replicates: reps, seed: spec.seed },
            )
        }
    };
    if !est.value.re.is_finite() || !est.value.im.is_finite() {
        return Err(Error::Evaluation(format!("non-finite integral over `{}`", m.name)));
    }
    Ok(est)
}

/// Integral of the top-degree component of a graded evaluator.
pub fn integrate_graded(
    m: &Manifold,
    integrand: &(dyn Fn(&[f64]) -> Graded + Sync),
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate_top(m, region, false, spec, &|p| integrand(p).top())
}

/// As [`integrate_graded`] for integrands known to be torus-invariant.
pub fn integrate_graded_invariant(
    m: &Manifold,
    integrand: &(dyn Fn(&[f64]) -> Graded + Sync),
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate_top(m, region, true, spec, &|p| integrand(p).top())
}

/// Liouville volume of a region.
pub fn liouville_volume(m: &Manifold, region: &Region, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_top(m, region, true, spec, &|p| Complex64::new(m.liouville_density(p), 0.0))
}

/// Whole manifold if it is compact and `R` covers it, else `M_{≤R}`.
pub fn truncation_region(m: &Manifold, r: f64) -> Region {
    match m.max_moment_norm() {
        Some(mx) if r >= mx => Region::Whole,
        _ => Region::Sublevel(r),
    }
}

/// Tensor Gauss–Legendre rule for `Φ_j(η) = ∫_𝔤 P_j(X)·φ(X)·e^{i⟨η,X⟩} dX`
/// over the support box of `φ`, with panel counts growing with `|η|`.
#[derive(Clone)]
pub struct GFourier {
    phi: TestForm,
    polys: Vec<Polynomial>,
    base_panels: usize,
    rule: (Vec<f64>, Vec<f64>),
    check_rule: (Vec<f64>, Vec<f64>),
}

impl GFourier {
    pub fn new(phi: &TestForm, polys: Vec<Polynomial>, base_panels: usize, order: usize) -> Self {
        GFourier {
            phi: phi.clone(),
            polys,
            base_panels,
            rule: gauss_legendre(order),
            check_rule: gauss_legendre(order.saturating_sub(4).max(2)),
        }
    }

    fn axis_nodes(&self, a: usize, eta: f64, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
        bump_axis_nodes(self.phi.center[a], self.phi.radius, eta, self.base_panels, rule, self.phi.dim() == 1)
    }

    fn run(&self, eta: &[f64], rule: &(Vec<f64>, Vec<f64>)) -> Vec<Complex64> {
        let k = self.phi.dim();
        let axes: Vec<Vec<(f64, f64)>> = (0..k).map(|a| self.axis_nodes(a, eta[a], rule)).collect();
        let mut acc: Vec<CSum> = vec![CSum::new(); self.polys.len()];
        let total: usize = axes.iter().map(|v| v.len()).product();
        let mut idx = vec![0usize; k];
        let mut x = vec![0.0; k];
        for _ in 0..total {
            let mut w = 1.0;
            let mut phase = 0.0;
            for a in 0..k {
                let (xa, wa) = axes[a][idx[a]];
                x[a] = xa;
                w *= wa;
                phase += eta[a] * xa;
            }
            let v = self.phi.eval(&x);
            if v.re != 0.0 || v.im != 0.0 {
                let base = v * w * Complex64::new(0.0, phase).exp();
                for (j, p) in self.polys.iter().enumerate() {
                    acc[j].add(base * p.eval(&x));
                }
            }
            for a in (0..k).rev() {
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
        acc.iter().map(|s| s.value()).collect()
    }

    /// Values of `Φ_j(η)`.
    pub fn eval(&self, eta: &[f64]) -> Vec<Complex64> {
        self.run(eta, &self.rule)
    }

    /// Values with error estimates against the lower-order rule.
    pub fn eval_with_error(&self, eta: &[f64]) -> Vec<(Complex64, f64)> {
        let hi = self.run(eta, &self.rule);
        let lo = self.run(eta, &self.check_rule);
        hi.into_iter().zip(lo).map(|(a, b)| (a, (a - b).norm())).collect()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    Ok(())
}

fn atomic_max(a: &AtomicU64, v: f64) {
    if v.is_finite() && v > 0.0 {
        a.fetch_max(v.to_bits(), Ordering::Relaxed);
    }
}

/// `∫_{M≤R} ∫_𝔤 α(X)∧e^{isω̃(X)}·φ(X)`, with the `𝔤`-integral inner.
///
/// Writing `α = Σ P_j β_j`, the integrand at `m` is
/// `Σ_j top(β_j∧e^{isω})(m)·Φ_j(sμ(m))` with `Φ_j` from [`GFourier`].
pub fn pair_truncated(
    m: &Manifold,
    alpha: &EquivariantForm,
    s: f64,
    phi: &TestForm,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    check_s(s)?;
    check_dim(m.k(), phi.dim())?;
    check_dim(m.dim(), alpha.dim)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("R must be non-negative, got {r}")));
    }
    pair_over(m, alpha, s, phi, &truncation_region(m, r), spec)
}

pub(crate) fn pair_over(
    m: &Manifold,
    alpha: &EquivariantForm,
    s: f64,
    phi: &TestForm,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if phi.is_zero() || alpha.is_zero() {
        return Ok(Estimate::zero());
    }
    let polys: Vec<Polynomial> = alpha.terms().iter().map(|(p, _)| p.clone()).collect();
    let gf = GFourier::new(phi, polys, spec.inner_panels, spec.inner_order);
    let inner_err = AtomicU64::new(0);
    let f = |p: &[f64]| -> Complex64 {
        let e = m.omega(p).scale(Complex64::new(0.0, s)).exp_even();
        let cs: Vec<Complex64> = alpha.terms().iter().map(|(_, b)| b(p).wedge(&e).top()).collect();
        if cs.iter().all(|c| c.norm() == 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let eta: Vec<f64> = m.moment(p).iter().map(|v| s * v).collect();
        let vals = gf.eval_with_error(&eta);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for (c, (v, e)) in cs.iter().zip(&vals) {
            acc += c * v;
            err += c.norm() * e;
        }
        atomic_max(&inner_err, err);
        acc
    };
    let mut est = integrate_top(m, region, alpha.invariant, spec, &f)?;
    let max_inner = f64::from_bits(inner_err.load(Ordering::Relaxed));
    if max_inner > 0.0 {
        let vol = integrate_top(m, region, true, &QuadratureSpec::with_tol(1e-6), &|_| Complex64::new(1.0, 0.0))?;
        est.error += max_inner * vol.value.norm();
    }
    Ok(est)
}

/// Reverse iteration order: `∫_𝔤 φ(X)·[∫_{M≤R} α(X)∧e^{isω̃(X)}] dX`, with
/// the `M`-integral inner (adaptive) and the `𝔤`-integral outer (tensor).
pub fn pair_truncated_reverse(
    m: &Manifold,
    alpha: &EquivariantForm,
    s: f64,
    phi: &TestForm,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    check_s(s)?;
    check_dim(m.k(), phi.dim())?;
    let region = truncation_region(m, r);
    if phi.is_zero() || alpha.is_zero() {
        return Ok(Estimate::zero());
    }
    let (lo, hi) = phi.bounding_box();
    let inner_err = AtomicU64::new(0);
    let failure = std::sync::Mutex::new(None);
    let g = |x: &[f64]| -> Complex64 {
        let w = phi.eval(x);
        if w.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let f = |p: &[f64]| alpha.eval(x, p).wedge(&exp_i_omega_tilde_at(m, s, x, p)).top();
        match integrate_top(m, &region, alpha.invariant, spec, &f) {
            Ok(e) => {
                atomic_max(&inner_err, e.error * w.norm());
                e.value * w
            }
            Err(e) => {
                *failure.lock().unwrap() = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let k = phi.dim();
    let mut est = tensor(&g, &lo, &hi, &TensorOptions::uniform(k, spec.inner_panels, spec.inner_order));
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    est.error += f64::from_bits(inner_err.load(Ordering::Relaxed)) * box_vol;
    Ok(est)
}

/// Sequence of truncated values along an increasing `R` grid and its limit.
pub fn limit_in_r(
    evaluator: &dyn Fn(f64) -> Result<Estimate>,
    r_grid: &[f64],
    extrapolation: Extrapolation,
    tol: f64,
) -> Result<LimitResult> {
    if r_grid.len() < 3 {
        return Err(Error::InvalidParameter(format!("limit needs at least 3 grid points, got {}", r_grid.len())));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("R grid must be strictly increasing".into()));
    }
    let mut seq = Vec::with_capacity(r_grid.len());
    let mut partial_error = 0.0f64;
    for &r in r_grid {
        let e = evaluator(r)?;
        partial_error = partial_error.max(e.error);
        seq.push((r, e.value));
    }
    Ok(finish_limit(seq, partial_error, extrapolation, tol, |r| 1.0 / r))
}

fn finish_limit(
    seq: Vec<(f64, Complex64)>,
    partial_error: f64,
    extrapolation: Extrapolation,
    tol: f64,
    h_of: impl Fn(f64) -> f64,
) -> LimitResult {
    let n = seq.len();
    let vals: Vec<Complex64> = seq.iter().map(|s| s.1).collect();
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let last = vals[n - 1];
    let (value, last_extrapolant) = match extrapolation {
        Extrapolation::None => (last, vals[n - 2]),
        Extrapolation::Richardson => {
            let take = n.min(4);
            let h: Vec<f64> = seq[n - take..].iter().map(|s| h_of(s.0)).collect();
            let (v, e) = neville(&h, &vals[n - take..], 0.0);
            let alt = if take > 2 { neville(&h[1..], &vals[n - take + 1..], 0.0).0 } else { v - e };
            (v, alt)
        }
        Extrapolation::TailModel => {
            let aitken = |a: Complex64, b: Complex64, c: Complex64| {
                let den = c - b * 2.0 + a;
                if den.norm() <= 1e-300 || den.norm() < 1e-14 * c.norm() {
                    c
                } else {
                    c - (c - b) * (c - b) / den
                }
            };
            let v = aitken(vals[n - 3], vals[n - 2], vals[n - 1]);
            let alt = if n >= 4 { aitken(vals[n - 4], vals[n - 3], vals[n - 2]) } else { vals[n - 1] };
            (v, alt)
        }
    };
    let error_estimate = (value - last_extrapolant).norm() + partial_error;
    let scale = value.norm().max(1.0);
    let converged = error_estimate <= tol * scale;
    let verdict = if converged {
        LimitVerdict::Converged
    } else if diffs.len() >= 3 && diffs[diffs.len() - 1] > diffs[diffs.len() - 2] && diffs[diffs.len() - 2] > diffs[diffs.len() - 3]
    {
        LimitVerdict::Divergent
    } else {
        LimitVerdict::Slow
    };
    LimitResult { value, error_estimate, sequence: seq, last_extrapolant, converged, verdict, partial_error }
}

/// Default damping grid `0.2·2^{−j}`, `j = 0..6`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..7).map(|j| 0.2 * 0.5f64.powi(j)).collect()
}

/// `∫_M α(X)∧e^{iω̃(X)}·e^{−ε μ_{X₀}}` for one damping parameter.
pub fn damped_integral_at(
    m: &Manifold,
    alpha: &EquivariantForm,
    x: &AlgebraVector,
    x0: &AlgebraVector,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    check_dim(m.k(), x.dim())?;
    check_dim(m.k(), x0.dim())?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("damping parameter must be positive, got {eps}")));
    }
    let min0 = m.polarizer_minimum(&x0.coords)?;
    let region = if m.compact {
        Region::Whole
    } else {
        // e^{−ε(μ_X₀ − min)} < e^{−40} beyond this level
        Region::Polarized { x0: x0.coords.clone(), level: min0 + 40.0 / eps }
    };
    let xs = x.coords.clone();
    let f = |p: &[f64]| {
        let damp = (-eps * m.moment_x(p, &x0.coords)).exp();
        alpha.eval(&xs, p).wedge(&exp_i_omega_tilde_at(m, 1.0, &xs, p)).top() * damp
    };
    integrate_top(m, &region, alpha.invariant, spec, &f)
}

/// Polarized damping `ε → 0⁺` of `∫_M α(X)∧e^{iω̃(X)}`, extrapolated by
/// polynomial extrapolation in `ε`.
pub fn damped_improper_integral(
    m: &Manifold,
    alpha: &EquivariantForm,
    x: &AlgebraVector,
    x0: &AlgebraVector,
    eps_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<LimitResult> {
    m.polarizer_minimum(&x0.coords)?;
    let reg = is_strongly_regular(m, x)?;
    if !reg.regular {
        return Err(Error::Precondition(format!(
            "X = {:?} is not strongly regular on `{}`: {}",
            x.coords,
            m.name,
            reg.offending.unwrap_or_default()
        )));
    }
    if eps_grid.len() < 3 || eps_grid.windows(2).any(|w| !(w[1] < w[0])) || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("ε grid must have ≥ 3 positive, strictly decreasing entries".into()));
    }
    let mut seq = Vec::new();
    let mut perr = 0.0f64;
    for &e in eps_grid {
        let est = damped_integral_at(m, alpha, x, x0, e, spec)?;
        perr = perr.max(est.error);
        seq.push((e, est.value));
    }
    let h: Vec<f64> = seq.iter().map(|s| s.0).collect();
    let y: Vec<Complex64> = seq.iter().map(|s| s.1).collect();
    let (value, err) = neville(&h, &y, 0.0);
    let alt = neville(&h[1..], &y[1..], 0.0).0;
    // Extrapolation amplifies partial errors by the Lebesgue constant of the
    // extrapolation weights.
    let lebesgue = extrapolation_lebesgue(&h);
    let error_estimate = err + lebesgue * perr;
    let converged = error_estimate <= 1e-6 * value.norm().max(1.0);
    Ok(LimitResult {
        value,
        error_estimate,
        sequence: seq,
        last_extrapolant: alt,
        converged,
        verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Slow },
        partial_error: perr,
    })
}

/// `Σ_j |ℓ_j(0)|` for the Lagrange basis on nodes `h`.
fn extrapolation_lebesgue(h: &[f64]) -> f64 {
    (0..h.len())
        .map(|j| {
            let mut l = 1.0;
            for i in 0..h.len() {
                if i != j {
                    l *= (0.0 - h[i]) / (h[j] - h[i]);
                }
            }
            l.abs()
        })
        .sum()
}

/// Rectangular binning of `𝔤*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins: Vec<usize>,
}

impl HistogramGrid {
    pub fn uniform_1d(lo: f64, hi: f64, bins: usize) -> Self {
        HistogramGrid { lo: vec![lo], hi: vec![hi], bins: vec![bins] }
    }

    pub fn n_bins(&self) -> usize {
        self.bins.iter().product()
    }

    pub fn bin_volume(&self) -> f64 {
        (0..self.bins.len()).map(|a| (self.hi[a] - self.lo[a]) / self.bins[a] as f64).product()
    }

    /// Flat bin index of `ξ`, if inside the grid (upper edges inclusive).
    pub fn bin_of(&self, xi: &[f64]) -> Option<usize> {
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..self.bins.len() {
            let t = (xi[a] - self.lo[a]) / (self.hi[a] - self.lo[a]);
            if !(0.0..=1.0).contains(&t) {
                return None;
            }
            let b = ((t * self.bins[a] as f64) as usize).min(self.bins[a] - 1);
            idx += b * stride;
            stride *= self.bins[a];
        }
        Some(idx)
    }

    /// Lower corner of flat bin `b`.
    pub fn bin_lo(&self, b: usize) -> Vec<f64> {
        let mut r = b;
        (0..self.bins.len())
            .map(|a| {
                let i = r % self.bins[a];
                r /= self.bins[a];
                self.lo[a] + i as f64 * (self.hi[a] - self.lo[a]) / self.bins[a] as f64
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let k = self.bins.len();
        if k == 0 || self.lo.len() != k || self.hi.len() != k {
            return Err(Error::InvalidParameter("histogram grid dimensions inconsistent".into()));
        }
        if self.bins.iter().any(|&b| b == 0) || (0..k).any(|a| !(self.hi[a] > self.lo[a])) {
            return Err(Error::InvalidParameter("histogram grid must have positive bins and hi > lo".into()));
        }
        Ok(())
    }
}

/// Stratified Monte Carlo estimate of the pushforward of the Liouville
/// measure under μ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureHistogram {
    pub grid: HistogramGrid,
    pub masses: Vec<f64>,
    pub sampling_error: Vec<f64>,
    pub total_mass: f64,
    pub total_error: f64,
    /// Mass whose moment image falls outside the grid.
    pub outside_mass: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip)]
    samples: Vec<(Vec<f64>, f64)>,
    #[serde(skip)]
    stratum_volume: f64,
}

impl MeasureHistogram {
    pub fn density(&self, b: usize) -> f64 {
        self.masses[b] / self.grid.bin_volume()
    }

    /// `∫ψ dν` from the stored samples, with its stratified standard error.
    pub fn pair_function(&self, psi: &dyn Fn(&[f64]) -> Complex64) -> (Complex64, f64) {
        let mut acc = CSum::new();
        let mut var = 0.0;
        for pair in self.samples.chunks(2) {
            let g: Vec<Complex64> = pair.iter().map(|(mu, f)| psi(mu) * *f).collect();
            let v = self.stratum_volume;
            acc.add((g[0] + g[1]) * (0.5 * v));
            var += (g[0] - g[1]).norm_sqr() * v * v / 4.0;
        }
        (acc.value(), var.sqrt())
    }
}

/// Relative round-off floor applied to per-bin standard errors.
const MC_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Exact Duistermaat–Heckman mass of `[lo, hi]` for a circle action, from
/// the fixed-point data: a sum of truncated powers `(ξ − μ_p)₊^{n−1}`,
/// oriented along the direction in which μ is bounded below.
pub fn dh_bin_mass_exact(m: &Manifold, lo: f64, hi: f64) -> Result<f64> {
    if m.k() != 1 {
        return Err(Error::Capability(format!("exact DH masses need a circle action, `{}` has k = {}", m.name, m.k())));
    }
    if m.fixed_points.is_empty() {
        return Err(Error::UnsupportedManifold(format!("`{}` carries no fixed-point data", m.name)));
    }
    let forward = m.compact || m.polarizer_minimum(&[1.0]).is_ok();
    if !forward && m.polarizer_minimum(&[-1.0]).is_err() {
        return Err(Error::Precondition(format!("μ on `{}` is bounded in neither direction", m.name)));
    }
    let n = m.n as i32;
    let fact: f64 = (1..=m.n).map(|j| j as f64).product();
    let mut mass = 0.0;
    for fp in &m.fixed_points {
        let mu = fp.moment_value.coords[0];
        let lam: f64 = fp.weights.iter().map(|w| w.apply(&[1.0])).product();
        let c = f64::from(fp.orientation_sign) / lam;
        let prim = if forward {
            (hi - mu).max(0.0).powi(n) - (lo - mu).max(0.0).powi(n)
        } else {
            (-1f64).powi(n) * ((mu - lo).max(0.0).powi(n) - (mu - hi).max(0.0).powi(n))
        };
        mass += c * prim / fact;
    }
    Ok((2.0 * PI).powi(n) * mass)
}

/// Liouville measure on `M_{≤R}` pushed forward by μ, sampled with two
/// uniform points per stratum of the action coordinates.
pub fn dh_pushforward(
    m: &Manifold,
    r_cutoff: f64,
    grid: &HistogramGrid,
    n_samples: usize,
    seed: u64,
) -> Result<MeasureHistogram> {
    grid.validate()?;
    check_dim(m.k(), grid.bins.len())?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let region = truncation_region(m, r_cutoff);
    let map = m.region_map(&region)?;
    let nb = grid.n_bins();
    let mut hist = MeasureHistogram {
        grid: grid.clone(),
        masses: vec![0.0; nb],
        sampling_error: vec![0.0; nb],
        total_mass: 0.0,
        total_error: 0.0,
        outside_mass: 0.0,
        n_samples,
        seed,
        samples: Vec::new(),
        stratum_volume: 0.0,
    };
    if map.is_empty() {
        return Ok(hist);
    }
    let d = m.dim();
    let action: Vec<usize> = (0..d).filter(|i| !map.angle_dims().contains(i)).collect();
    let na = action.len();
    let per_dim = (((n_samples / 2) as f64).powf(1.0 / na as f64) + 1e-9).floor().max(1.0) as usize;
    let n_strata = per_dim.pow(na as u32);
    let vol = 1.0 / n_strata as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var = vec![0.0; nb];
    let mut total = CSum::new();
    let mut total_var = 0.0;
    let mut masses: Vec<CSum> = vec![CSum::new(); nb];
    let mut outside = CSum::new();
    let mut y = vec![0.5; d];
    let mut p = vec![0.0; d];
    let mut samples = Vec::with_capacity(2 * n_strata);
    for s in 0..n_strata {
        let mut cell = Vec::with_capacity(na);
        let mut r = s;
        for _ in 0..na {
            cell.push(r % per_dim);
            r /= per_dim;
        }
        let mut pair = [(None, 0.0f64); 2];
        for slot in &mut pair {
            for (j, &i) in action.iter().enumerate() {
                y[i] = (cell[j] as f64 + rng.gen::<f64>()) / per_dim as f64;
            }
            let jac = map.map(&y, &mut p);
            let f = if jac > 0.0 { jac * m.liouville_density(&p) } else { 0.0 };
            let mu = m.moment(&p);
            *slot = (grid.bin_of(&mu), f);
            samples.push((mu, f));
        }
        for &(b, f) in &pair {
            let w = Complex64::new(0.5 * vol * f, 0.0);
            total.add(w);
            match b {
                Some(b) => masses[b].add(w),
                None => outside.add(w),
            }
        }
        total_var += vol * vol * (pair[0].1 - pair[1].1).powi(2) / 4.0;
        // each distinct bin once per stratum
        for (i, &(b, _)) in pair.iter().enumerate() {
            if let Some(b) = b {
                if i == 1 && pair[0].0 == Some(b) {
                    continue;
                }
                let g0 = if pair[0].0 == Some(b) { pair[0].1 } else { 0.0 };
                let g1 = if pair[1].0 == Some(b) { pair[1].1 } else { 0.0 };
                var[b] += vol * vol * (g0 - g1).powi(2) / 4.0;
            }
        }
    }
    hist.masses = masses.iter().map(|s| s.value().re).collect();
    hist.sampling_error = var
        .iter()
        .zip(&hist.masses)
        .map(|(v, mass)| v.sqrt().max(MC_ROUNDOFF * mass.abs()))
        .collect();
    hist.total_mass = total.value().re;
    hist.total_error = total_var.sqrt().max(MC_ROUNDOFF * hist.total_mass.abs());
    hist.outside_mass = outside.value().re;
    hist.samples = samples;
    hist.stratum_volume = vol;
    Ok(hist)
}

/// How the `R`-limit is taken for each pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RPolicy {
    /// Fixed grid of truncation radii.
    Grid { r: Vec<f64> },
    /// `R_j = c_j/(s·r_φ)`, scaled with the oscillation frequency.
    Scaled { c: Vec<f64> },
}

impl Default for RPolicy {
    fn default() -> Self {
        RPolicy::Scaled { c: vec![50.0, 100.0, 200.0, 400.0] }
    }
}

impl RPolicy {
    pub fn grid(&self, s: f64, phi: &TestForm) -> Vec<f64> {
        match self {
            RPolicy::Grid { r } => r.clone(),
            RPolicy::Scaled { c } => c.iter().map(|c| c / (s * phi.radius)).collect(),
        }
    }
}

/// Whether the closed support ball of `φ` avoids every hyperplane
/// `λ(X) = 0` of the fixed-point weights.
pub fn support_in_regular_set(m: &Manifold, phi: &TestForm) -> Result<bool> {
    if m.fixed_points.is_empty() {
        return Err(Error::UnsupportedManifold(format!("`{}` carries no fixed-point data", m.name)));
    }
    for fp in &m.fixed_points {
        for w in &fp.weights {
            if w.apply(&phi.center).abs() <= phi.radius * w.norm() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Full distributional pairing `lim_R ∫_{M≤R}∫_𝔤 α∧e^{isω̃}∧φ`.
pub fn pair_distributional(
    m: &Manifold,
    alpha: &EquivariantForm,
    s: f64,
    phi: &TestForm,
    policy: &RPolicy,
    spec: &QuadratureSpec,
) -> Result<LimitResult> {
    if m.compact {
        let e = pair_over(m, alpha, s, phi, &Region::Whole, spec)?;
        return Ok(LimitResult {
            value: e.value,
            error_estimate: e.error,
            sequence: vec![(m.max_moment_norm().unwrap_or(0.0), e.value)],
            last_extrapolant: e.value,
            converged: true,
            verdict: LimitVerdict::Converged,
            partial_error: e.error,
        });
    }
    let grid = policy.grid(s, phi);
    limit_in_r(&|r| pair_truncated(m, alpha, s, phi, r, spec), &grid, Extrapolation::None, 1e-7)
}

/// `lim_{s→0⁺}` of the distributional pairings along a decreasing `s` grid.
pub fn weakstar_limit_s(
    m: &Manifold,
    alpha: &EquivariantForm,
    phi: &TestForm,
    s_grid: &[f64],
    policy: &RPolicy,
    spec: &QuadratureSpec,
) -> Result<LimitResult> {
    if s_grid.len() < 3 || s_grid.windows(2).any(|w| !(w[1] < w[0])) || s_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("s grid must have ≥ 3 positive, strictly decreasing entries".into()));
    }
    if !support_in_regular_set(m, phi)? {
        return Err(Error::Precondition(format!(
            "support of φ (center {:?}, radius {}) meets the non-regular set of `{}`",
            phi.center, phi.radius, m.name
        )));
    }
    let mut seq = Vec::new();
    let mut perr = 0.0f64;
    for &s in s_grid {
        let l = pair_distributional(m, alpha, s, phi, policy, spec)?;
        perr = perr.max(l.error_estimate);
        seq.push((s, l.value));
    }
    let h: Vec<f64> = seq.iter().map(|x| x.0).collect();
    let y: Vec<Complex64> = seq.iter().map(|x| x.1).collect();
    let (value, err) = neville(&h, &y, 0.0);
    let alt = neville(&h[1..], &y[1..], 0.0).0;
    let error_estimate = err + extrapolation_lebesgue(&h) * perr;
    let converged = error_estimate <= 1e-6 * value.norm().max(1.0);
    Ok(LimitResult {
        value,
        error_estimate,
        sequence: seq,
        last_extrapolant: alt,
        converged,
        verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Slow },
        partial_error: perr,
    })
}

/// `Arc` convenience used by callers holding shared manifolds.
pub fn shared(m: Manifold) -> Arc<Manifold> {
    Arc::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqforms::{form_liouville, form_one, omega_tilde};
    use crate::geometry::{catalog_complex_space, catalog_projective_space, catalog_sphere};
    use crate::liealg::Weight;
    use proptest::prelude::*;

    fn ci(x: f64) -> Complex64 {
        Complex64::new(0.0, x)
    }

    /// 1-D Gauss–Legendre oracle `2πi·a∫₋₁¹ e^{−iatz} dz`.
    fn sphere_oracle(a: f64, t: f64) -> Complex64 {
        let (x, w) = gauss_legendre(40);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..20 {
            let c = -1.0 + (p as f64 + 0.5) * 0.1;
            for (xi, wi) in x.iter().zip(&w) {
                let z = c + 0.05 * xi;
                acc += Complex64::new(0.0, -a * t * z).exp() * (0.05 * wi);
            }
        }
        ci(2.0 * PI * a) * acc
    }

    #[test]
    fn sphere_volume_and_exponential() {
        let m = catalog_sphere(1.0).unwrap();
        let spec = QuadratureSpec::with_tol(1e-11);
        let v = liouville_volume(&m, &Region::Whole, &spec).unwrap();
        assert!((v.value.re - 4.0 * PI).abs() < 1e-10);
        let m2 = catalog_sphere(2.0).unwrap();
        assert!((liouville_volume(&m2, &Region::Whole, &spec).unwrap().value.re - 8.0 * PI).abs() < 1e-10);
        for t in [0.0, 1.0, 2.0] {
            let f = |p: &[f64]| exp_i_omega_tilde_at(&m, 1.0, &[t], p);
            let e = integrate_graded(&m, &f, &Region::Whole, &spec).unwrap();
            let oracle = sphere_oracle(1.0, t);
            assert!((e.value - oracle).norm() < 1e-9 * oracle.norm(), "t={t}: {} vs {oracle}", e.value);
        }
    }

    #[test]
    fn projective_and_complex_volumes() {
        let spec = QuadratureSpec::with_tol(1e-10);
        let cp1 = catalog_projective_space(1, 1.0).unwrap();
        assert!((liouville_volume(&cp1, &Region::Whole, &spec).unwrap().value.re - PI).abs() < 1e-9);
        let cp2 = catalog_projective_space(2, 1.0).unwrap();
        assert!((liouville_volume(&cp2, &Region::Whole, &spec).unwrap().value.re - PI * PI / 2.0).abs() < 1e-9);
        let c1 = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        let v = liouville_volume(&c1, &Region::Sublevel(3.0), &spec).unwrap();
        assert!((v.value.re - 2.0 * PI * 3.0).abs() < 1e-9);
        let c2 = catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1])]).unwrap();
        let v = liouville_volume(&c2, &Region::Sublevel(2.0), &spec).unwrap();
        // quarter disk of radius 2 in the action plane, times (2π)²
        let oracle = brute_force_quarter_disk(2.0) * 4.0 * PI * PI;
        assert!((v.value.re - oracle).abs() < 1e-4 * oracle, "{} vs {oracle}", v.value.re);
    }

    /// Midpoint-rule area of `{u ≥ 0, |u| ≤ R}` on a fine grid.
    fn brute_force_quarter_disk(r: f64) -> f64 {
        let n = 4000;
        let h = r / n as f64;
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if a * a + b * b <= r * r {
                    count += 1;
                }
            }
        }
        count as f64 * h * h
    }

    #[test]
    fn zero_radius_truncation_is_empty() {
        let m = catalog_sphere(1.0).unwrap();
        let one = form_one(&m);
        let phi = TestForm::bump(vec![1.0], 0.25).unwrap();
        let e = pair_truncated(&m, &one, 1.0, &phi, 0.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(e.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sphere_pairing_matches_sinc_oracle_and_reverse_order() {
        let m = catalog_sphere(1.0).unwrap();
        let one = form_one(&m);
        let phi = TestForm::bump(vec![1.0], 0.25).unwrap();
        let spec = QuadratureSpec::with_tol(1e-10);
        let e = pair_truncated(&m, &one, 1.0, &phi, 5.0, &spec).unwrap();
        // oracle: ∫ 4πi sin(t)/t φ(t) dt by 1-D Gauss–Legendre
        let (x, w) = gauss_legendre(30);
        let mut oracle = Complex64::new(0.0, 0.0);
        for p in 0..40 {
            let c = 0.75 + (p as f64 + 0.5) * 0.0125;
            for (xi, wi) in x.iter().zip(&w) {
                let t = c + 0.00625 * xi;
                oracle += ci(4.0 * PI * t.sin() / t) * phi.eval(&[t]) * (0.00625 * wi);
            }
        }
        assert!((e.value - oracle).norm() < 1e-9 * oracle.norm(), "{} vs {oracle}", e.value);
        let r = pair_truncated_reverse(&m, &one, 1.0, &phi, 5.0, &spec).unwrap();
        assert!((e.value - r.value).norm() <= 3.0 * (e.error + r.error).max(1e-12), "{} vs {}", e.value, r.value);
    }

    #[test]
    fn phi_in_vanishing_locus_of_polynomial_gives_zero() {
        let m = Arc::new(catalog_sphere(1.0).unwrap());
        let alpha = form_one(&m).mul_poly(&Polynomial::zero(1));
        let phi = TestForm::bump(vec![1.0], 0.25).unwrap();
        let e = pair_truncated(&m, &alpha, 1.0, &phi, 5.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(e.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn limit_examples() {
        let c = Complex64::new(1.5, -0.5);
        let l = limit_in_r(&|_| Ok(Estimate { value: c, ..Estimate::zero() }), &[1.0, 2.0, 4.0], Extrapolation::None, 1e-12)
            .unwrap();
        assert_eq!(l.value, c);
        assert_eq!(l.error_estimate, 0.0);
        assert!(l.converged);
        let f = |r: f64| Ok(Estimate { value: c + Complex64::new(3.0 / r, 0.0), ..Estimate::zero() });
        let l = limit_in_r(&f, &[10.0, 20.0, 40.0, 80.0], Extrapolation::Richardson, 1e-10).unwrap();
        assert!((l.value - c).norm() < 1e-12);
        let g = |r: f64| Ok(Estimate { value: Complex64::new(r * r, 0.0), ..Estimate::zero() });
        let l = limit_in_r(&g, &[1.0, 2.0, 3.0, 4.0], Extrapolation::None, 1e-6).unwrap();
        assert_eq!(l.verdict, LimitVerdict::Divergent);
        assert!(limit_in_r(&g, &[1.0, 2.0], Extrapolation::None, 1e-6).is_err());
    }

    #[test]
    fn sphere_pairing_saturates_at_unit_radius() {
        let m = catalog_sphere(1.0).unwrap();
        let one = form_one(&m);
        let phi = TestForm::bump(vec![1.0], 0.25).unwrap();
        let spec = QuadratureSpec::with_tol(1e-10);
        let at = |r: f64| pair_truncated(&m, &one, 1.0, &phi, r, &spec).map(|e| e.value).unwrap();
        let v1 = at(1.0);
        assert_eq!(v1, at(2.0));
        assert_eq!(v1, at(10.0));
        assert!((at(0.9) - v1).norm() > 1e-3);
    }

    #[test]
    fn damped_examples_on_complex_line() {
        let m = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        let one = form_one(&m);
        let spec = QuadratureSpec::with_tol(1e-11);
        let x0 = AlgebraVector::new(vec![1.0]);
        for t in [1.0, 2.0] {
            let l = damped_improper_integral(&m, &one, &AlgebraVector::new(vec![t]), &x0, &default_eps_grid(), &spec)
                .unwrap();
            let exact = -2.0 * PI / t;
            assert!((l.value - Complex64::new(exact, 0.0)).norm() < 1e-6 * exact.abs(), "{}", l.value);
        }
        let e = damped_integral_at(&m, &one, &AlgebraVector::new(vec![0.0]), &x0, 1.0, &spec).unwrap();
        assert!((e.value - ci(2.0 * PI)).norm() < 1e-9);
        // X = 0 is not regular
        assert!(damped_improper_integral(&m, &one, &AlgebraVector::new(vec![0.0]), &x0, &default_eps_grid(), &spec).is_err());
        // X₀ = −1 does not polarize
        assert!(damped_integral_at(&m, &one, &x0, &AlgebraVector::new(vec![-1.0]), 0.1, &spec).is_err());
    }

    #[test]
    fn damping_consistency_on_compact_manifold() {
        let m = catalog_sphere(1.0).unwrap();
        let one = form_one(&m);
        let spec = QuadratureSpec::with_tol(1e-11);
        let x = AlgebraVector::new(vec![1.0]);
        let l = damped_improper_integral(&m, &one, &x, &AlgebraVector::new(vec![-0.7]), &default_eps_grid(), &spec).unwrap();
        let f = |p: &[f64]| exp_i_omega_tilde_at(&m, 1.0, &[1.0], p);
        let direct = integrate_graded(&m, &f, &Region::Whole, &spec).unwrap();
        assert!((l.value - direct.value).norm() < 1e-7 * direct.value.norm());
    }

    #[test]
    fn exact_dh_masses() {
        let s2 = catalog_sphere(1.0).unwrap();
        assert!((dh_bin_mass_exact(&s2, -0.3, 0.5).unwrap() - 2.0 * PI * 0.8).abs() < 1e-12);
        assert!((dh_bin_mass_exact(&s2, -3.0, 3.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let c1 = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        assert!((dh_bin_mass_exact(&c1, -1.0, 2.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let cm = catalog_complex_space(1, vec![Weight::new(vec![-1])]).unwrap();
        assert!((dh_bin_mass_exact(&cm, -2.0, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        // total mass equals the Liouville volume
        let cp1 = catalog_projective_space(1, 1.7).unwrap();
        let vol = liouville_volume(&cp1, &Region::Whole, &QuadratureSpec::default()).unwrap().value.re;
        assert!((dh_bin_mass_exact(&cp1, -100.0, 100.0).unwrap() - vol).abs() < 1e-9 * vol);
        assert!(dh_bin_mass_exact(&catalog_projective_space(2, 1.0).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn dh_histogram_on_sphere_and_line() {
        let m = catalog_sphere(1.0).unwrap();
        let h = dh_pushforward(&m, 10.0, &HistogramGrid::uniform_1d(-1.0, 1.0, 10), 20_000, 7).unwrap();
        for b in 0..10 {
            assert!((h.density(b) - 2.0 * PI).abs() <= 3.0 * h.sampling_error[b] / 0.2 + 1e-9);
        }
        assert!((h.total_mass - 4.0 * PI).abs() <= 3.0 * h.total_error + 1e-9);
        let c = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        let h = dh_pushforward(&c, 2.0, &HistogramGrid::uniform_1d(0.0, 2.0, 4), 20_000, 3).unwrap();
        for b in 0..4 {
            assert!((h.density(b) - 2.0 * PI).abs() < 1e-6);
        }
        let cp1 = catalog_projective_space(1, 1.0).unwrap();
        let h = dh_pushforward(&cp1, 10.0, &HistogramGrid::uniform_1d(0.0, 0.5, 5), 20_000, 3).unwrap();
        for b in 0..5 {
            assert!((h.density(b) - 2.0 * PI).abs() < 1e-6);
        }
    }

    #[test]
    fn dh_total_mass_matches_volume_on_cp2() {
        let m = catalog_projective_space(2, 1.0).unwrap();
        let grid = HistogramGrid { lo: vec![0.0, 0.0], hi: vec![0.5, 0.5], bins: vec![4, 4] };
        let h = dh_pushforward(&m, 10.0, &grid, 40_000, 11).unwrap();
        let v = liouville_volume(&m, &Region::Whole, &QuadratureSpec::with_tol(1e-10)).unwrap();
        assert!((h.total_mass - v.value.re).abs() <= 3.0 * h.total_error + 1e-6, "{} vs {}", h.total_mass, v.value.re);
    }

    #[test]
    fn orientation_is_positive_on_catalog() {
        let spec = QuadratureSpec::with_tol(1e-8);
        let ms = vec![
            catalog_sphere(1.0).unwrap(),
            catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap(),
            catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1])]).unwrap(),
            catalog_projective_space(1, 1.0).unwrap(),
            catalog_projective_space(2, 1.0).unwrap(),
        ];
        for m in ms {
            let m = Arc::new(m);
            let lf = form_liouville(&m);
            let f = |p: &[f64]| lf.eval(&vec![0.0; m.k()], p);
            let v = integrate_graded(&m, &f, &Region::Sublevel(1.0), &spec).unwrap();
            assert!(v.value.re > 0.0, "{}", m.name);
        }
    }

    #[test]
    fn weakstar_zero_test_form_and_regular_support() {
        let m = Arc::new(catalog_sphere(1.0).unwrap());
        let one = form_one(&m);
        let zero = TestForm::bump(vec![1.0], 0.25).unwrap().zero_like();
        let l = weakstar_limit_s(&m, &one, &zero, &[0.4, 0.2, 0.1], &RPolicy::default(), &QuadratureSpec::default()).unwrap();
        assert_eq!(l.value, Complex64::new(0.0, 0.0));
        let bad = TestForm::bump(vec![0.1], 0.25).unwrap();
        assert!(matches!(
            weakstar_limit_s(&m, &one, &bad, &[0.4, 0.2, 0.1], &RPolicy::default(), &QuadratureSpec::default()),
            Err(Error::Precondition(_))
        ));
        let wt = omega_tilde(&m, 1.0).unwrap();
        assert!(wt.invariant);
    }

    #[test]
    fn inner_fourier_decays_rapidly() {
        // |Φ(η)| for a bump decays faster than any power: local log-log
        // slopes steepen beyond −p for p = 1..4 on the sampled range
        let phi = TestForm::bump(vec![1.0], 0.5).unwrap();
        let gf = GFourier::new(&phi, vec![Polynomial::one(1)], 8, 12);
        let etas = [20.0, 40.0, 80.0, 160.0, 320.0];
        let vals: Vec<f64> = etas.iter().map(|&e| gf.eval(&[e])[0].norm()).collect();
        let n = etas.len();
        let slope = (vals[n - 1].ln() - vals[n - 2].ln()) / (etas[n - 1].ln() - etas[n - 2].ln());
        for p in 1..=4 {
            assert!(slope < -(p as f64), "slope {slope}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn truncated_volume_is_monotone(r1 in 0.0f64..4.0, dr in 0.0f64..4.0) {
            let m = catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![1, 1])]).unwrap();
            let spec = QuadratureSpec::with_tol(1e-9);
            let a = liouville_volume(&m, &Region::Sublevel(r1), &spec).unwrap().value.re;
            let b = liouville_volume(&m, &Region::Sublevel(r1 + dr), &spec).unwrap().value.re;
            prop_assert!(b >= a - 1e-9 * b.abs().max(1.0));
        }
    }
}
