//! Empirical growth exponents of truncated volumes and level-set integrals,
//! and the no-zeroes-at-infinity bound on sampled subsets of `𝔤′`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eqforms::EquivariantForm;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Manifold, Region};
use crate::integrate::{liouville_volume, truncation_region, QuadratureSpec};
use crate::liealg::{is_strongly_regular, AlgebraVector};
use crate::quad::{adaptive, AdaptiveOptions, Estimate};
use crate::report::VerificationReport;

/// Largest admissible increase of the local log-log slope between
/// consecutive tail points.
pub const CURVATURE_TOL: f64 = 0.25;

/// Floor on `c_D` for a passing no-zeroes verdict.
pub const C_D_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub exponent: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Largest increase of the local slope over the fitting window.
    pub curvature: f64,
    /// Polynomially bounded.
    pub verdict: bool,
    /// Some quadrature did not reach its tolerance.
    pub partial: bool,
    pub notes: Vec<String>,
}

/// Log-log least squares over the tail half of `(r, f)`.
pub fn fit_growth(r_grid: &[f64], values: &[f64], errors: &[f64]) -> Result<GrowthReport> {
    if r_grid.len() != values.len() || r_grid.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "growth fit needs matching grids of length ≥ 2, got {} and {}",
            r_grid.len(),
            values.len()
        )));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) || r_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("R grid must be positive and strictly increasing".into()));
    }
    let n = r_grid.len();
    let start = (n / 2).min(n - 2);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut notes = Vec::new();
    let tail: Vec<(f64, f64)> = (start..n)
        .filter(|&i| values[i] > 1e-14 * scale.max(f64::MIN_POSITIVE))
        .map(|i| (r_grid[i].ln(), values[i].ln()))
        .collect();
    let mut rep = GrowthReport {
        r_grid: r_grid.to_vec(),
        values: values.to_vec(),
        errors: errors.to_vec(),
        exponent: 0.0,
        intercept: f64::NEG_INFINITY,
        residual_rms: 0.0,
        curvature: 0.0,
        verdict: true,
        partial: false,
        notes: Vec::new(),
    };
    if values.iter().any(|v| !v.is_finite()) {
        rep.exponent = f64::NAN;
        rep.verdict = false;
        rep.notes.push("non-finite values".into());
        return Ok(rep);
    }
    if tail.len() < 2 {
        notes.push("vanishing tail".into());
        rep.notes = notes;
        return Ok(rep);
    }
    if tail.len() < n - start {
        notes.push(format!("{} vanishing tail values skipped", n - start - tail.len()));
    }
    let m = tail.len() as f64;
    let mx = tail.iter().map(|t| t.0).sum::<f64>() / m;
    let my = tail.iter().map(|t| t.1).sum::<f64>() / m;
    let sxx: f64 = tail.iter().map(|t| (t.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (tail.iter().map(|t| (t.1 - intercept - slope * t.0).powi(2)).sum::<f64>() / m).sqrt();
    let slopes: Vec<f64> = tail.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let curvature = slopes.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    rep.exponent = slope;
    rep.intercept = intercept;
    rep.residual_rms = rms;
    rep.curvature = curvature;
    rep.verdict = slope.is_finite() && curvature <= CURVATURE_TOL;
    if curvature > CURVATURE_TOL {
        notes.push(format!("super-polynomial curvature {curvature:.3}"));
    }
    rep.notes = notes;
    Ok(rep)
}

fn check_grid(m: &Manifold, r_grid: &[f64]) -> Result<()> {
    if m.compact {
        return Ok(());
    }
    if r_grid.len() < 6 || r_grid[0] <= 0.0 || r_grid[r_grid.len() - 1] < 100.0 * r_grid[0] {
        return Err(Error::Precondition(
            "growth grids on non-compact manifolds need ≥ 6 points spanning ≥ 2 decades".into(),
        ));
    }
    Ok(())
}

fn finish(r_grid: &[f64], est: Vec<Estimate>) -> Result<GrowthReport> {
    let values: Vec<f64> = est.iter().map(|e| e.value.re).collect();
    let errors: Vec<f64> = est.iter().map(|e| e.error).collect();
    let mut rep = fit_growth(r_grid, &values, &errors)?;
    rep.partial = est.iter().any(|e| !e.converged);
    if rep.partial {
        rep.notes.push("quadrature budget exhausted at some R".into());
    }
    Ok(rep)
}

/// `f(R) = Vol(M_{≤R})`.
pub fn growth_volume(m: &Manifold, r_grid: &[f64], spec: &QuadratureSpec) -> Result<GrowthReport> {
    check_grid(m, r_grid)?;
    let est = r_grid
        .iter()
        .map(|&r| liouville_volume(m, &truncation_region(m, r), spec))
        .collect::<Result<Vec<_>>>()?;
    finish(r_grid, est)
}

/// What is integrated over the level sets `{⟨μ, X₀⟩ = R}`.
#[derive(Debug, Clone)]
pub enum LevelIntegrand {
    /// Riemannian hypersurface volume for the catalog metric.
    InducedVolume,
    /// `|α_{[2n−1]}(X)|` restricted to the level set.
    Form { alpha: EquivariantForm, x: Vec<f64> },
}

/// `f(R) = ∫_{⟨μ,X₀⟩ = R} |α|`.
pub fn growth_levelset(
    m: &Manifold,
    integrand: &LevelIntegrand,
    x0: &[f64],
    r_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<GrowthReport> {
    check_dim(m.k(), x0.len())?;
    check_grid(m, r_grid)?;
    if let LevelIntegrand::Form { alpha, x } = integrand {
        check_dim(m.k(), x.len())?;
        if alpha.is_zero() {
            let z = vec![Estimate::zero(); r_grid.len()];
            return finish(r_grid, z);
        }
    }
    m.polarizer_minimum(x0)?;
    let est = r_grid
        .iter()
        .map(|&r| level_integral(m, integrand, x0, r, spec))
        .collect::<Result<Vec<_>>>()?;
    finish(r_grid, est)
}

fn level_integral(m: &Manifold, integrand: &LevelIntegrand, x0: &[f64], r: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let region = Region::Polarized { x0: x0.to_vec(), level: r };
    let map = m.region_map(&region)?;
    if map.is_empty() {
        return Ok(Estimate::zero());
    }
    let d = m.dim();
    let tol = 1e-9 * r.abs().max(1.0);
    let on_level = |y: &[f64]| -> Option<Vec<f64>> {
        let mut p = vec![0.0; d];
        if map.map(y, &mut p) == 0.0 {
            return None;
        }
        ((m.moment_x(&p, x0) - r).abs() <= tol).then_some(p)
    };
    // face of the unit box carried onto the level set
    let mut face = None;
    'search: for i in (0..d).filter(|i| !map.angle_dims().contains(i)) {
        for side in [1.0, 0.0] {
            for t in 0..7 {
                let mut y: Vec<f64> = (0..d).map(|j| ((j as f64 + 1.0) * 0.6180339887 * (t as f64 + 1.0)).fract()).collect();
                y[i] = side;
                if on_level(&y).is_some() {
                    face = Some((i, side));
                    break 'search;
                }
            }
        }
    }
    let Some((fi, side)) = face else {
        if m.compact {
            return Ok(Estimate::zero());
        }
        return Err(Error::UnsupportedManifold(format!(
            "level set ⟨μ, X₀⟩ = {r} of `{}` is not parametrized by the chart",
            m.name
        )));
    };
    let free: Vec<usize> = (0..d).filter(|&i| i != fi).collect();
    let f = |yf: &[f64]| -> Complex64 {
        let mut y = vec![side; d];
        for (j, &i) in free.iter().enumerate() {
            y[i] = yf[j];
        }
        let Some(p) = on_level(&y) else {
            return Complex64::new(0.0, 0.0);
        };
        let h = 1e-6;
        let tangents: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| {
                let (a, b) = ((y[i] - h).max(0.0), (y[i] + h).min(1.0));
                let mut ya = y.clone();
                let mut yb = y.clone();
                ya[i] = a;
                yb[i] = b;
                let mut pa = vec![0.0; d];
                let mut pb = vec![0.0; d];
                map.map(&ya, &mut pa);
                map.map(&yb, &mut pb);
                pa.iter().zip(&pb).map(|(u, v)| (v - u) / (b - a)).collect()
            })
            .collect();
        let v = match integrand {
            LevelIntegrand::InducedVolume => {
                let k = tangents.len();
                let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| m.metric_pair(&p, &tangents[i], &tangents[j]));
                gram.determinant().max(0.0).sqrt()
            }
            LevelIntegrand::Form { alpha, x } => {
                let mut g = alpha.eval(x, &p).degree_part(d - 1);
                for t in &tangents {
                    g = g.contract(t);
                }
                g.scalar_part().norm()
            }
        };
        Complex64::new(v, 0.0)
    };
    Ok(adaptive(
        &f,
        &vec![0.0; free.len()],
        &vec![1.0; free.len()],
        &AdaptiveOptions { rel_tol: spec.target_rel_tol.max(1e-8), abs_tol: 1e-12, max_evals: spec.max_evals },
    ))
}

/// Largest exhaustion value reached by the no-zeroes samples.
pub const NO_ZEROES_R_MAX: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoZeroesWitness {
    pub x: Vec<f64>,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoZeroesReport {
    pub d_samples: Vec<Vec<f64>>,
    /// min over fixed-point weights of `|λ(X)|`, per sample of `D`.
    pub min_weight_pairing: Vec<f64>,
    pub u_radius: f64,
    pub n_region_samples: usize,
    /// `min (VF_X, VF_X)_M`.
    pub min_norm: f64,
    /// `min (VF_X, VF_X) / max_{a,b} |(VF_{Eᵃ}, VF_{Eᵇ})|`.
    pub min_ratio: f64,
    pub c_d: f64,
    pub norm_witness: Option<NoZeroesWitness>,
    pub ratio_witness: Option<NoZeroesWitness>,
    pub vacuous: bool,
    pub verdict: bool,
    pub report: VerificationReport,
}

/// Samples of `D` on a uniform grid of the box `[lo, hi]`.
pub fn d_box(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<AlgebraVector> {
    let k = lo.len();
    let per_axis = per_axis.max(1);
    let total = per_axis.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; k];
            for a in 0..k {
                let i = idx % per_axis;
                idx /= per_axis;
                let t = if per_axis == 1 { 0.5 } else { i as f64 / (per_axis - 1) as f64 };
                x[a] = lo[a] + t * (hi[a] - lo[a]);
            }
            AlgebraVector::new(x)
        })
        .collect()
}

/// Points of `M` with exhaustion spread log-uniformly over
/// `[1e-3, NO_ZEROES_R_MAX]`; on complex spaces each point is accompanied
/// by its projections onto the faces `u_j = 0`.
fn no_zeroes_samples(m: &Manifold, n_samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = m.dim();
    let complex_space = !m.compact && m.chart.periodic.iter().enumerate().all(|(i, &per)| per == (i % 2 == 1));
    if !complex_space {
        let region = if m.compact { Region::Whole } else { Region::Sublevel(NO_ZEROES_R_MAX) };
        return m.sample_points(n_samples, &region, 1e-3, seed);
    }
    let n = m.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples * (n + 1));
    for _ in 0..n_samples {
        let e = 10f64.powf(rng.gen_range(-3.0..NO_ZEROES_R_MAX.log10()));
        let mut w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let mut p = vec![0.0; d];
        for j in 0..n {
            p[2 * j] = e * w[j];
            p[2 * j + 1] = rng.gen_range(0.0..std::f64::consts::TAU);
        }
        if n > 1 {
            for j in 0..n {
                let mut q = p.clone();
                q[2 * j] = 0.0;
                out.push(q);
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Estimates `c_D` over samples outside `{exhaustion < U_radius}`.
pub fn no_zeroes_check(
    m: &Manifold,
    d_spec: &[AlgebraVector],
    u_radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<NoZeroesReport> {
    if d_spec.is_empty() {
        return Err(Error::InvalidParameter("D must contain at least one sample".into()));
    }
    for x in d_spec {
        check_dim(m.k(), x.dim())?;
    }
    let mut report = VerificationReport::new(format!("no zeroes at infinity on {}", m.name));
    let mut min_weight_pairing = Vec::with_capacity(d_spec.len());
    for x in d_spec {
        let v = is_strongly_regular(m, x)?;
        min_weight_pairing.push(v.min_pairing);
        if !v.regular {
            // indicator: 1 when X lies outside 𝔤′
            report.check(format!("X = {:?} outside 𝔤′", x.coords), 1.0, 0.0, v.offending.clone());
        }
    }
    let points: Vec<Vec<f64>> =
        no_zeroes_samples(m, n_samples, seed)?.into_iter().filter(|p| m.exhaustion(p) >= u_radius).collect();
    let k = m.k();
    let mut min_norm = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut norm_witness = None;
    let mut ratio_witness = None;
    for p in &points {
        let basis: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                let mut e = vec![0.0; k];
                e[a] = 1.0;
                m.vector_field(&e, p)
            })
            .collect();
        let mut gmax = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                gmax = gmax.max(m.metric_pair(p, &basis[a], &basis[b]).abs());
            }
        }
        for x in d_spec {
            let vf = m.vector_field(&x.coords, p);
            let nrm = m.metric_pair(p, &vf, &vf);
            if nrm < min_norm {
                min_norm = nrm;
                norm_witness = Some(NoZeroesWitness { x: x.coords.clone(), point: p.clone(), value: nrm });
            }
            if gmax > 0.0 && nrm / gmax < min_ratio {
                min_ratio = nrm / gmax;
                ratio_witness = Some(NoZeroesWitness { x: x.coords.clone(), point: p.clone(), value: nrm / gmax });
            }
        }
    }
    let vacuous = points.is_empty();
    let c_d = min_norm.min(min_ratio);
    if vacuous {
        report.note("no samples outside U: vacuous pass");
    } else {
        let w = |o: &Option<NoZeroesWitness>| o.as_ref().map(|w| format!("X={:?}, m={:?}", w.x, w.point));
        let witness = if min_norm <= min_ratio { w(&norm_witness) } else { w(&ratio_witness) };
        report.check_min("c_D", c_d, C_D_FLOOR, witness);
    }
    let verdict = report.passed;
    Ok(NoZeroesReport {
        d_samples: d_spec.iter().map(|x| x.coords.clone()).collect(),
        min_weight_pairing,
        u_radius,
        n_region_samples: points.len(),
        min_norm,
        min_ratio,
        c_d: if vacuous { f64::INFINITY } else { c_d },
        norm_witness,
        ratio_witness,
        vacuous,
        verdict,
        report,
    })
}
