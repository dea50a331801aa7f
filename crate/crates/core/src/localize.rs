//! Fixed-point localization: the calibrated Euler convention, the
//! localization sum, its `s → 0⁺` regularization, exactness vanishing, and
//! the boundary term of the localization argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::eqforms::{euler_factor, exp_i_omega_tilde_at, exterior_derivative, twisted_differential, EquivariantForm};
use crate::error::{check_dim, Error, Result};
use crate::extrap::neville;
use crate::geometry::{Manifold, Region};
use crate::graded::Graded;
use crate::integrate::{
    integrate_graded_invariant, integrate_top, support_in_regular_set, truncation_region, LimitResult,
    LimitVerdict, QuadratureSpec,
};
use crate::liealg::{is_strongly_regular, AlgebraVector, TestForm};
use crate::quad::{adaptive, AdaptiveOptions, Estimate};
use crate::report::VerificationReport;

/// Candidate per-factor constants, in the order they are tried.
pub const EULER_CANDIDATES: [(&str, Complex64); 10] = [
    ("1", Complex64::new(1.0, 0.0)),
    ("-1", Complex64::new(-1.0, 0.0)),
    ("i", Complex64::new(0.0, 1.0)),
    ("-i", Complex64::new(0.0, -1.0)),
    ("2π", Complex64::new(2.0 * PI, 0.0)),
    ("-2π", Complex64::new(-2.0 * PI, 0.0)),
    ("2πi", Complex64::new(0.0, 2.0 * PI)),
    ("-2πi", Complex64::new(0.0, -2.0 * PI)),
    ("πi", Complex64::new(0.0, PI)),
    ("-πi", Complex64::new(0.0, -PI)),
];

/// Relative tolerance for a calibration candidate to match.
pub const CALIBRATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerConvention {
    /// Per-weight constant: `χ_p(X) = sign_p · Π_j c_χ λ_j(X)`.
    pub c_chi: Complex64,
    /// Base of the prefactor `(−2πi)ⁿ` multiplying the sum.
    pub prefactor_base: Complex64,
    pub label: String,
    pub reference: String,
    /// Largest relative mismatch at the calibration points.
    pub residual: f64,
    /// `(X, direct, localized)` at each calibration point.
    pub samples: Vec<(Vec<f64>, Complex64, Complex64)>,
}

impl EulerConvention {
    /// Convention with a fixed constant and no calibration record.
    pub fn with_constant(c: Complex64) -> Self {
        EulerConvention {
            c_chi: c,
            prefactor_base: Complex64::new(0.0, -2.0 * PI),
            label: format!("{c}"),
            reference: "fixed".into(),
            residual: f64::NAN,
            samples: Vec::new(),
        }
    }

    pub fn prefactor(&self, n: usize) -> Complex64 {
        self.prefactor_base.powi(n as i32)
    }
}

fn calibration_points(k: usize) -> Vec<Vec<f64>> {
    let base = [0.5, 1.0, 1.7, 2.3, 3.1];
    (0..5)
        .map(|i| (0..k).map(|a| base[i] * (1.0 + 0.37 * a as f64) + 0.11 * a as f64 * (i as f64 - 2.0)).collect())
        .collect()
}

/// Selects `c_χ` from [`EULER_CANDIDATES`] by matching the localization sum
/// of `α = 1` against direct quadrature of `∫_M e^{iω̃(X)}` at five regular
/// points.
pub fn calibrate_euler_convention(reference: &Manifold) -> Result<EulerConvention> {
    if !reference.compact {
        return Err(Error::Precondition(format!("calibration reference `{}` must be compact", reference.name)));
    }
    if reference.fixed_points.is_empty() {
        return Err(Error::UnsupportedManifold(format!("`{}` carries no fixed-point data", reference.name)));
    }
    let spec = QuadratureSpec { target_rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
    let one = crate::eqforms::form_one(reference);
    let mut direct = Vec::new();
    for x in calibration_points(reference.k()) {
        let xv = AlgebraVector::new(x.clone());
        if !is_strongly_regular(reference, &xv)?.regular {
            continue;
        }
        let f = |p: &[f64]| exp_i_omega_tilde_at(reference, 1.0, &x, p);
        let e = integrate_graded_invariant(reference, &f, &Region::Whole, &spec)?;
        direct.push((x, e.value));
    }
    if direct.len() < 3 {
        return Err(Error::Calibration("fewer than 3 regular calibration points".into()));
    }
    let mut matches = Vec::new();
    let mut best = f64::INFINITY;
    for (label, c) in EULER_CANDIDATES {
        let mut conv = EulerConvention::with_constant(c);
        conv.label = label.into();
        let mut worst = 0.0f64;
        let mut samples = Vec::new();
        for (x, d) in &direct {
            let l = localization_sum(reference, &one, &AlgebraVector::new(x.clone()), 1.0, &conv)?.value;
            worst = worst.max((l - d).norm() / d.norm().max(1e-300));
            samples.push((x.clone(), *d, l));
        }
        best = best.min(worst);
        if worst <= CALIBRATION_TOL {
            conv.residual = worst;
            conv.samples = samples;
            conv.reference = reference.name.clone();
            matches.push(conv);
        }
    }
    match matches.len() {
        1 => Ok(matches.pop().unwrap()),
        0 => Err(Error::Calibration(format!(
            "no Euler-factor constant matches direct quadrature on `{}` (best residual {best:e})",
            reference.name
        ))),
        _ => Err(Error::Calibration(format!(
            "ambiguous Euler-factor constant on `{}`: {}",
            reference.name,
            matches.iter().map(|c| c.label.clone()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointContribution {
    pub label: String,
    /// `μ_X(p)`.
    pub moment_value: f64,
    pub euler: Complex64,
    /// Includes the prefactor.
    pub contribution: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationResult {
    pub value: Complex64,
    pub contributions: Vec<FixedPointContribution>,
    pub x: Vec<f64>,
    pub s: f64,
}

/// `(−2πi)ⁿ Σ_p [α(X)]₀(p)·e^{isμ_X(p)} / χ_p(X)` over isolated fixed points.
pub fn localization_sum(
    m: &Manifold,
    alpha: &EquivariantForm,
    x: &AlgebraVector,
    s: f64,
    convention: &EulerConvention,
) -> Result<LocalizationResult> {
    check_dim(m.k(), x.dim())?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let verdict = is_strongly_regular(m, x)?;
    if !verdict.regular {
        return Err(Error::SingularEuler {
            point: verdict.offending.unwrap_or_default(),
            min_pairing: verdict.min_pairing,
        });
    }
    let pre = convention.prefactor(m.n);
    let mut contributions = Vec::with_capacity(m.fixed_points.len());
    let mut value = Complex64::new(0.0, 0.0);
    for fp in &m.fixed_points {
        let chi = euler_factor(fp, x, convention)?;
        let mu: f64 = fp.moment_value.coords.iter().zip(&x.coords).map(|(a, b)| a * b).sum();
        let a0 = alpha.eval(&x.coords, &fp.point).scalar_part();
        let contribution = pre * a0 * Complex64::new(0.0, s * mu).exp() / chi;
        value += contribution;
        contributions.push(FixedPointContribution { label: fp.label.clone(), moment_value: mu, euler: chi, contribution });
    }
    Ok(LocalizationResult { value, contributions, x: x.coords.clone(), s })
}

/// `s → 0⁺` limit of the localization sum and the closed form it must meet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularizedValue {
    pub limit: LimitResult,
    pub closed_form: Complex64,
    pub discrepancy: f64,
}

pub fn default_s_grid() -> Vec<f64> {
    (0..7).map(|j| 0.2 * 0.5f64.powi(j)).collect()
}

pub fn regularized_value(
    m: &Manifold,
    alpha: &EquivariantForm,
    x: &AlgebraVector,
    convention: &EulerConvention,
    s_grid: &[f64],
) -> Result<RegularizedValue> {
    if s_grid.len() < 3 || s_grid.windows(2).any(|w| !(w[1] < w[0])) || s_grid.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("s grid must have ≥ 3 positive, strictly decreasing entries".into()));
    }
    let mut seq = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        seq.push((s, localization_sum(m, alpha, x, s, convention)?.value));
    }
    let h: Vec<f64> = s_grid.to_vec();
    let y: Vec<Complex64> = seq.iter().map(|v| v.1).collect();
    let (value, err) = neville(&h, &y, 0.0);
    let alt = neville(&h[1..], &y[1..], 0.0).0;
    let pre = convention.prefactor(m.n);
    let mut closed_form = Complex64::new(0.0, 0.0);
    for fp in &m.fixed_points {
        closed_form += pre * alpha.eval(&x.coords, &fp.point).scalar_part() / euler_factor(fp, x, convention)?;
    }
    let converged = err <= 1e-10 * value.norm().max(1.0);
    Ok(RegularizedValue {
        discrepancy: (value - closed_form).norm(),
        closed_form,
        limit: LimitResult {
            value,
            error_estimate: err,
            sequence: seq,
            last_extrapolant: alt,
            converged,
            verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Slow },
            partial_error: 0.0,
        },
    })
}

/// `|regularized_value(d_𝔤β, X)| ≤ tol` at every sample.
pub fn exactness_vanishing_check(
    m: &std::sync::Arc<Manifold>,
    beta: &EquivariantForm,
    x_samples: &[AlgebraVector],
    convention: &EulerConvention,
    tol: f64,
) -> Result<VerificationReport> {
    let alpha = twisted_differential(m, beta)?;
    let mut rep = VerificationReport::new(format!("exactness vanishing on {}", m.name));
    for x in x_samples {
        let r = regularized_value(m, &alpha, x, convention, &default_s_grid())?;
        rep.check(format!("closed form at X={:?}", x.coords), r.closed_form.norm(), tol, None);
        rep.check(format!("s-limit at X={:?}", x.coords), r.limit.value.norm(), tol, None);
    }
    Ok(rep)
}

/// `θ_X = G·VF_X / (VF_X, VF_X)_G` as a 1-form.
fn theta_form(m: &Manifold, x: &[f64], p: &[f64]) -> Graded {
    let vf = m.vector_field(x, p);
    let low = m.metric_lower(p, &vf);
    let nrm: f64 = low.iter().zip(&vf).map(|(a, b)| a * b).sum();
    if nrm <= 0.0 || !nrm.is_finite() {
        return Graded::zero(p.len());
    }
    let v: Vec<f64> = low.iter().map(|g| g / nrm).collect();
    Graded::one_form(&v)
}

/// `θ_X∧Σ_j(−dθ_X)^j∧α(X)∧e^{iω̃(X)}` at `p`.
fn boundary_integrand(m: &Manifold, alpha: &EquivariantForm, x: &[f64], p: &[f64]) -> Graded {
    let th = theta_form(m, x, p);
    let dth = exterior_derivative(m, &|q: &[f64]| theta_form(m, x, q), p).scale(Complex64::new(-1.0, 0.0));
    let mut series = Graded::scalar(p.len(), Complex64::new(1.0, 0.0));
    let mut pw = series.clone();
    for _ in 1..=m.n {
        pw = pw.wedge(&dth);
        series.add_assign(&pw);
    }
    th.wedge(&series).wedge(&alpha.eval(x, p)).wedge(&exp_i_omega_tilde_at(m, 1.0, x, p))
}

/// Boundary integrals `∫_{‖μ‖=R} (∫_𝔤 θ_X/(d_𝔤θ_X)∧α∧e^{iω̃}∧φ)_{[2n−1]}`
/// along an increasing `R` grid.
pub fn boundary_term_diagnostic(
    m: &Manifold,
    alpha: &EquivariantForm,
    phi: &TestForm,
    r_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<LimitResult> {
    check_dim(m.k(), phi.dim())?;
    if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("R grid must be non-empty and strictly increasing".into()));
    }
    if !phi.is_zero() && !support_in_regular_set(m, phi)? {
        return Err(Error::Precondition("support of φ meets the non-regular set".into()));
    }
    let mut seq = Vec::new();
    let mut perr = 0.0f64;
    for &r in r_grid {
        let e = boundary_at(m, alpha, phi, r, spec)?;
        perr = perr.max(e.error);
        seq.push((r, e.value));
    }
    let last = seq[seq.len() - 1].1;
    let prev = if seq.len() > 1 { seq[seq.len() - 2].1 } else { last };
    let converged = last.norm() + perr <= 1e-3;
    Ok(LimitResult {
        value: Complex64::new(0.0, 0.0),
        error_estimate: last.norm() + perr,
        sequence: seq,
        last_extrapolant: prev,
        converged,
        verdict: if converged { LimitVerdict::Converged } else { LimitVerdict::Slow },
        partial_error: perr,
    })
}

fn boundary_at(m: &Manifold, alpha: &EquivariantForm, phi: &TestForm, r: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if phi.is_zero() || alpha.is_zero() {
        return Ok(Estimate::zero());
    }
    let region = truncation_region(m, r);
    if region == Region::Whole {
        return Ok(Estimate::zero());
    }
    if m.compact {
        return Err(Error::UnsupportedManifold(format!(
            "level set ‖μ‖ = {r} of compact `{}` is not parametrized by the chart",
            m.name
        )));
    }
    let map = m.region_map(&region)?;
    if map.is_empty() {
        return Ok(Estimate::zero());
    }
    let radial = map
        .radial_dim()
        .ok_or_else(|| Error::UnsupportedManifold(format!("level set of `{}` is not parametrized by the chart", m.name)))?;
    let d = m.dim();
    let free: Vec<usize> = (0..d).filter(|&i| i != radial).collect();
    let f = |yf: &[f64]| -> Complex64 {
        let mut y = vec![1.0; d];
        for (j, &i) in free.iter().enumerate() {
            y[i] = yf[j];
        }
        let mut p = vec![0.0; d];
        if map.map(&y, &mut p) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if (crate::geometry::moment_norm(m, &p).unwrap_or(f64::NAN) - r).abs() > 1e-9 * r.max(1.0) {
            // face of the cone that is not part of the level set
            return Complex64::new(0.0, 0.0);
        }
        let h = 1e-6;
        let mut tangents = Vec::with_capacity(d);
        for &i in std::iter::once(&radial).chain(free.iter()) {
            let (a, b) = if y[i] + h <= 1.0 { (y[i], y[i] + h) } else { (y[i] - h, y[i]) };
            let mut ya = y.clone();
            let mut yb = y.clone();
            ya[i] = a;
            yb[i] = b;
            let mut pa = vec![0.0; d];
            let mut pb = vec![0.0; d];
            map.map(&ya, &mut pa);
            map.map(&yb, &mut pb);
            tangents.push(pa.iter().zip(&pb).map(|(u, v)| (v - u) / h).collect::<Vec<f64>>());
        }
        let det = nalgebra::DMatrix::from_fn(d, d, |i, j| tangents[j][i]).determinant();
        if det == 0.0 || !det.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        // ∫_𝔤 by the same tensor rule as the pairing, applied per node
        let k = m.k();
        let axes: Vec<Vec<(f64, f64)>> = (0..k)
            .map(|a| {
                let eta = m.moment(&p)[a];
                let rule = crate::quad::rules::gauss_legendre(spec.inner_order);
                crate::liealg::bump_axis_nodes(phi.center[a], phi.radius, eta, spec.inner_panels, &rule, k == 1)
            })
            .collect();
        let total: usize = axes.iter().map(|v| v.len()).product();
        let mut acc = Graded::zero(d);
        let mut idx = vec![0usize; k];
        let mut x = vec![0.0; k];
        for _ in 0..total {
            let mut w = 1.0;
            for a in 0..k {
                x[a] = axes[a][idx[a]].0;
                w *= axes[a][idx[a]].1;
            }
            let v = phi.eval(&x);
            if v.norm() != 0.0 {
                acc.add_scaled(&boundary_integrand(m, alpha, &x, &p).degree_part(d - 1), v * w);
            }
            for a in (0..k).rev() {
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
        let mut g = acc;
        for t in &tangents[1..] {
            g = g.contract(t);
        }
        g.scalar_part() * det.signum()
    };
    let nf = free.len();
    Ok(adaptive(
        &f,
        &vec![0.0; nf],
        &vec![1.0; nf],
        &AdaptiveOptions { rel_tol: spec.target_rel_tol.max(1e-8), abs_tol: 1e-12, max_evals: spec.max_evals },
    ))
}

/// Direct pairing used as the localization oracle: `∫_M α(X)∧e^{iω̃(X)}`.
pub fn direct_value(m: &Manifold, alpha: &EquivariantForm, x: &AlgebraVector, spec: &QuadratureSpec) -> Result<Estimate> {
    let f = |p: &[f64]| alpha.eval(&x.coords, p).wedge(&exp_i_omega_tilde_at(m, 1.0, &x.coords, p)).top();
    integrate_top(m, &Region::Whole, alpha.invariant, spec, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqforms::{form_angular, form_one, omega_tilde};
    use crate::geometry::{catalog_complex_space, catalog_projective_space, catalog_sphere};
    use crate::integrate::{damped_improper_integral, default_eps_grid};
    use crate::liealg::Weight;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ci(x: f64) -> Complex64 {
        Complex64::new(0.0, x)
    }

    fn conv() -> EulerConvention {
        calibrate_euler_convention(&catalog_sphere(1.0).unwrap()).unwrap()
    }

    #[test]
    fn calibration_on_sphere_selects_unique_constant() {
        let c = conv();
        assert!(c.residual <= CALIBRATION_TOL);
        assert_eq!(c.samples.len(), 5);
        let c2 = calibrate_euler_convention(&catalog_sphere(2.5).unwrap()).unwrap();
        assert_eq!(c.c_chi, c2.c_chi);
        assert!(calibrate_euler_convention(&catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap()).is_err());
    }

    #[test]
    fn sphere_sum_matches_sine_oracle() {
        let m = catalog_sphere(1.0).unwrap();
        let r = localization_sum(&m, &form_one(&m), &AlgebraVector::new(vec![1.0]), 1.0, &conv()).unwrap();
        let oracle = ci(4.0 * PI * 1f64.sin());
        assert!((r.value - oracle).norm() < 1e-12);
        let total: Complex64 = r.contributions.iter().map(|c| c.contribution).sum();
        assert_eq!(total, r.value);
    }

    #[test]
    fn complex_line_sum_matches_damped_integral() {
        let m = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        let c = conv();
        let spec = QuadratureSpec::with_tol(1e-11);
        for t in [0.5, 1.0, 2.0] {
            let x = AlgebraVector::new(vec![t]);
            let l = localization_sum(&m, &form_one(&m), &x, 1.0, &c).unwrap();
            assert!((l.value - Complex64::new(-2.0 * PI / t, 0.0)).norm() < 1e-12);
            let d = damped_improper_integral(&m, &form_one(&m), &x, &AlgebraVector::new(vec![1.0]), &default_eps_grid(), &spec)
                .unwrap();
            assert!((d.value - l.value).norm() < 1e-4 * l.value.norm());
        }
    }

    #[test]
    fn singular_x_is_rejected() {
        let m = catalog_sphere(1.0).unwrap();
        assert!(matches!(
            localization_sum(&m, &form_one(&m), &AlgebraVector::new(vec![0.0]), 1.0, &conv()),
            Err(Error::SingularEuler { .. })
        ));
    }

    #[test]
    fn projective_plane_sum_matches_direct_quadrature() {
        let m = catalog_projective_space(2, 1.0).unwrap();
        let c = conv();
        let spec = QuadratureSpec::with_tol(1e-8);
        let x = AlgebraVector::new(vec![1.3, -0.6]);
        let l = localization_sum(&m, &form_one(&m), &x, 1.0, &c).unwrap();
        let d = direct_value(&m, &form_one(&m), &x, &spec).unwrap();
        assert!((l.value - d.value).norm() < 1e-4 * l.value.norm(), "{} vs {}", l.value, d.value);
    }

    #[test]
    fn regularized_value_matches_closed_form() {
        let m = Arc::new(catalog_sphere(1.0).unwrap());
        let c = conv();
        let wt = omega_tilde(&m, 1.0).unwrap();
        let r = regularized_value(&m, &wt, &AlgebraVector::new(vec![1.3]), &c, &default_s_grid()).unwrap();
        assert!(r.discrepancy < 1e-8);
        assert!(r.closed_form.norm() > 1e-3);
    }

    #[test]
    fn exactness_on_sphere_and_line() {
        let c = conv();
        let s2 = Arc::new(catalog_sphere(1.0).unwrap());
        let beta = form_angular(&s2, 0, &[1.0, 0.0, -1.0]).unwrap();
        let xs = vec![AlgebraVector::new(vec![1.0]), AlgebraVector::new(vec![2.2])];
        assert!(exactness_vanishing_check(&s2, &beta, &xs, &c, 1e-8).unwrap().passed);
        let zero = EquivariantForm::zero(2, 1);
        assert!(exactness_vanishing_check(&s2, &zero, &xs, &c, 0.0).unwrap().passed);
    }

    #[test]
    fn boundary_term_on_line_matches_oracle_and_decays() {
        let m = catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap();
        let phi = TestForm::bump(vec![1.0], 0.5).unwrap();
        let spec = QuadratureSpec::with_tol(1e-9);
        let l = boundary_term_diagnostic(&m, &form_one(&m), &phi, &[5.0, 40.0, 160.0], &spec).unwrap();
        // 2π ∫ φ(t) e^{itR}/t dt
        let (x, w) = crate::quad::rules::gauss_legendre(20);
        let r = 5.0;
        let mut oracle = Complex64::new(0.0, 0.0);
        for p in 0..50 {
            let c = 0.5 + (p as f64 + 0.5) * 0.02;
            for (xi, wi) in x.iter().zip(&w) {
                let t = c + 0.01 * xi;
                oracle += phi.eval(&[t]) * Complex64::new(0.0, t * r).exp() / t * (0.01 * wi);
            }
        }
        oracle *= 2.0 * PI;
        let v0 = l.sequence[0].1;
        assert!((v0 - oracle).norm() < 1e-6 * oracle.norm().max(1e-3), "{v0} vs {oracle}");
        assert!(l.sequence[2].1.norm() < 1e-3);
        let zero = boundary_term_diagnostic(&m, &form_one(&m), &phi.zero_like(), &[1.0, 2.0], &spec).unwrap();
        assert!(zero.sequence.iter().all(|s| s.1 == Complex64::new(0.0, 0.0)));
        let s2 = catalog_sphere(1.0).unwrap();
        let l = boundary_term_diagnostic(&s2, &form_one(&s2), &phi, &[2.0, 3.0], &spec).unwrap();
        assert!(l.sequence.iter().all(|s| s.1 == Complex64::new(0.0, 0.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn homogeneity_in_s(t in 0.2f64..4.0, s in 0.1f64..3.0) {
            let m = catalog_projective_space(2, 1.0).unwrap();
            let c = EulerConvention::with_constant(ci(1.0));
            let x = AlgebraVector::new(vec![t, -0.37 * t + 0.05]);
            let a = localization_sum(&m, &form_one(&m), &x, s, &c).unwrap().value;
            let b = localization_sum(&m, &form_one(&m), &x.scaled(s), 1.0, &c).unwrap().value;
            prop_assert!((a - b * s.powi(2)).norm() <= 1e-9 * a.norm().max(1e-12));
        }

        #[test]
        fn depends_only_on_weight_pairings(t in 0.2f64..4.0) {
            // on S² the pairings are ±X, so X ↦ X is the only freedom; on
            // ℂ² with weights e₁, e₂, permuting X together with the weights
            let m = catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1])]).unwrap();
            let m2 = catalog_complex_space(2, vec![Weight::new(vec![0, 1]), Weight::new(vec![1, 0])]).unwrap();
            let c = EulerConvention::with_constant(ci(1.0));
            let a = localization_sum(&m, &form_one(&m), &AlgebraVector::new(vec![t, 1.1]), 1.0, &c).unwrap().value;
            let b = localization_sum(&m2, &form_one(&m2), &AlgebraVector::new(vec![1.1, t]), 1.0, &c).unwrap().value;
            prop_assert!((a - b).norm() <= 1e-12 * a.norm());
        }
    }
}
