//! Polynomial equivariant forms `α(X) = Σ_j P_j(X)·β_j` with chart-defined
//! mixed-degree coefficients, the twisted differential `d_𝔤 = d + ι_X`,
//! `ω̃ = μ + ω`, its exponential, and Euler factors at fixed points.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{FixedPointDatum, Manifold};
use crate::graded::Graded;
use crate::liealg::{AlgebraVector, TAU_REG};
use crate::localize::EulerConvention;
use crate::poly::{MonomialSpec, Polynomial};
use crate::quad::halton_point;
use crate::report::VerificationReport;

/// Step of the three-point fallback stencils of the exterior derivative.
pub const H_D: f64 = 1e-5;
/// Step of the fourth-order stencil.
pub const H_D4: f64 = 1e-3;

/// Mixed-degree form on the chart, as a coefficient evaluator.
pub type ChartForm = Arc<dyn Fn(&[f64]) -> Graded + Send + Sync>;

/// Graded evaluator depending on `(X, m)` non-polynomially in `X`.
pub type GradedEval = Arc<dyn Fn(&[f64], &[f64]) -> Graded + Send + Sync>;

#[derive(Clone)]
pub struct EquivariantForm {
    pub dim: usize,
    pub k: usize,
    pub label: String,
    /// Coefficients independent of the torus angles.
    pub invariant: bool,
    terms: Vec<(Polynomial, ChartForm)>,
}

impl fmt::Debug for EquivariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquivariantForm")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("k", &self.k)
            .field("terms", &self.terms.len())
            .field("invariant", &self.invariant)
            .finish()
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl EquivariantForm {
    pub fn zero(dim: usize, k: usize) -> Self {
        EquivariantForm { dim, k, label: "0".into(), invariant: true, terms: Vec::new() }
    }

    pub fn from_terms(dim: usize, k: usize, label: impl Into<String>, invariant: bool, terms: Vec<(Polynomial, ChartForm)>) -> Self {
        for (p, _) in &terms {
            assert_eq!(p.nvars(), k, "polynomial variables must match the torus dimension");
        }
        EquivariantForm { dim, k, label: label.into(), invariant, terms }
    }

    pub fn terms(&self) -> &[(Polynomial, ChartForm)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(p, _)| p.is_zero())
    }

    /// Highest polynomial degree in `X`.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(p, _)| p.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &EquivariantForm) -> EquivariantForm {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        EquivariantForm {
            dim: self.dim,
            k: self.k,
            label: format!("{} + {}", self.label, o.label),
            invariant: self.invariant && o.invariant,
            terms,
        }
    }

    pub fn scale(&self, s: Complex64) -> EquivariantForm {
        EquivariantForm {
            terms: self.terms.iter().map(|(p, b)| (p.scale(s), b.clone())).collect(),
            label: format!("({s})·{}", self.label),
            ..self.clone()
        }
    }

    /// Multiply every term by the polynomial `q(X)`.
    pub fn mul_poly(&self, q: &Polynomial) -> EquivariantForm {
        EquivariantForm {
            terms: self.terms.iter().map(|(p, b)| (p.mul(q), b.clone())).collect(),
            label: format!("P·{}", self.label),
            ..self.clone()
        }
    }

    /// `α(X)(m)` without domain checks.
    pub fn eval(&self, x: &[f64], p: &[f64]) -> Graded {
        let mut g = Graded::zero(self.dim);
        for (poly, beta) in &self.terms {
            let w = poly.eval(x);
            if w != c(0.0) {
                g.add_scaled(&beta(p), w);
            }
        }
        g
    }

    /// The `X`-polynomial-valued restriction: list of `(P_j, β_j(m))`.
    pub fn eval_terms(&self, p: &[f64]) -> Vec<(Polynomial, Graded)> {
        self.terms.iter().map(|(poly, beta)| (poly.clone(), beta(p))).collect()
    }
}

/// `Σ_j P_j(X)·β_j(m)` after checking dimensions and the chart domain.
pub fn evaluate_form(m: &Manifold, alpha: &EquivariantForm, x: &AlgebraVector, p: &[f64]) -> Result<Graded> {
    check_dim(m.k(), x.dim())?;
    check_dim(m.dim(), alpha.dim)?;
    m.chart.check(p)?;
    Ok(alpha.eval(&x.coords, p))
}

/// Sign of `dx_i ∧ dx_I` relative to the increasing ordering of `I ∪ {i}`.
fn insert_sign(i: usize, mask: usize) -> f64 {
    if (mask & ((1 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exterior derivative of a chart form at `p`: five-point central
/// differences with step [`H_D4`], falling back to three-point stencils with
/// step [`H_D`] (one-sided where the chart boundary cuts them).
pub fn exterior_derivative(m: &Manifold, beta: &dyn Fn(&[f64]) -> Graded, p: &[f64]) -> Graded {
    let d = p.len();
    let mut out = Graded::zero(d);
    let mut q = p.to_vec();
    let mut base: Option<Graded> = None;
    for i in 0..d {
        let scale = 1.0 + p[i].abs().min(1.0);
        let h4 = H_D4 * scale;
        let inside = |q: &mut Vec<f64>, x: f64| {
            q[i] = x;
            m.chart.periodic[i] || m.chart.contains(q)
        };
        if inside(&mut q, p[i] + 2.0 * h4) && inside(&mut q, p[i] - 2.0 * h4) {
            let mut f = |x: f64| {
                q[i] = x;
                beta(&q)
            };
            let (a2, a1, b1, b2) = (f(p[i] + 2.0 * h4), f(p[i] + h4), f(p[i] - h4), f(p[i] - 2.0 * h4));
            q[i] = p[i];
            let deriv = a1.sub(&b1).scale(c(8.0)).sub(&a2.sub(&b2)).scale(c(1.0 / (12.0 * h4)));
            accumulate(&mut out, &deriv, i);
            continue;
        }
        let h = H_D * scale;
        q[i] = p[i] + h;
        let plus = m.chart.contains(&q) || m.chart.periodic[i];
        let gp = if plus { Some(beta(&q)) } else { None };
        q[i] = p[i] - h;
        let minus = m.chart.contains(&q) || m.chart.periodic[i];
        let gm = if minus { Some(beta(&q)) } else { None };
        let deriv = match (gp, gm) {
            (Some(a), Some(b)) => a.sub(&b).scale(c(0.5 / h)),
            (Some(a), None) => {
                q[i] = p[i] + 2.0 * h;
                let a2 = beta(&q);
                let b0 = base.get_or_insert_with(|| beta(p)).clone();
                b0.scale(c(-3.0)).add(&a.scale(c(4.0))).sub(&a2).scale(c(0.5 / h))
            }
            (None, Some(b)) => {
                q[i] = p[i] - 2.0 * h;
                let b2 = beta(&q);
                let b0 = base.get_or_insert_with(|| beta(p)).clone();
                b0.scale(c(3.0)).sub(&b.scale(c(4.0))).add(&b2).scale(c(0.5 / h))
            }
            (None, None) => Graded::zero(d),
        };
        q[i] = p[i];
        accumulate(&mut out, &deriv, i);
    }
    out
}

/// Adds `dx_i ∧ deriv` to `out`.
fn accumulate(out: &mut Graded, deriv: &Graded, i: usize) {
    for (mask, v) in deriv.coeffs().iter().enumerate() {
        if mask & (1 << i) != 0 || *v == c(0.0) {
            continue;
        }
        let t = mask | (1 << i);
        out.set(t, out.get(t) + v * insert_sign(i, mask));
    }
}

/// `d_𝔤α`: terms `(P_j, dβ_j)` and `(P_j·X_a, ι_{VF_{E^a}}β_j)`.
pub fn twisted_differential(m: &Arc<Manifold>, alpha: &EquivariantForm) -> Result<EquivariantForm> {
    check_dim(m.dim(), alpha.dim)?;
    check_dim(m.k(), alpha.k)?;
    let k = alpha.k;
    let mut terms: Vec<(Polynomial, ChartForm)> = Vec::new();
    for (poly, beta) in alpha.terms() {
        let mm = m.clone();
        let b = beta.clone();
        terms.push((poly.clone(), Arc::new(move |p: &[f64]| exterior_derivative(&mm, &*b, p))));
        for a in 0..k {
            let mm = m.clone();
            let b = beta.clone();
            let mut e = vec![0.0; k];
            e[a] = 1.0;
            terms.push((
                poly.mul_coordinate(a),
                Arc::new(move |p: &[f64]| {
                    let v = mm.vector_field(&e, p);
                    b(p).contract(&v)
                }),
            ));
        }
    }
    Ok(EquivariantForm::from_terms(alpha.dim, k, format!("d_g({})", alpha.label), alpha.invariant, terms))
}

/// `α := d_𝔤β`, realized as an evaluator.
pub fn exact_form_from_potential(m: &Arc<Manifold>, beta: &EquivariantForm) -> Result<EquivariantForm> {
    twisted_differential(m, beta)
}

/// Sample set of `(X, m)` pairs: `X = 0` first, then Halton points in
/// `[−2, 2]^k`, paired with interior chart points.
fn sample_pairs(m: &Manifold, n: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let pts = m.sample_points(n, &m.sampling_region(), 0.02, 101)?;
    let k = m.k();
    Ok(pts
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let x = if i == 0 {
                vec![0.0; k]
            } else {
                halton_point(1000 + i as u64, k).iter().map(|v| 4.0 * v - 2.0).collect()
            };
            (x, p)
        })
        .collect())
}

/// Max residual of `d_𝔤α` over sampled `(X, m)`.
pub fn check_equivariantly_closed(
    m: &Arc<Manifold>,
    alpha: &EquivariantForm,
    n_samples: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let da = twisted_differential(m, alpha)?;
    let mut worst = 0.0f64;
    let mut witness = None;
    for (x, p) in sample_pairs(m, n_samples)? {
        let g = da.eval(&x, &p);
        let r = g.max_abs();
        if !r.is_finite() {
            return Err(Error::Evaluation(format!("d_g({}) non-finite at X={x:?}, m={p:?}", alpha.label)));
        }
        if r > worst {
            worst = r;
            witness = Some(format!("X={x:?}, m={p:?}"));
        }
    }
    let mut rep = VerificationReport::new(format!("equivariantly closed[{} on {}]", alpha.label, m.name));
    rep.check("max |d_g α|", worst, tol, if worst > tol { witness } else { None });
    rep.note(format!("{n_samples} samples, finite-difference steps {H_D4} and {H_D}"));
    Ok(rep)
}

/// Whether every coefficient is unchanged along the torus action at samples.
pub fn check_invariant(m: &Manifold, alpha: &EquivariantForm, n_samples: usize, tol: f64) -> Result<bool> {
    let k = m.k();
    for (x, p) in sample_pairs(m, n_samples)? {
        let g0 = alpha.eval(&x, &p);
        for a in 0..k {
            let mut e = vec![0.0; k];
            e[a] = 1.0;
            let q = m.flow(&e, 1.234 + a as f64, &p);
            if alpha.eval(&x, &q).sub(&g0).max_abs() > tol * (1.0 + g0.max_abs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_s(s: f64) -> Result<()> {
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "s must be positive, got {s}: negative s reverses the orientation defined by (sω)^n and is excluded"
        )));
    }
    Ok(())
}

/// Constant form 1.
pub fn form_one(m: &Manifold) -> EquivariantForm {
    let d = m.dim();
    let one: ChartForm = Arc::new(move |_: &[f64]| Graded::scalar(d, c(1.0)));
    EquivariantForm::from_terms(d, m.k(), "1", true, vec![(Polynomial::one(m.k()), one)])
}

/// The symplectic form ω as an (X-independent) equivariant form.
pub fn form_omega(m: &Arc<Manifold>) -> EquivariantForm {
    let mm = m.clone();
    let w: ChartForm = Arc::new(move |p: &[f64]| mm.omega(p));
    EquivariantForm::from_terms(m.dim(), m.k(), "ω", true, vec![(Polynomial::one(m.k()), w)])
}

/// Liouville form ωⁿ/n!.
pub fn form_liouville(m: &Arc<Manifold>) -> EquivariantForm {
    let mm = m.clone();
    let d = m.dim();
    let w: ChartForm = Arc::new(move |p: &[f64]| Graded::basis(d, (1 << d) - 1, c(mm.liouville_density(p))));
    EquivariantForm::from_terms(d, m.k(), "ω^n/n!", true, vec![(Polynomial::one(m.k()), w)])
}

/// The 0-form `μ_a` (0-based component), raised to `power`.
pub fn form_moment_power(m: &Arc<Manifold>, a: usize, power: u32) -> Result<EquivariantForm> {
    if a >= m.k() {
        return Err(Error::IndexOutOfRange { index: a + 1, max: m.k() });
    }
    let mm = m.clone();
    let d = m.dim();
    let w: ChartForm = Arc::new(move |p: &[f64]| Graded::scalar(d, c(mm.moment(p)[a].powi(power as i32))));
    Ok(EquivariantForm::from_terms(d, m.k(), format!("μ_{}^{power}", a + 1), true, vec![(Polynomial::one(m.k()), w)]))
}

/// The 0-form given by the chart coordinate `x_i` (0-based).
pub fn form_coordinate(m: &Arc<Manifold>, i: usize) -> Result<EquivariantForm> {
    if i >= m.dim() {
        return Err(Error::IndexOutOfRange { index: i + 1, max: m.dim() });
    }
    let d = m.dim();
    let w: ChartForm = Arc::new(move |p: &[f64]| Graded::scalar(d, c(p[i])));
    let inv = !m.chart.periodic[i];
    Ok(EquivariantForm::from_terms(d, m.k(), format!("x_{}", i + 1), inv, vec![(Polynomial::one(m.k()), w)]))
}

/// The invariant 1-form `f(x_partner)·dθ` for the angle coordinate `angle`
/// (0-based chart index), `f` given by its power-series coefficients in the
/// coordinate paired with that angle (`z` on the sphere, `u_j` on toric
/// charts).
pub fn form_angular(m: &Arc<Manifold>, angle: usize, profile: &[f64]) -> Result<EquivariantForm> {
    if angle >= m.dim() || !m.chart.periodic[angle] {
        return Err(Error::InvalidParameter(format!("chart coordinate {} is not an angle", angle + 1)));
    }
    let partner = angle ^ 1;
    let d = m.dim();
    let prof = profile.to_vec();
    let w: ChartForm = Arc::new(move |p: &[f64]| {
        let x = p[partner];
        let f = prof.iter().rev().fold(0.0, |acc, &cf| acc * x + cf);
        let mut g = Graded::zero(d);
        g.set(1 << angle, c(f));
        g
    });
    let label = format!("f(x_{})dx_{}", partner + 1, angle + 1);
    Ok(EquivariantForm::from_terms(d, m.k(), label, true, vec![(Polynomial::one(m.k()), w)]))
}

/// `s·ω̃ = s·μ(X) + s·ω`.
pub fn omega_tilde(m: &Arc<Manifold>, s: f64) -> Result<EquivariantForm> {
    check_s(s)?;
    let k = m.k();
    let d = m.dim();
    let mut terms: Vec<(Polynomial, ChartForm)> = Vec::new();
    for a in 0..k {
        let mm = m.clone();
        terms.push((
            Polynomial::coordinate(k, a).scale(c(s)),
            Arc::new(move |p: &[f64]| Graded::scalar(d, c(mm.moment(p)[a]))),
        ));
    }
    let mm = m.clone();
    terms.push((Polynomial::constant(k, c(s)), Arc::new(move |p: &[f64]| mm.omega(p))));
    let label = if s == 1.0 { "ω̃".to_string() } else { format!("{s}·ω̃") };
    Ok(EquivariantForm::from_terms(d, k, label, true, terms))
}

/// `e^{isω̃(X)} = e^{isμ_X}·Σ_{p≤n}(isω)^p/p!` at `(X, m)`.
pub fn exp_i_omega_tilde_at(m: &Manifold, s: f64, x: &[f64], p: &[f64]) -> Graded {
    let phase = Complex64::new(0.0, s * m.moment_x(p, x)).exp();
    m.omega(p).scale(Complex64::new(0.0, s)).exp_even().scale(phase)
}

pub fn exp_i_omega_tilde(m: &Arc<Manifold>, s: f64) -> Result<GradedEval> {
    check_s(s)?;
    let mm = m.clone();
    Ok(Arc::new(move |x: &[f64], p: &[f64]| exp_i_omega_tilde_at(&mm, s, x, p)))
}

/// `orientation_sign · Π_j c_χ·λ_j(X)`.
pub fn euler_factor(datum: &FixedPointDatum, x: &AlgebraVector, convention: &EulerConvention) -> Result<Complex64> {
    let xn = x.norm();
    let mut val = Complex64::new(datum.orientation_sign as f64, 0.0);
    let mut min_pair = f64::INFINITY;
    for w in &datum.weights {
        check_dim(w.coeffs.len(), x.dim())?;
        let l = w.apply(&x.coords);
        min_pair = min_pair.min(l.abs());
        if l.abs() <= TAU_REG * xn * w.norm() || l == 0.0 {
            return Err(Error::SingularEuler { point: datum.label.clone(), min_pairing: l.abs() });
        }
        val *= convention.c_chi * l;
    }
    Ok(val)
}

/// Catalog forms selectable from configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedForm {
    One,
    Omega,
    OmegaTilde,
    Liouville,
    Moment {
        component: usize,
        #[serde(default = "one_u32")]
        power: u32,
    },
    Coordinate {
        index: usize,
    },
    Angular {
        angle: usize,
        profile: Vec<f64>,
    },
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormTermSpec {
    #[serde(default)]
    pub poly: Vec<MonomialSpec>,
    pub form: NamedForm,
}

/// An equivariant form in configs: a sum of terms, optionally replaced by
/// its twisted differential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub terms: Vec<FormTermSpec>,
    #[serde(default)]
    pub exact: bool,
}

impl NamedForm {
    pub fn build(&self, m: &Arc<Manifold>) -> Result<EquivariantForm> {
        match self {
            NamedForm::One => Ok(form_one(m)),
            NamedForm::Omega => Ok(form_omega(m)),
            NamedForm::OmegaTilde => omega_tilde(m, 1.0),
            NamedForm::Liouville => Ok(form_liouville(m)),
            NamedForm::Moment { component, power } => {
                if *component == 0 {
                    return Err(Error::IndexOutOfRange { index: 0, max: m.k() });
                }
                form_moment_power(m, component - 1, *power)
            }
            NamedForm::Coordinate { index } => {
                if *index == 0 {
                    return Err(Error::IndexOutOfRange { index: 0, max: m.dim() });
                }
                form_coordinate(m, index - 1)
            }
            NamedForm::Angular { angle, profile } => {
                if *angle == 0 {
                    return Err(Error::IndexOutOfRange { index: 0, max: m.dim() });
                }
                form_angular(m, angle - 1, profile)
            }
        }
    }
}

impl FormSpec {
    pub fn build(&self, m: &Arc<Manifold>) -> Result<EquivariantForm> {
        let k = m.k();
        let mut acc = EquivariantForm::zero(m.dim(), k);
        let mut labels = Vec::new();
        for t in &self.terms {
            let f = t.form.build(m)?;
            let f = if t.poly.is_empty() {
                f
            } else {
                let q = Polynomial::from_specs(k, &t.poly).map_err(Error::Config)?;
                f.mul_poly(&q)
            };
            labels.push(f.label.clone());
            acc = if acc.terms().is_empty() { f } else { acc.add(&f) };
        }
        acc.label = labels.join(" + ");
        if self.exact {
            let b = twisted_differential(m, &acc)?;
            return Ok(b);
        }
        Ok(acc)
    }
}
