//! Distributions on `𝔤` and `𝔤*` with scalar or form values: pairings, the
//! distributional twisted differentials, the normalized Fourier transform,
//! the Paradan pushforward and the distributional Stokes identity.
//!
//! Form-valued distributions are evaluator factories: given a test datum they
//! return a [`ChartForm`] to be evaluated pointwise or integrated.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::eqforms::{exterior_derivative, ChartForm, EquivariantForm};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Manifold, Region};
use crate::graded::Graded;
use crate::integrate::{
    integrate_top, pair_distributional, truncation_region, GFourier, LimitVerdict, QuadratureSpec, RPolicy,
};
use crate::jet::{Jet, JetSpace};
use crate::liealg::{bump_axis_nodes, TestForm, TestFormSpec};
use crate::poly::Polynomial;
use crate::quad::rules::gauss_legendre;
use crate::quad::{CSum, Estimate};
use crate::report::VerificationReport;

/// Highest total derivative order of a test function on `𝔤*`.
pub const MAX_DERIVATIVE_ORDER: u32 = 4;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ψ = Σ_t c_t ∂^{α_t}(P·b)` with `b(ξ) = exp(−1/(1−‖ξ−c‖²/r²))`.
#[derive(Debug, Clone)]
pub struct TestFunctionOnGStar {
    pub center: Vec<f64>,
    pub radius: f64,
    pub poly: Polynomial,
    terms: Vec<(Complex64, Vec<u32>)>,
    spaces: Arc<Vec<Arc<JetSpace>>>,
}

impl PartialEq for TestFunctionOnGStar {
    fn eq(&self, o: &Self) -> bool {
        self.center == o.center && self.radius == o.radius && self.poly == o.poly && self.terms == o.terms
    }
}

impl TestFunctionOnGStar {
    pub fn new(center: Vec<f64>, radius: f64, poly: Polynomial) -> Result<Self> {
        let base = TestForm::new(center, radius, poly)?;
        let k = base.dim();
        let spaces = (0..=MAX_DERIVATIVE_ORDER).map(|o| JetSpace::new(k, o)).collect();
        Ok(TestFunctionOnGStar {
            center: base.center,
            radius: base.radius,
            poly: base.poly,
            terms: vec![(c(1.0), vec![0; k])],
            spaces: Arc::new(spaces),
        })
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Result<Self> {
        let k = center.len();
        Self::new(center, radius, Polynomial::one(k))
    }

    pub fn from_spec(spec: &TestFormSpec) -> Result<Self> {
        let t = TestForm::from_spec(spec)?;
        Self::new(t.center, t.radius, t.poly)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn zero_like(&self) -> Self {
        TestFunctionOnGStar { terms: Vec::new(), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() || self.terms.iter().all(|t| t.0 == ZERO)
    }

    pub fn derivative_order(&self) -> u32 {
        self.terms.iter().map(|t| t.1.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TestFunctionOnGStar { terms: self.terms.iter().map(|(a, e)| (a * s, e.clone())).collect(), ..self.clone() }
    }

    /// `∂_{ξ_a}ψ` for the 0-based coordinate `a`.
    pub fn partial(&self, a: usize) -> Result<Self> {
        let mut l = vec![0.0; self.dim()];
        if a >= l.len() {
            return Err(Error::IndexOutOfRange { index: a + 1, max: l.len() });
        }
        l[a] = 1.0;
        self.directional(&l)
    }

    /// `Σ_b l_b ∂_bψ`.
    pub fn directional(&self, l: &[f64]) -> Result<Self> {
        check_dim(self.dim(), l.len())?;
        if self.derivative_order() + 1 > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "derivatives of ψ beyond order {MAX_DERIVATIVE_ORDER} are not available"
            )));
        }
        let mut acc: Vec<(Complex64, Vec<u32>)> = Vec::new();
        for (cf, e) in &self.terms {
            for (b, &lb) in l.iter().enumerate() {
                if lb == 0.0 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[b] += 1;
                match acc.iter_mut().find(|t| t.1 == e2) {
                    Some(t) => t.0 += cf * lb,
                    None => acc.push((cf * lb, e2)),
                }
            }
        }
        Ok(TestFunctionOnGStar { terms: acc, ..self.clone() })
    }

    fn inside(&self, xi: &[f64]) -> bool {
        let d2: f64 = xi.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 < self.radius * self.radius
    }

    /// Taylor jet of `P·b` at `ξ` (inside the support).
    fn jet(&self, xi: &[f64], order: u32) -> Jet {
        let space = &self.spaces[order as usize];
        let k = self.dim();
        let mut v = Jet::zero(space);
        for a in 0..k {
            let d = Jet::variable(space, a, xi[a]).add_scalar(c(-self.center[a]));
            v = v.add(&d.mul(&d));
        }
        let q = v.scale(c(-1.0 / (self.radius * self.radius))).add_scalar(c(1.0));
        let b = q.recip().scale(c(-1.0)).exp();
        Jet::from_polynomial(space, &self.poly, xi).mul(&b)
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if self.terms.is_empty() || !self.inside(xi) {
            return ZERO;
        }
        let ord = self.derivative_order();
        if ord == 0 {
            let d2: f64 = xi.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
            let q = 1.0 - d2 / (self.radius * self.radius);
            return self.terms[0].0 * self.poly.eval(xi) * (-1.0 / q).exp();
        }
        let j = self.jet(xi, ord);
        self.terms.iter().map(|(cf, e)| cf * j.derivative(e)).sum()
    }

    /// `[P(−i∂)ψ](ξ)`.
    pub fn apply_poly(&self, p: &Polynomial, xi: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), p.nvars())?;
        let ord = self.derivative_order() + p.degree();
        if ord > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "P(−i∂)ψ needs derivatives of order {ord} > {MAX_DERIVATIVE_ORDER}"
            )));
        }
        if self.terms.is_empty() || p.is_zero() || !self.inside(xi) {
            return Ok(ZERO);
        }
        let j = self.jet(xi, ord);
        let mut acc = ZERO;
        for (pe, pc) in p.terms() {
            let deg: u32 = pe.iter().sum();
            let f = (-I).powu(deg) * pc;
            for (cf, e) in &self.terms {
                let tot: Vec<u32> = pe.iter().zip(e).map(|(a, b)| a + b).collect();
                acc += f * cf * j.derivative(&tot);
            }
        }
        Ok(acc)
    }

    /// Upper bound of `‖ξ‖_{Q*}` over the support.
    pub fn dual_norm_bound(&self, m: &Manifold) -> f64 {
        let k = self.dim();
        let axis = (0..k)
            .map(|a| {
                let mut e = vec![0.0; k];
                e[a] = 1.0;
                m.algebra.norm_dual(&e)
            })
            .fold(0.0, f64::max);
        m.algebra.norm_dual(&self.center) + self.radius * axis * (k as f64).sqrt()
    }
}

/// `ψ̂` tabulated at Gauss–Legendre nodes of a box `[−L, L]^k` in `𝔤`,
/// with weights, so that `Σ_i w_i ψ̂(X_i) f(X_i) ≈ ∫ ψ̂ f dX`.
#[derive(Debug, Clone)]
pub struct FourierTable {
    pub k: usize,
    pub half_width: f64,
    pub psi_center: Vec<f64>,
    pub psi_radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

impl FourierTable {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.k..(i + 1) * self.k]
    }

    /// `Σ_i w_i ψ̂(X_i) q(X_i) P_j(X_i) e^{i⟨η,X_i⟩}` for each `P_j`.
    pub fn transform(&self, eta: &[f64], q: &Polynomial, polys: &[Polynomial]) -> Vec<Complex64> {
        let mut acc = vec![CSum::new(); polys.len()];
        for i in 0..self.len() {
            let x = self.node(i);
            let ph: f64 = x.iter().zip(eta).map(|(a, b)| a * b).sum();
            let base = self.values[i] * self.weights[i] * q.eval(x) * Complex64::new(0.0, ph).exp();
            for (j, p) in polys.iter().enumerate() {
                acc[j].add(base * p.eval(x));
            }
        }
        acc.iter().map(|s| s.value()).collect()
    }

    /// `Σ_i w_i ψ̂(X_i) f(X_i)`.
    pub fn pair(&self, f: &dyn Fn(&[f64]) -> Complex64) -> Complex64 {
        let mut acc = CSum::new();
        for i in 0..self.len() {
            acc.add(self.values[i] * self.weights[i] * f(self.node(i)));
        }
        acc.value()
    }
}

/// Budget on `(X nodes) × (ξ nodes)` for one table.
const TABLE_WORK_BUDGET: f64 = 4e9;

/// Inverse Fourier transform `ψ̂(X) = (2π)^{−k}∫ e^{−i⟨ξ,X⟩}ψ(ξ) dξ`,
/// tabulated twice for error estimates: the check table uses order 8 on a
/// shorter box, so its mismatch also sees the truncation of `X`.
#[derive(Debug, Clone)]
pub struct PsiHat {
    pub main: Arc<FourierTable>,
    pub check: Arc<FourierTable>,
    /// Relative Parseval mismatch of the main table.
    pub parseval_residual: f64,
}

/// Relative Parseval mismatch that triggers a resolution error.
pub const PARSEVAL_TOL: f64 = 1e-8;

impl PsiHat {
    /// `max_eta` bounds `|η_a|` for the phases `e^{i⟨η,X⟩}` the table is
    /// paired against.
    pub fn new(psi: &TestFunctionOnGStar, max_eta: f64) -> Result<Self> {
        let k = psi.dim();
        let r = psi.radius;
        // the bump transform decays like exp(-sqrt(r|X|)), so rL = 600 leaves ~1e-11;
        // round-off of X-weighted pairings grows like L^(deg+1), which caps L
        let l = 600.0 / r;
        // ψ is smooth with compact support, so the trapezoid rule in ξ is spectral;
        // spacing π/(2L) keeps the aliased copies of ψ̂ beyond 3L
        let n_xi = (4.0 * r * l / PI).ceil() as usize;
        let h = 2.0 * r / n_xi as f64;
        let axes: Vec<Vec<(f64, f64)>> = (0..k)
            .map(|a| (1..n_xi).map(|j| (psi.center[a] - r + j as f64 * h, h)).collect())
            .collect();
        let xi0 = psi.center[k - 1] - r + h;
        // rows over the leading k-1 axes; the last axis is summed by Horner in e^{-ihX}
        let rows: Vec<(Vec<f64>, Vec<Complex64>)> = tensor_nodes(&axes[..k - 1])
            .into_iter()
            .filter_map(|(x, w)| {
                let vals: Vec<Complex64> = axes[k - 1]
                    .iter()
                    .map(|&(xl, wl)| {
                        let mut y = x.clone();
                        y.push(xl);
                        psi.eval(&y) * (w * wl)
                    })
                    .collect();
                vals.iter().any(|v| *v != ZERO).then_some((x, vals))
            })
            .collect();
        let n_xi_nodes: usize = rows.iter().map(|r| r.1.len()).sum();
        let norm2: f64 =
            rows.iter().flat_map(|r| r.1.iter()).map(|v| v.norm_sqr()).sum::<f64>() / h.powi(k as i32) / (2.0 * PI).powi(k as i32);
        let omega: Vec<f64> = (0..k).map(|a| max_eta + psi.center[a].abs() + r).collect();
        let x_panels: Vec<usize> = omega.iter().map(|o| (2.0 * l * o / PI).ceil().max(8.0) as usize).collect();
        let n_main: f64 = x_panels.iter().map(|p| (p * 12) as f64).product();
        if n_main * 1.7 * n_xi_nodes as f64 > TABLE_WORK_BUDGET || n_main > 1e6 {
            return Err(Error::Capability(format!(
                "Fourier table for ψ on a {k}-dimensional algebra needs {n_main:.0} nodes; only small tables are supported"
            )));
        }
        let build = |order: usize, shrink: f64| -> FourierTable {
            let rule = gauss_legendre(order);
            let l = l * shrink;
            let axes: Vec<Vec<(f64, f64)>> = (0..k)
                .map(|a| panels_1d(-l, l, ((x_panels[a] as f64) * shrink).ceil() as usize, &rule))
                .collect();
            let nodes = tensor_nodes(&axes);
            let norm = (2.0 * PI).powi(-(k as i32));
            let values: Vec<Complex64> = nodes
                .par_iter()
                .map(|(x, _)| {
                    let xl = x[k - 1];
                    let z = Complex64::new(0.0, -h * xl).exp();
                    let mut acc = CSum::new();
                    for (pre, vals) in &rows {
                        let ph: f64 = pre.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + xi0 * xl;
                        let horner = vals.iter().rev().fold(ZERO, |a, v| a * z + v);
                        acc.add(horner * Complex64::new(0.0, -ph).exp());
                    }
                    acc.value() * norm
                })
                .collect();
            FourierTable {
                k,
                half_width: l,
                psi_center: psi.center.clone(),
                psi_radius: r,
                nodes: nodes.iter().flat_map(|(x, _)| x.clone()).collect(),
                weights: nodes.iter().map(|(_, w)| *w).collect(),
                values,
            }
        };
        let main = build(12, 1.0);
        let check = build(8, 0.8);
        let p2: f64 = (0..main.len()).map(|i| main.weights[i] * main.values[i].norm_sqr()).sum();
        let parseval_residual = if norm2 > 0.0 { (p2 - norm2).abs() / norm2 } else { p2 };
        if parseval_residual > PARSEVAL_TOL {
            return Err(Error::Resolution(format!(
                "Parseval mismatch {parseval_residual:e} for the tabulated transform of ψ"
            )));
        }
        Ok(PsiHat { main: Arc::new(main), check: Arc::new(check), parseval_residual })
    }

    /// Direct evaluation of `ψ̂(X)`.
    pub fn eval(psi: &TestFunctionOnGStar, x: &[f64]) -> Complex64 {
        let k = psi.dim();
        let r = psi.radius;
        let rule = gauss_legendre(12);
        let axes: Vec<Vec<(f64, f64)>> = (0..k)
            .map(|a| bump_axis_nodes(psi.center[a], r, x[a], 32, &rule, false))
            .collect();
        let mut acc = CSum::new();
        for (xi, w) in tensor_nodes(&axes) {
            let v = psi.eval(&xi);
            if v != ZERO {
                let ph: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
                acc.add(v * w * Complex64::new(0.0, -ph).exp());
            }
        }
        acc.value() * (2.0 * PI).powi(-(k as i32))
    }
}

fn panels_1d(lo: f64, hi: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let h = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.0.len());
    for p in 0..panels {
        let c = lo + (p as f64 + 0.5) * h;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            out.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn tensor_nodes(axes: &[Vec<(f64, f64)>]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for ax in axes {
        let mut next = Vec::with_capacity(out.len() * ax.len());
        for (x, w) in &out {
            for &(xa, wa) in ax {
                let mut y = x.clone();
                y.push(xa);
                next.push((y, w * wa));
            }
        }
        out = next;
    }
    out
}

/// Scalar distribution on `𝔤`.
pub trait DistributionOnG: Send + Sync {
    fn k(&self) -> usize;
    fn tempered(&self) -> bool {
        true
    }
    fn provenance(&self) -> String;
    fn pair(&self, phi: &TestForm) -> Result<Estimate>;
    /// `⟨D, q·φ_ψ⟩` for the tabulated transform `φ_ψ = ψ̂ dX`.
    fn pair_table(&self, table: &FourierTable, q: &Polynomial) -> Result<Estimate>;
}

/// `⟨D, φ⟩ = φ(X₀)`.
#[derive(Debug, Clone)]
pub struct PointEvaluation {
    pub x0: Vec<f64>,
}

impl DistributionOnG for PointEvaluation {
    fn k(&self) -> usize {
        self.x0.len()
    }
    fn provenance(&self) -> String {
        format!("point evaluation at {:?}", self.x0)
    }
    fn pair(&self, phi: &TestForm) -> Result<Estimate> {
        check_dim(self.k(), phi.dim())?;
        Ok(Estimate { value: phi.eval(&self.x0), ..Estimate::zero() })
    }
    fn pair_table(&self, _table: &FourierTable, _q: &Polynomial) -> Result<Estimate> {
        Err(Error::Capability("point evaluation pairs with ψ̂ only through direct evaluation".into()))
    }
}

/// `(α∧e^{isω̃})^{distrib}` as a scalar and form-valued distribution.
#[derive(Clone)]
pub struct AlphaExpDistribution {
    pub m: Arc<Manifold>,
    pub alpha: EquivariantForm,
    pub s: f64,
    pub spec: QuadratureSpec,
    pub policy: RPolicy,
}

pub fn alpha_exp_distribution(m: &Arc<Manifold>, alpha: &EquivariantForm, s: f64) -> Result<AlphaExpDistribution> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    check_dim(m.dim(), alpha.dim)?;
    check_dim(m.k(), alpha.k)?;
    Ok(AlphaExpDistribution {
        m: m.clone(),
        alpha: alpha.clone(),
        s,
        spec: QuadratureSpec::with_tol(1e-10),
        policy: RPolicy::default(),
    })
}

impl AlphaExpDistribution {
    fn polys(&self) -> Vec<Polynomial> {
        self.alpha.terms().iter().map(|(p, _)| p.clone()).collect()
    }

    /// Region outside which `Σ_j P_j(−i∂)ψ(sμ)` vanishes.
    fn table_region(&self, table: &FourierTable) -> Region {
        let k = table.k;
        let axis = (0..k)
            .map(|a| {
                let mut e = vec![0.0; k];
                e[a] = 1.0;
                self.m.algebra.norm_dual(&e)
            })
            .fold(0.0, f64::max);
        let bound = self.m.algebra.norm_dual(&table.psi_center) + table.psi_radius * axis * (k as f64).sqrt();
        truncation_region(&self.m, bound * (1.0 + 1e-9) / self.s)
    }
}

impl DistributionOnG for AlphaExpDistribution {
    fn k(&self) -> usize {
        self.m.k()
    }
    fn provenance(&self) -> String {
        format!("({}∧exp(i·{}·ω̃)) on {}", self.alpha.label, self.s, self.m.name)
    }
    fn pair(&self, phi: &TestForm) -> Result<Estimate> {
        let l = pair_distributional(&self.m, &self.alpha, self.s, phi, &self.policy, &self.spec)?;
        if l.verdict == LimitVerdict::Divergent {
            return Err(Error::Evaluation(format!("R-limit diverges for {}", self.provenance())));
        }
        Ok(Estimate { value: l.value, error: l.error_estimate, evals: 0, converged: l.converged })
    }
    fn pair_table(&self, table: &FourierTable, q: &Polynomial) -> Result<Estimate> {
        let f = self.form_pair_table(Arc::new(table.clone()), q)?;
        integrate_top(&self.m, &self.table_region(table), self.alpha.invariant, &self.spec, &|p| f(p).top())
    }
}

/// Form-valued distribution on `𝔤`.
pub trait FormDistributionOnG: Send + Sync {
    fn manifold(&self) -> &Arc<Manifold>;
    fn form_pair(&self, phi: &TestForm) -> Result<ChartForm>;
    fn form_pair_table(&self, table: Arc<FourierTable>, q: &Polynomial) -> Result<ChartForm>;
}

impl FormDistributionOnG for AlphaExpDistribution {
    fn manifold(&self) -> &Arc<Manifold> {
        &self.m
    }

    /// `Σ_j Φ_j(sμ(p))·(β_j∧e^{isω})(p)`.
    fn form_pair(&self, phi: &TestForm) -> Result<ChartForm> {
        check_dim(self.k(), phi.dim())?;
        let gf = GFourier::new(phi, self.polys(), self.spec.inner_panels, self.spec.inner_order);
        let me = self.clone();
        Ok(Arc::new(move |p: &[f64]| {
            let eta: Vec<f64> = me.m.moment(p).iter().map(|v| me.s * v).collect();
            combine(&me, p, &gf.eval(&eta))
        }))
    }

    fn form_pair_table(&self, table: Arc<FourierTable>, q: &Polynomial) -> Result<ChartForm> {
        check_dim(self.k(), table.k)?;
        let me = self.clone();
        let q = q.clone();
        let polys = self.polys();
        Ok(Arc::new(move |p: &[f64]| {
            let eta: Vec<f64> = me.m.moment(p).iter().map(|v| me.s * v).collect();
            combine(&me, p, &table.transform(&eta, &q, &polys))
        }))
    }
}

fn combine(d: &AlphaExpDistribution, p: &[f64], phis: &[Complex64]) -> Graded {
    let e = d.m.omega(p).scale(Complex64::new(0.0, d.s)).exp_even();
    let mut out = Graded::zero(p.len());
    for ((_, b), v) in d.alpha.terms().iter().zip(phis) {
        if *v != ZERO {
            out.add_scaled(&b(p).wedge(&e), *v);
        }
    }
    out
}

/// Validated change of basis of `𝔤`: columns are the new basis vectors.
fn basis_pair(k: usize, basis: Option<&DMatrix<f64>>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let a = basis.cloned().unwrap_or_else(|| DMatrix::identity(k, k));
    if a.nrows() != k || a.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: a.nrows() });
    }
    let inv = a.clone().try_inverse().ok_or_else(|| Error::InvalidParameter("basis matrix is singular".into()))?;
    Ok((a, inv))
}

/// `d⟨D,φ⟩ + Σ_a ι_{VF_{E'^a}}⟨D, X'_a φ⟩` in the basis given by the columns
/// of `basis` (standard basis if `None`).
pub struct DgDistributional {
    pub inner: Arc<dyn FormDistributionOnG>,
    pub basis: Option<DMatrix<f64>>,
}

impl FormDistributionOnG for DgDistributional {
    fn manifold(&self) -> &Arc<Manifold> {
        self.inner.manifold()
    }

    fn form_pair(&self, phi: &TestForm) -> Result<ChartForm> {
        let m = self.manifold().clone();
        let (a, inv) = basis_pair(m.k(), self.basis.as_ref())?;
        let base = self.inner.form_pair(phi)?;
        let mut parts = Vec::new();
        for i in 0..m.k() {
            let row: Vec<f64> = (0..m.k()).map(|b| inv[(i, b)]).collect();
            let phi_i = TestForm { poly: phi.poly.mul_linear(&row), ..phi.clone() };
            let col: Vec<f64> = a.column(i).iter().copied().collect();
            parts.push((col, self.inner.form_pair(&phi_i)?));
        }
        Ok(assemble(m, base, parts, c(1.0)))
    }

    fn form_pair_table(&self, table: Arc<FourierTable>, q: &Polynomial) -> Result<ChartForm> {
        let m = self.manifold().clone();
        let (a, inv) = basis_pair(m.k(), self.basis.as_ref())?;
        let base = self.inner.form_pair_table(table.clone(), q)?;
        let mut parts = Vec::new();
        for i in 0..m.k() {
            let row: Vec<f64> = (0..m.k()).map(|b| inv[(i, b)]).collect();
            let col: Vec<f64> = a.column(i).iter().copied().collect();
            parts.push((col, self.inner.form_pair_table(table.clone(), &q.mul_linear(&row))?));
        }
        Ok(assemble(m, base, parts, c(1.0)))
    }
}

/// `d(base) + factor·Σ_a ι_{VF_{x_a}}(part_a)`.
fn assemble(m: Arc<Manifold>, base: ChartForm, parts: Vec<(Vec<f64>, ChartForm)>, factor: Complex64) -> ChartForm {
    Arc::new(move |p: &[f64]| {
        let mut out = exterior_derivative(&m, &|q: &[f64]| base(q), p);
        for (x, f) in &parts {
            let vf = m.vector_field(x, p);
            out.add_scaled(&f(p).contract(&vf), factor);
        }
        out
    })
}

pub fn apply_dg_distributional(
    d: &Arc<dyn FormDistributionOnG>,
    phi: &TestForm,
    basis: Option<&DMatrix<f64>>,
) -> Result<ChartForm> {
    DgDistributional { inner: d.clone(), basis: basis.cloned() }.form_pair(phi)
}

/// Scalar distribution on `𝔤*`.
pub trait DistributionOnGStar: Send + Sync {
    /// Form-valued pairings vanish outside `μ⁻¹(supp ψ)` (up to scaling).
    fn compact_gstar_mean(&self) -> bool;
    fn pair(&self, psi: &TestFunctionOnGStar) -> Result<Estimate>;
}

/// Form-valued distribution on `𝔤*`.
pub trait FormDistributionOnGStar: Send + Sync {
    fn manifold(&self) -> &Arc<Manifold>;
    fn form_pair(&self, psi: &TestFunctionOnGStar) -> Result<ChartForm>;
}

/// `ℱ(α∧e^{isω̃})` realized pointwise: `Σ_j (β_j∧e^{isω})·[P_j(−i∂)ψ](sμ)`.
#[derive(Clone)]
pub struct ParadanForm {
    pub m: Arc<Manifold>,
    pub alpha: EquivariantForm,
    pub s: f64,
    pub spec: QuadratureSpec,
}

impl ParadanForm {
    pub fn new(m: &Arc<Manifold>, alpha: &EquivariantForm, s: f64) -> Result<Self> {
        let d = alpha_exp_distribution(m, alpha, s)?;
        Ok(ParadanForm { m: d.m, alpha: d.alpha, s, spec: d.spec })
    }

    fn check_capability(&self, psi: &TestFunctionOnGStar) -> Result<()> {
        check_dim(self.m.k(), psi.dim())?;
        let need = psi.derivative_order() + self.alpha.degree();
        if need > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "α has polynomial degree {} and ψ derivative order {}; exact derivatives stop at {MAX_DERIVATIVE_ORDER}",
                self.alpha.degree(),
                psi.derivative_order()
            )));
        }
        Ok(())
    }

    /// Region containing `μ⁻¹(supp ψ / s)`.
    pub fn support_region(&self, psi: &TestFunctionOnGStar) -> Region {
        truncation_region(&self.m, psi.dual_norm_bound(&self.m) * (1.0 + 1e-9) / self.s)
    }
}

impl FormDistributionOnGStar for ParadanForm {
    fn manifold(&self) -> &Arc<Manifold> {
        &self.m
    }

    fn form_pair(&self, psi: &TestFunctionOnGStar) -> Result<ChartForm> {
        self.check_capability(psi)?;
        let me = self.clone();
        let psi = psi.clone();
        Ok(Arc::new(move |p: &[f64]| {
            let eta: Vec<f64> = me.m.moment(p).iter().map(|v| me.s * v).collect();
            let e = me.m.omega(p).scale(Complex64::new(0.0, me.s)).exp_even();
            let mut out = Graded::zero(p.len());
            for (poly, b) in me.alpha.terms() {
                let v = psi.apply_poly(poly, &eta).unwrap_or(ZERO);
                if v != ZERO {
                    out.add_scaled(&b(p).wedge(&e), v);
                }
            }
            out
        }))
    }
}

impl DistributionOnGStar for ParadanForm {
    fn compact_gstar_mean(&self) -> bool {
        true
    }
    fn pair(&self, psi: &TestFunctionOnGStar) -> Result<Estimate> {
        let f = self.form_pair(psi)?;
        integrate_top(&self.m, &self.support_region(psi), self.alpha.invariant, &self.spec, &|p| f(p).top())
    }
}

/// `ℱD` for a form-valued distribution on `𝔤`, paired through tabulated
/// transforms. Tables are cached per test function.
pub struct FourierOfForm {
    pub inner: Arc<dyn FormDistributionOnG>,
    /// Use the lower-order companion table (for error estimates).
    pub use_check: bool,
    cache: Mutex<HashMap<String, Arc<PsiHat>>>,
}

impl FourierOfForm {
    pub fn new(inner: Arc<dyn FormDistributionOnG>, use_check: bool) -> Self {
        FourierOfForm { inner, use_check, cache: Mutex::new(HashMap::new()) }
    }

    pub fn table(&self, psi: &TestFunctionOnGStar) -> Result<Arc<PsiHat>> {
        let key = format!("{:?}|{:?}|{:?}|{:?}", psi.center, psi.radius, psi.poly, psi.terms);
        if let Some(t) = self.cache.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let m = self.inner.manifold();
        let max_eta = psi.dual_norm_bound(m).max(psi.center.iter().fold(0.0f64, |a, c| a.max(c.abs())) + psi.radius) * 1.5;
        let t = Arc::new(PsiHat::new(psi, max_eta)?);
        self.cache.lock().unwrap().insert(key, t.clone());
        Ok(t)
    }
}

impl FormDistributionOnGStar for FourierOfForm {
    fn manifold(&self) -> &Arc<Manifold> {
        self.inner.manifold()
    }
    fn form_pair(&self, psi: &TestFunctionOnGStar) -> Result<ChartForm> {
        let t = self.table(psi)?;
        let table = if self.use_check { t.check.clone() } else { t.main.clone() };
        self.inner.form_pair_table(table, &Polynomial::one(psi.dim()))
    }
}

/// `d⟨B,ψ⟩ − i Σ_a ι_{VF_{E'^a}}⟨B, ∂_{E'_a}ψ⟩`.
pub struct DgHat {
    pub inner: Arc<dyn FormDistributionOnGStar>,
    pub basis: Option<DMatrix<f64>>,
}

impl FormDistributionOnGStar for DgHat {
    fn manifold(&self) -> &Arc<Manifold> {
        self.inner.manifold()
    }
    fn form_pair(&self, psi: &TestFunctionOnGStar) -> Result<ChartForm> {
        let m = self.manifold().clone();
        let (a, inv) = basis_pair(m.k(), self.basis.as_ref())?;
        let base = self.inner.form_pair(psi)?;
        let mut parts = Vec::new();
        for i in 0..m.k() {
            // ∂_{E'_i} = Σ_b (A⁻¹)_{ib} ∂_b
            let row: Vec<f64> = (0..m.k()).map(|b| inv[(i, b)]).collect();
            let col: Vec<f64> = a.column(i).iter().copied().collect();
            parts.push((col, self.inner.form_pair(&psi.directional(&row)?)?));
        }
        Ok(assemble(m, base, parts, -I))
    }
}

pub fn apply_dg_hat(
    b: &Arc<dyn FormDistributionOnGStar>,
    psi: &TestFunctionOnGStar,
    basis: Option<&DMatrix<f64>>,
) -> Result<ChartForm> {
    DgHat { inner: b.clone(), basis: basis.cloned() }.form_pair(psi)
}

/// `⟨ℱD, ψ⟩ := ⟨D, φ_ψ⟩`, with the error estimated from the companion table.
pub fn fourier_pair(d: &dyn DistributionOnG, psi: &TestFunctionOnGStar, max_eta: f64) -> Result<Estimate> {
    check_dim(d.k(), psi.dim())?;
    if !d.tempered() {
        return Err(Error::Precondition(format!("{} is not tempered", d.provenance())));
    }
    if psi.is_zero() {
        return Ok(Estimate::zero());
    }
    let t = PsiHat::new(psi, max_eta)?;
    let one = Polynomial::one(psi.dim());
    let mut a = d.pair_table(&t.main, &one)?;
    let b = d.pair_table(&t.check, &one)?;
    a.error += (a.value - b.value).norm();
    Ok(a)
}

/// `∫_M Σ_j (β_j∧e^{iω})·[P_j(−i∂)ψ](μ)`.
pub fn paradan_pushforward(m: &Arc<Manifold>, alpha: &EquivariantForm, psi: &TestFunctionOnGStar) -> Result<Estimate> {
    ParadanForm::new(m, alpha, 1.0)?.pair(psi)
}

/// `∫_M d̂_𝔤 ℱ(α∧e^{iω̃})` paired with `ψ`, and the support of the
/// Paradan form checked at `n_samples` points outside `μ⁻¹(supp ψ)`.
pub fn check_lemma_2_11(
    m: &Arc<Manifold>,
    alpha: &EquivariantForm,
    psi: &TestFunctionOnGStar,
    n_samples: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let b = ParadanForm::new(m, alpha, 1.0)?;
    let region = b.support_region(psi);
    let bb: Arc<dyn FormDistributionOnGStar> = Arc::new(b.clone());
    let f = apply_dg_hat(&bb, psi, None)?;
    let spec = QuadratureSpec { target_rel_tol: 1e-10, abs_tol: 1e-11, ..Default::default() };
    let e = integrate_top(m, &region, alpha.invariant, &spec, &|p| f(p).top())?;
    let mut rep = VerificationReport::new(format!("distributional Stokes on {}", m.name));
    rep.check("|∫ d̂ B(ψ)|", e.value.norm(), tol, Some(format!("value {} ± {:e}", e.value, e.error)));
    let bound = psi.dual_norm_bound(m);
    let outer = if m.compact { Region::Whole } else { Region::Sublevel(4.0 * bound.max(1.0)) };
    let pts = m.sample_points(n_samples * 4, &outer, 1e-3, 7)?;
    let form = b.form_pair(psi)?;
    let mut tested = 0;
    let mut worst = 0.0f64;
    for p in pts.iter().filter(|p| m.algebra.norm_dual(&m.moment(p)) > bound * (1.0 + 1e-9)).take(n_samples) {
        tested += 1;
        worst = worst.max(form(p).max_abs());
    }
    if tested == 0 {
        rep.note("no sample points outside μ⁻¹(supp ψ); support check vacuous");
    } else {
        rep.check(format!("Paradan form outside μ⁻¹(supp ψ) ({tested} points)"), worst, 0.0, None);
    }
    Ok(rep)
}

/// Floor for comparisons whose quadrature error estimates reach round-off.
fn roundoff_floor(scale: f64) -> f64 {
    1e-12 * scale.max(1.0)
}

/// Pointwise Paradan identity at `n_points`: degree-0 part of
/// `∫_𝔤 α(X)e^{iω̃(X)}ψ̂(X)dX` against `[α(−i∂)ψ](μ)`.
pub fn paradan_pointwise_check(
    m: &Arc<Manifold>,
    alpha: &EquivariantForm,
    psi: &TestFunctionOnGStar,
    n_points: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let d = alpha_exp_distribution(m, alpha, 1.0)?;
    let b = ParadanForm::new(m, alpha, 1.0)?;
    let fo = FourierOfForm::new(Arc::new(d.clone()), false);
    let t = fo.table(psi)?;
    let one = Polynomial::one(psi.dim());
    let lhs = d.form_pair_table(t.main.clone(), &one)?;
    let lhs_chk = d.form_pair_table(t.check.clone(), &one)?;
    let rhs = b.form_pair(psi)?;
    let region = b.support_region(psi);
    let pts = m.sample_points(n_points, &region, 1e-3, seed)?;
    let mut rep = VerificationReport::new(format!("Paradan identity on {}", m.name));
    let mut worst_ratio = 0.0f64;
    let mut worst = String::new();
    for p in &pts {
        let l = lhs(p).scalar_part();
        let err = (l - lhs_chk(p).scalar_part()).norm();
        let r = rhs(p).scalar_part();
        let bound = 10.0 * err + roundoff_floor(r.norm());
        let ratio = (l - r).norm() / bound;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = format!("p={p:?}: lhs {l}, rhs {r}, err {err:e}");
        }
    }
    rep.check(format!("max |lhs−rhs| / (10·err) over {} points", pts.len()), worst_ratio, 1.0, Some(worst));
    rep.note(format!("Parseval residual {:e}", t.parseval_residual));
    Ok(rep)
}

/// `ℱ∘d_𝔤` against `d̂_𝔤∘ℱ` at `n_points`, for `D = α∧e^{iω̃}`.
pub fn commuting_diagram_check(
    m: &Arc<Manifold>,
    alpha: &EquivariantForm,
    psi: &TestFunctionOnGStar,
    n_points: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let d: Arc<dyn FormDistributionOnG> = Arc::new(alpha_exp_distribution(m, alpha, 1.0)?);
    let dg = DgDistributional { inner: d.clone(), basis: None };
    let f_main = Arc::new(FourierOfForm::new(d.clone(), false));
    let f_chk = Arc::new(FourierOfForm::new(d.clone(), true));
    let t = f_main.table(psi)?;
    let one = Polynomial::one(psi.dim());
    let lhs = dg.form_pair_table(t.main.clone(), &one)?;
    let lhs_chk = dg.form_pair_table(t.check.clone(), &one)?;
    let fm: Arc<dyn FormDistributionOnGStar> = f_main.clone();
    let fc: Arc<dyn FormDistributionOnGStar> = f_chk;
    let rhs = apply_dg_hat(&fm, psi, None)?;
    let rhs_chk = apply_dg_hat(&fc, psi, None)?;
    let region = ParadanForm::new(m, alpha, 1.0)?.support_region(psi);
    let pts = m.sample_points(n_points, &region, 1e-3, seed)?;
    let mut rep = VerificationReport::new(format!("Fourier chain map on {}", m.name));
    let mut worst_ratio = 0.0f64;
    let mut worst = String::new();
    for p in &pts {
        let (l, lc, r, rc) = (lhs(p), lhs_chk(p), rhs(p), rhs_chk(p));
        let err = l.sub(&lc).max_abs() + r.sub(&rc).max_abs();
        let diff = l.sub(&r).max_abs();
        let bound = 10.0 * err + roundoff_floor(l.max_abs());
        let ratio = diff / bound;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst = format!("p={p:?}: |Δ| {diff:e}, err {err:e}");
        }
    }
    rep.check(format!("max |ℱd−d̂ℱ| / bound over {} points", pts.len()), worst_ratio, 1.0, Some(worst));
    Ok(rep)
}

/// Invertible, non-orthogonal change of basis of `ℝᵏ` used by the basis
/// independence checks.
pub fn skewed_basis(k: usize) -> DMatrix<f64> {
    if k == 1 {
        return DMatrix::from_element(1, 1, -2.5);
    }
    DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0 + 0.5 * i as f64
        } else if j == i + 1 {
            0.3
        } else if i == j + 1 {
            -0.7
        } else {
            0.0
        }
    })
}

/// Both twisted differentials evaluated in the standard basis and in
/// `basis`, compared at `n_points` sample points.
pub fn basis_independence_check(
    m: &Arc<Manifold>,
    alpha: &EquivariantForm,
    phi: &TestForm,
    psi: &TestFunctionOnGStar,
    basis: &DMatrix<f64>,
    n_points: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let d: Arc<dyn FormDistributionOnG> = Arc::new(alpha_exp_distribution(m, alpha, 1.0)?);
    let f = apply_dg_distributional(&d, phi, None)?;
    let g = apply_dg_distributional(&d, phi, Some(basis))?;
    let b: Arc<dyn FormDistributionOnGStar> = Arc::new(ParadanForm::new(m, alpha, 1.0)?);
    let fh = apply_dg_hat(&b, psi, None)?;
    let gh = apply_dg_hat(&b, psi, Some(basis))?;
    let pts = m.sample_points(n_points, &m.sampling_region(), 1e-3, 11)?;
    let mut rep = VerificationReport::new(format!("basis independence on {}", m.name));
    let (mut a, mut c) = (0.0f64, 0.0f64);
    for p in &pts {
        a = a.max(f(p).sub(&g(p)).max_abs());
        c = c.max(fh(p).sub(&gh(p)).max_abs());
    }
    rep.check(format!("d_g on 𝔤, {} points", pts.len()), a, tol, None);
    rep.check(format!("d_g on 𝔤*, {} points", pts.len()), c, tol, None);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqforms::{form_angular, form_one, omega_tilde, twisted_differential};
    use crate::geometry::{catalog_complex_space, catalog_sphere};
    use crate::integrate::{dh_pushforward, HistogramGrid};
    use crate::liealg::Weight;
    use proptest::prelude::*;

    fn sphere() -> Arc<Manifold> {
        Arc::new(catalog_sphere(1.0).unwrap())
    }

    fn line() -> Arc<Manifold> {
        Arc::new(catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap())
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let psi = TestFunctionOnGStar::new(vec![0.2, -0.1], 0.7, Polynomial::coordinate(2, 0).add(&Polynomial::one(2)))
            .unwrap();
        let x = [0.35, 0.05];
        for a in 0..2 {
            let d = psi.partial(a).unwrap();
            let mut errs = Vec::new();
            for h in [1e-3, 5e-4] {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                let fd = (psi.eval(&xp) - psi.eval(&xm)) / (2.0 * h);
                errs.push((fd - d.eval(&x)).norm());
            }
            // O(h²): halving h quarters the error
            assert!(errs[1] < 0.3 * errs[0] + 1e-12, "{errs:?}");
        }
        let mut d = psi.clone();
        for _ in 0..4 {
            d = d.partial(0).unwrap();
        }
        assert!(matches!(d.partial(1), Err(Error::Capability(_))));
    }

    #[test]
    fn psi_hat_matches_direct_transform_and_parseval() {
        let psi = TestFunctionOnGStar::bump(vec![0.5], 0.4).unwrap();
        let t = PsiHat::new(&psi, 2.0).unwrap();
        assert!(t.parseval_residual < PARSEVAL_TOL);
        for i in [0, t.main.len() / 3, t.main.len() / 2] {
            let x = t.main.node(i).to_vec();
            assert!((PsiHat::eval(&psi, &x) - t.main.values[i]).norm() < 1e-14);
        }
        // inversion: Σ w ψ̂(X) e^{iηX} = ψ(η)
        for eta in [0.3, 0.5, 0.77] {
            let v = t.main.transform(&[eta], &Polynomial::one(1), &[Polynomial::one(1)])[0];
            assert!((v - psi.eval(&[eta])).norm() < 1e-10, "{v} vs {}", psi.eval(&[eta]));
        }
    }

    #[test]
    fn point_evaluation_transform() {
        let psi = TestFunctionOnGStar::bump(vec![0.5], 0.4).unwrap();
        let d = PointEvaluation { x0: vec![1.3] };
        let phi = TestForm::bump(vec![1.0], 0.5).unwrap();
        assert_eq!(d.pair(&phi).unwrap().value, phi.eval(&[1.3]));
        // (2π)^{-1} ∫ ψ e^{-iξX₀} by an independent midpoint sum
        let n = 200_000;
        let h = 0.8 / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let xi = 0.1 + (j as f64 + 0.5) * h;
            acc += psi.eval(&[xi]) * Complex64::new(0.0, -xi * 1.3).exp() * h;
        }
        acc /= 2.0 * PI;
        assert!((PsiHat::eval(&psi, &[1.3]) - acc).norm() < 1e-9);
    }

    #[test]
    fn alpha_exp_pairing_is_linear_and_zero_on_zero() {
        let m = sphere();
        let d = alpha_exp_distribution(&m, &form_one(&m), 1.0).unwrap();
        let p1 = TestForm::new(vec![1.0], 0.3, Polynomial::one(1)).unwrap();
        let p2 = TestForm::new(vec![1.0], 0.3, Polynomial::coordinate(1, 0)).unwrap();
        let p12 = TestForm::new(vec![1.0], 0.3, Polynomial::one(1).add(&Polynomial::coordinate(1, 0))).unwrap();
        let (a, b, ab) = (d.pair(&p1).unwrap(), d.pair(&p2).unwrap(), d.pair(&p12).unwrap());
        assert!((a.value + b.value - ab.value).norm() < 1e-10);
        assert_eq!(d.pair(&p1.zero_like()).unwrap().value, Complex64::new(0.0, 0.0));
        assert!(alpha_exp_distribution(&m, &form_one(&m), 0.0).is_err());
    }

    #[test]
    fn dg_of_closed_distribution_vanishes_and_is_basis_independent() {
        let m = Arc::new(
            catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![1, 1])]).unwrap(),
        );
        let d: Arc<dyn FormDistributionOnG> = Arc::new(alpha_exp_distribution(&m, &form_one(&m), 1.0).unwrap());
        let phi = TestForm::bump(vec![1.0, 0.5], 0.4).unwrap();
        let f = apply_dg_distributional(&d, &phi, None).unwrap();
        let rot = DMatrix::from_row_slice(2, 2, &[0.8, -0.6, 0.6, 0.8]);
        let g = apply_dg_distributional(&d, &phi, Some(&rot)).unwrap();
        for p in m.sample_points(5, &Region::Sublevel(1.5), 0.05, 3).unwrap() {
            let a = f(&p);
            assert!(a.max_abs() < 1e-6, "{}", a.max_abs());
            assert!(a.sub(&g(&p)).max_abs() < 1e-8);
        }
        let z = apply_dg_distributional(&d, &phi.zero_like(), None).unwrap();
        assert_eq!(z(&[0.3, 1.0, 0.2, 2.0]).max_abs(), 0.0);
    }

    #[test]
    fn dg_hat_basis_independence_and_square() {
        let m = line();
        let b: Arc<dyn FormDistributionOnGStar> =
            Arc::new(ParadanForm::new(&m, &form_angular(&m, 1, &[0.0, 1.0]).unwrap(), 1.0).unwrap());
        let psi = TestFunctionOnGStar::bump(vec![1.0], 0.5).unwrap();
        let f = apply_dg_hat(&b, &psi, None).unwrap();
        let g = apply_dg_hat(&b, &psi, Some(&DMatrix::from_element(1, 1, -2.5))).unwrap();
        let inner: Arc<dyn FormDistributionOnGStar> = Arc::new(DgHat { inner: b.clone(), basis: None });
        let sq = apply_dg_hat(&inner, &psi, None).unwrap();
        for p in m.sample_points(8, &Region::Sublevel(1.4), 0.05, 5).unwrap() {
            assert!(f(&p).sub(&g(&p)).max_abs() < 1e-8);
            assert!(sq(&p).max_abs() < 1e-4, "{}", sq(&p).max_abs());
        }
        let z = apply_dg_hat(&b, &psi.zero_like(), None).unwrap();
        assert_eq!(z(&[1.0, 0.5]).max_abs(), 0.0);
    }

    #[test]
    fn basis_check_on_sphere() {
        let m = sphere();
        let alpha = form_angular(&m, 0, &[1.0, 0.0, -1.0]).unwrap();
        let phi = TestForm::bump(vec![1.0], 0.4).unwrap();
        let psi = TestFunctionOnGStar::bump(vec![0.2], 0.5).unwrap();
        let rep = basis_independence_check(&m, &alpha, &phi, &psi, &skewed_basis(1), 6, 1e-8).unwrap();
        assert!(rep.passed, "{}", rep.summary());
        assert!(skewed_basis(3).try_inverse().is_some());
    }

    #[test]
    fn lemma_on_sphere_and_line() {
        let s2 = sphere();
        let psi = TestFunctionOnGStar::bump(vec![0.3], 0.5).unwrap();
        let alpha = form_angular(&s2, 0, &[1.0, 0.0, -1.0]).unwrap();
        let rep = check_lemma_2_11(&s2, &alpha, &psi, 20, 1e-5).unwrap();
        assert!(rep.passed, "{}", rep.summary());
        let c = line();
        let alpha = form_angular(&c, 1, &[0.0, 1.0]).unwrap();
        let rep = check_lemma_2_11(&c, &alpha, &TestFunctionOnGStar::bump(vec![1.0], 0.6).unwrap(), 20, 1e-4).unwrap();
        assert!(rep.passed, "{}", rep.summary());
    }

    #[test]
    fn paradan_identity_and_chain_map_on_sphere() {
        let m = sphere();
        let psi = TestFunctionOnGStar::bump(vec![0.2], 0.5).unwrap();
        let alpha = form_one(&m).mul_poly(&Polynomial::coordinate(1, 0));
        let rep = paradan_pointwise_check(&m, &alpha, &psi, 30, 1).unwrap();
        assert!(rep.passed, "{}", rep.summary());
        let beta = form_angular(&m, 0, &[1.0, 0.0, -1.0]).unwrap();
        let rep = commuting_diagram_check(&m, &beta, &psi, 10, 2).unwrap();
        assert!(rep.passed, "{}", rep.summary());
    }

    #[test]
    fn paradan_pushforward_trivial_cases() {
        let m = sphere();
        let far = TestFunctionOnGStar::bump(vec![3.0], 0.5).unwrap();
        assert_eq!(paradan_pushforward(&m, &form_one(&m), &far).unwrap().value, Complex64::new(0.0, 0.0));
        // α = 1: ∫ iω ψ(μ) = i·2π∫ψ over [−1,1]
        let psi = TestFunctionOnGStar::bump(vec![0.1], 0.5).unwrap();
        let v = paradan_pushforward(&m, &form_one(&m), &psi).unwrap();
        let oracle = Complex64::new(0.0, 2.0 * PI * 0.5 * crate::liealg::BUMP_INTEGRAL);
        assert!((v.value - oracle).norm() < 1e-9, "{} vs {oracle}", v.value);
    }

    #[test]
    fn fourier_pair_reproduces_dh_measure() {
        let m = sphere();
        let wt = omega_tilde(&m, 1.0).unwrap();
        let _ = twisted_differential(&m, &wt).unwrap();
        let d = alpha_exp_distribution(&m, &form_one(&m), 1.0).unwrap();
        let psi = TestFunctionOnGStar::bump(vec![0.3], 0.5).unwrap();
        let f = fourier_pair(&d, &psi, 2.0).unwrap();
        let h = dh_pushforward(&m, 2.0, &HistogramGrid::uniform_1d(-1.0, 1.0, 10), 20_000, 5).unwrap();
        let (mc, se) = h.pair_function(&|xi| psi.eval(xi));
        let v = f.value / Complex64::new(0.0, 1.0);
        assert!((v - mc).norm() <= 3.0 * se + 1e-9, "{v} vs {mc} ± {se}");
        assert_eq!(fourier_pair(&d, &psi.zero_like(), 2.0).unwrap().value, Complex64::new(0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn partials_commute(x in -0.3f64..0.3, y in -0.3f64..0.3) {
            let psi = TestFunctionOnGStar::bump(vec![0.0, 0.0], 0.5).unwrap();
            let a = psi.partial(0).unwrap().partial(1).unwrap().eval(&[x, y]);
            let b = psi.partial(1).unwrap().partial(0).unwrap().eval(&[x, y]);
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12));
        }
    }
}
