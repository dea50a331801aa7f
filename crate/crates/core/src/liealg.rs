//! Torus Lie algebras `𝔤 ≅ ℝᵏ`, their duals, integral weights, smooth
//! compactly supported test forms on `𝔤`, and strong regularity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Manifold;
use crate::poly::{MonomialSpec, Polynomial};

/// Relative tolerance below which a weight pairing counts as vanishing.
pub const TAU_REG: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusAlgebra {
    pub dim: usize,
    pub basis_labels: Vec<String>,
    pub inner_product_dual: DMatrix<f64>,
}

impl TorusAlgebra {
    /// `ℝᵏ` with the identity inner product on the dual.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "torus dimension must be positive");
        TorusAlgebra {
            dim,
            basis_labels: (1..=dim).map(|i| format!("E{i}")).collect(),
            inner_product_dual: DMatrix::identity(dim, dim),
        }
    }

    pub fn with_inner_product(dim: usize, q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != dim || q.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: q.nrows() });
        }
        let asym = (&q - q.transpose()).abs().max();
        if asym > 1e-12 * q.abs().max().max(1.0) {
            return Err(Error::InvalidParameter("inner product on 𝔤* is not symmetric".into()));
        }
        if q.clone().cholesky().is_none() {
            return Err(Error::InvalidParameter("inner product on 𝔤* is not positive definite".into()));
        }
        let mut a = Self::new(dim);
        a.inner_product_dual = q;
        Ok(a)
    }

    /// Direct sum `𝔤₁ ⊕ 𝔤₂` with block-diagonal inner product.
    pub fn direct_sum(parts: &[&TorusAlgebra]) -> Self {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut q = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            q.view_mut((off, off), (p.dim, p.dim)).copy_from(&p.inner_product_dual);
            off += p.dim;
        }
        TorusAlgebra {
            dim,
            basis_labels: (1..=dim).map(|i| format!("E{i}")).collect(),
            inner_product_dual: q,
        }
    }

    /// `‖ξ‖_{𝔤*}`.
    pub fn norm_dual(&self, xi: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                s += xi[a] * self.inner_product_dual[(a, b)] * xi[b];
            }
        }
        s.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraVector {
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub coords: Vec<f64>,
}

impl AlgebraVector {
    pub fn new(coords: Vec<f64>) -> Self {
        AlgebraVector { coords }
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
    pub fn scaled(&self, c: f64) -> Self {
        AlgebraVector { coords: self.coords.iter().map(|x| c * x).collect() }
    }
}

impl Covector {
    pub fn new(coords: Vec<f64>) -> Self {
        Covector { coords }
    }
}

impl AsRef<[f64]> for AlgebraVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

impl AsRef<[f64]> for Covector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// Integral linear form `λ(X) = Σ coeffs_a X_a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weight {
    pub coeffs: Vec<i64>,
}

impl Weight {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Weight { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn apply(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(&c, &x)| c as f64 * x).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64).collect()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
    }

    pub fn neg(&self) -> Weight {
        Weight { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        Weight { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    /// Pad with zeros on both sides to embed into a direct sum.
    pub fn embed(&self, before: usize, after: usize) -> Weight {
        let mut c = vec![0; before];
        c.extend_from_slice(&self.coeffs);
        c.extend(std::iter::repeat(0).take(after));
        Weight { coeffs: c }
    }
}

/// `⟨ξ, X⟩ = Σ_a ξ_a X_a`.
pub fn pair(xi: &Covector, x: &AlgebraVector) -> Result<f64> {
    check_dim(xi.coords.len(), x.coords.len())?;
    Ok(xi.coords.iter().zip(&x.coords).map(|(a, b)| a * b).sum())
}

/// Standard bump profile `exp(−1/(1−u²))` on `|u| < 1`, zero elsewhere.
pub fn bump(u: f64) -> f64 {
    let q = 1.0 - u * u;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

/// `∫_{-1}^{1} exp(−1/(1−u²)) du`.
pub const BUMP_INTEGRAL: f64 = 0.443_993_816_168_079_4;

/// Compactly supported top-degree form on `𝔤`, given by its density against
/// `dX₁∧…∧dXₖ`: `P(X)·b(‖X−c‖/r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestForm {
    pub center: Vec<f64>,
    pub radius: f64,
    pub poly: Polynomial,
}

/// Config record shared by test forms on `𝔤` and test functions on `𝔤*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFormSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default)]
    pub poly: Vec<MonomialSpec>,
    #[serde(default)]
    pub dual: bool,
}

impl TestForm {
    pub fn new(center: Vec<f64>, radius: f64, poly: Polynomial) -> Result<Self> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::InvalidParameter(format!("test form radius must be positive, got {radius}")));
        }
        check_dim(center.len(), poly.nvars())?;
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("test form center must be finite".into()));
        }
        Ok(TestForm { center, radius, poly })
    }

    /// Plain bump with multiplier 1.
    pub fn bump(center: Vec<f64>, radius: f64) -> Result<Self> {
        let k = center.len();
        Self::new(center, radius, Polynomial::one(k))
    }

    pub fn from_spec(spec: &TestFormSpec) -> Result<Self> {
        let k = spec.center.len();
        let poly = if spec.poly.is_empty() {
            Polynomial::one(k)
        } else {
            Polynomial::from_specs(k, &spec.poly).map_err(Error::Config)?
        };
        Self::new(spec.center.clone(), spec.radius, poly)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn zero_like(&self) -> Self {
        TestForm { center: self.center.clone(), radius: self.radius, poly: Polynomial::zero(self.dim()) }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let u2 = d2 / (self.radius * self.radius);
        if u2 >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b = (-1.0 / (1.0 - u2)).exp();
        self.poly.eval(x) * b
    }

    /// Axis-aligned box containing the support.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.center.iter().map(|c| c - self.radius).collect(),
            self.center.iter().map(|c| c + self.radius).collect(),
        )
    }

    pub fn scaled_poly(&self, s: Complex64) -> Self {
        TestForm { center: self.center.clone(), radius: self.radius, poly: self.poly.scale(s) }
    }
}

/// Quadrature nodes along one axis of the support box of a bump of radius
/// `r` centred at `c`, resolving oscillations `e^{iωx}` up to `|ω| ≤ freq`.
///
/// For one-dimensional supports the substitution `x = c + r·tanh t` turns the
/// flat edges of the bump into double-exponential decay in `t`, which
/// Gauss–Legendre panels resolve to round-off; otherwise the box edge is
/// split into uniform panels.
pub fn bump_axis_nodes(c: f64, r: f64, freq: f64, base_panels: usize, rule: &(Vec<f64>, Vec<f64>), tanh_map: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if tanh_map {
        // exp(−cosh² t) < 1e−65 beyond |t| = 3.2
        let t_max = 3.2;
        let h_base = 2.0 * t_max / base_panels as f64;
        // local phase rate in t is |freq|·r·sech² t: at most half a period per panel
        let w = freq.abs() * r;
        let mut edges = vec![-t_max];
        let mut t = -t_max;
        while t < t_max {
            // smallest |t| the panel can reach, where the phase rate peaks
            let ch = if t < 0.0 { (t.abs() - h_base).max(0.0) } else { t }.cosh();
            let h = if w > 0.0 { h_base.min(std::f64::consts::PI * ch * ch / w) } else { h_base };
            t = (t + h).min(t_max);
            edges.push(t);
        }
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            let mid = 0.5 * (a + b);
            let h = b - a;
            for (x, wq) in rule.0.iter().zip(&rule.1) {
                let t = mid + 0.5 * h * x;
                let sech = 1.0 / t.cosh();
                out.push((c + r * t.tanh(), 0.5 * h * wq * r * sech * sech));
            }
        }
    } else {
        let panels = base_panels + (freq.abs() * 2.0 * r / std::f64::consts::PI).ceil() as usize;
        let h = 2.0 * r / panels as f64;
        for p in 0..panels {
            let mid = c - r + (p as f64 + 0.5) * h;
            for (x, w) in rule.0.iter().zip(&rule.1) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
    }
    out
}

/// Density of `φ` at `X` with respect to `dX₁∧…∧dXₖ`.
pub fn eval_test_form(phi: &TestForm, x: &AlgebraVector) -> Complex64 {
    phi.eval(&x.coords)
}

/// `X_a·φ` for a 1-based coordinate index `a`.
pub fn multiply_by_coordinate(phi: &TestForm, a: usize) -> Result<TestForm> {
    let k = phi.dim();
    if a == 0 || a > k {
        return Err(Error::IndexOutOfRange { index: a, max: k });
    }
    Ok(TestForm { center: phi.center.clone(), radius: phi.radius, poly: phi.poly.mul_coordinate(a - 1) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub regular: bool,
    pub min_pairing: f64,
    pub offending: Option<String>,
}

/// `X ∈ 𝔤′` iff every fixed-point weight pairs non-trivially with `X`.
pub fn is_strongly_regular(m: &Manifold, x: &AlgebraVector) -> Result<RegularityVerdict> {
    check_dim(m.algebra.dim, x.dim())?;
    if m.fixed_points.is_empty() {
        return Err(Error::UnsupportedManifold(format!("`{}` carries no fixed-point data", m.name)));
    }
    let xn = x.norm();
    let mut min_pairing = f64::INFINITY;
    let mut offending = None;
    for fp in &m.fixed_points {
        for w in &fp.weights {
            let v = w.apply(&x.coords).abs();
            let tol = TAU_REG * xn * w.norm();
            if v < min_pairing {
                min_pairing = v;
            }
            if (v <= tol || xn == 0.0) && offending.is_none() {
                offending = Some(format!("{} (weight {:?})", fp.label, w.coeffs));
            }
        }
    }
    Ok(RegularityVerdict { regular: offending.is_none(), min_pairing, offending })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_examples() {
        let p = |a: Vec<f64>, b: Vec<f64>| pair(&Covector::new(a), &AlgebraVector::new(b)).unwrap();
        assert_eq!(p(vec![1.0, 0.0], vec![0.0, 1.0]), 0.0);
        assert_eq!(p(vec![2.0], vec![3.0]), 6.0);
        assert_eq!(p(vec![1.0, 2.0], vec![3.0, -1.0]), 1.0);
        assert!(matches!(
            pair(&Covector::new(vec![1.0]), &AlgebraVector::new(vec![1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn test_form_examples() {
        let phi = TestForm::bump(vec![0.0], 1.0).unwrap();
        assert_eq!(eval_test_form(&phi, &AlgebraVector::new(vec![2.0])), Complex64::new(0.0, 0.0));
        let v = eval_test_form(&phi, &AlgebraVector::new(vec![0.0]));
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        let psi = TestForm::new(vec![1.0], 1.0, Polynomial::coordinate(1, 0)).unwrap();
        let v = eval_test_form(&psi, &AlgebraVector::new(vec![1.0]));
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(phi.eval(&[1.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn multiply_by_coordinate_examples() {
        let phi = TestForm::bump(vec![0.0, 0.0], 1.0).unwrap();
        let p1 = multiply_by_coordinate(&phi, 1).unwrap();
        assert_eq!(p1.poly, Polynomial::coordinate(2, 0));
        let p2 = multiply_by_coordinate(&multiply_by_coordinate(&phi, 2).unwrap(), 2).unwrap();
        assert_eq!(p2.poly, Polynomial::coordinate(2, 1).mul_coordinate(1));
        let a = multiply_by_coordinate(&p1, 2).unwrap();
        let b = multiply_by_coordinate(&multiply_by_coordinate(&phi, 2).unwrap(), 1).unwrap();
        assert_eq!(a, b);
        assert!(matches!(multiply_by_coordinate(&phi, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(multiply_by_coordinate(&phi, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bump_is_flat_at_support_boundary() {
        let phi = TestForm::bump(vec![0.5], 0.75).unwrap();
        let edge = 0.5 + 0.75;
        for &h in &[2e-3, 1e-3, 5e-4] {
            let f = |k: f64| phi.eval(&[edge - k * h]).re;
            let d1 = (f(0.0) - f(1.0)) / h;
            let d2 = (f(0.0) - 2.0 * f(1.0) + f(2.0)) / (h * h);
            let d3 = (f(0.0) - 3.0 * f(1.0) + 3.0 * f(2.0) - f(3.0)) / (h * h * h);
            assert!(d1.abs() <= h, "d1 {d1}");
            assert!(d2.abs() <= h, "d2 {d2}");
            assert!(d3.abs() <= h, "d3 {d3}");
        }
    }

    #[test]
    fn inner_product_validation() {
        assert!(TorusAlgebra::with_inner_product(2, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(TorusAlgebra::with_inner_product(2, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        let a = TorusAlgebra::with_inner_product(2, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((a.norm_dual(&[1.0, 1.0]) - 3f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pair_is_bilinear(
            a in -5.0f64..5.0,
            xi in proptest::collection::vec(-3.0f64..3.0, 3),
            eta in proptest::collection::vec(-3.0f64..3.0, 3),
            x in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let comb: Vec<f64> = xi.iter().zip(&eta).map(|(p, q)| a * p + q).collect();
            let x = AlgebraVector::new(x);
            let lhs = pair(&Covector::new(comb), &x).unwrap();
            let rhs = a * pair(&Covector::new(xi), &x).unwrap() + pair(&Covector::new(eta), &x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn coordinate_multiplication_is_pointwise(
            x in proptest::collection::vec(-1.0f64..2.0, 2),
            a in 1usize..=2,
        ) {
            let phi = TestForm::new(vec![0.5, 0.2], 1.1, Polynomial::coordinate(2, 1).add(&Polynomial::one(2))).unwrap();
            let lhs = multiply_by_coordinate(&phi, a).unwrap().eval(&x);
            let rhs = phi.eval(&x) * x[a - 1];
            prop_assert!((lhs - rhs).norm() <= 1e-15);
        }
    }
}
