//! Catalog of charted Hamiltonian torus manifolds.
//!
//! Every manifold is presented on a single chart covering it up to a set of
//! measure zero. Toric examples use action-angle coordinates interleaved as
//! `(u₁, θ₁, u₂, θ₂, …)` with `ω = Σ du_j∧dθ_j`; the sphere uses the
//! cylindrical chart `(θ, z)`. The Riemannian metric is the toric Kähler
//! metric `½ Hess(Σ l_k log l_k)` in the action directions and its inverse in
//! the angle directions, which is smooth across the collapsing faces and
//! invariant under the torus.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::graded::Graded;
use crate::liealg::{AlgebraVector, Covector, TorusAlgebra, Weight};
use crate::quad::halton_point;
use crate::report::VerificationReport;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: String,
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Angle coordinates are periodic with period 2π.
    pub periodic: Vec<bool>,
    /// Extra constraints `Σ_{i∈I} x_i ≤ S`.
    pub simplex: Vec<(Vec<usize>, f64)>,
    pub negligible_boundary: bool,
}

impl Chart {
    /// Whether `p` lies in the closed chart domain.
    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim {
            return false;
        }
        for i in 0..self.dim {
            if !p[i].is_finite() {
                return false;
            }
            if self.periodic[i] {
                continue;
            }
            let slack = 1e-12 * (1.0 + p[i].abs());
            if p[i] < self.lo[i] - slack || p[i] > self.hi[i] + slack {
                return false;
            }
        }
        for (idx, s) in &self.simplex {
            let sum: f64 = idx.iter().map(|&i| p[i]).sum();
            if sum > s + 1e-12 * (1.0 + s.abs()) {
                return false;
            }
        }
        true
    }

    pub fn angle_dims(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.periodic[i]).collect()
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { chart: self.name.clone(), point: p.to_vec() })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointDatum {
    pub label: String,
    pub point: Vec<f64>,
    pub weights: Vec<Weight>,
    pub orientation_sign: i8,
    pub moment_value: Covector,
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Sphere { a: f64 },
    ComplexSpace { weights: Vec<Weight> },
    Projective { n: usize, size: f64 },
    Product(Vec<Manifold>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    pub name: String,
    /// Half the real dimension.
    pub n: usize,
    pub algebra: TorusAlgebra,
    pub chart: Chart,
    pub fixed_points: Vec<FixedPointDatum>,
    pub compact: bool,
    pub proper_moment: bool,
    pub properness: String,
    model: Model,
    moment_sign: f64,
}

/// Subsets of `M` used as integration domains.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    /// `M_{≤R} = {‖μ‖_{𝔤*} ≤ R}`
    Sublevel(f64),
    /// `{⟨μ, X₀⟩ ≤ level}`
    Polarized { x0: Vec<f64>, level: f64 },
}

/// Manifold selection as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ManifoldSpec {
    Sphere {
        #[serde(default = "one")]
        radius_scale: f64,
    },
    ComplexSpace {
        weights: Vec<Vec<i64>>,
    },
    ProjectiveSpace {
        n: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    Product {
        factors: Vec<ManifoldSpec>,
    },
}

fn one() -> f64 {
    1.0
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<Manifold> {
        match self {
            ManifoldSpec::Sphere { radius_scale } => catalog_sphere(*radius_scale),
            ManifoldSpec::ComplexSpace { weights } => {
                catalog_complex_space(weights.len(), weights.iter().cloned().map(Weight::new).collect())
            }
            ManifoldSpec::ProjectiveSpace { n, scale } => catalog_projective_space(*n, *scale),
            ManifoldSpec::Product { factors } => {
                let f: Result<Vec<Manifold>> = factors.iter().map(|s| s.build()).collect();
                catalog_product(f?)
            }
        }
    }
}

/// `S²` with area `4π·radius_scale`, rotated about the z-axis.
pub fn catalog_sphere(radius_scale: f64) -> Result<Manifold> {
    if radius_scale.is_nan() || radius_scale <= 0.0 || !radius_scale.is_finite() {
        return Err(Error::InvalidParameter(format!("radius_scale must be positive, got {radius_scale}")));
    }
    let a = radius_scale;
    let chart = Chart {
        name: "cylindrical (θ, z)".into(),
        dim: 2,
        lo: vec![0.0, -1.0],
        hi: vec![TWO_PI, 1.0],
        periodic: vec![true, false],
        simplex: vec![],
        negligible_boundary: true,
    };
    let fixed_points = vec![
        FixedPointDatum {
            label: "north pole".into(),
            point: vec![0.0, 1.0],
            weights: vec![Weight::new(vec![1])],
            orientation_sign: 1,
            moment_value: Covector::new(vec![-a]),
        },
        FixedPointDatum {
            label: "south pole".into(),
            point: vec![0.0, -1.0],
            weights: vec![Weight::new(vec![-1])],
            orientation_sign: 1,
            moment_value: Covector::new(vec![a]),
        },
    ];
    Ok(Manifold {
        name: format!("S2(scale={a})"),
        n: 1,
        algebra: TorusAlgebra::new(1),
        chart,
        fixed_points,
        compact: true,
        proper_moment: true,
        properness: "compact manifold".into(),
        model: Model::Sphere { a },
        moment_sign: 1.0,
    })
}

/// Minimal Euclidean norm over the convex hull of `pts` (Gilbert's algorithm).
fn min_norm_in_hull(pts: &[Vec<f64>]) -> f64 {
    let k = pts[0].len();
    let mut x = pts[0].clone();
    for _ in 0..200_000 {
        // vertex minimizing ⟨x, p⟩
        let (best, _) = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        let p = &pts[best];
        let d: Vec<f64> = (0..k).map(|i| p[i] - x[i]).collect();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        if dd == 0.0 {
            break;
        }
        let gap: f64 = -d.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        if gap <= 1e-15 {
            break;
        }
        let t = (gap / dd).clamp(0.0, 1.0);
        for i in 0..k {
            x[i] += t * d[i];
        }
    }
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `ℂⁿ` with the linear torus action of the given weights.
///
/// Only proper configurations are accepted: some `X` must pair positively
/// with every weight, equivalently `0 ∉ conv{λ_j}`.
pub fn catalog_complex_space(n: usize, weights: Vec<Weight>) -> Result<Manifold> {
    if n == 0 || weights.len() != n {
        return Err(Error::InvalidParameter(format!("expected {n} weights, got {}", weights.len())));
    }
    let k = weights[0].coeffs.len();
    if k == 0 || weights.iter().any(|w| w.coeffs.len() != k) {
        return Err(Error::InvalidParameter("weights must share a positive torus dimension".into()));
    }
    if let Some(j) = weights.iter().position(|w| w.is_zero()) {
        return Err(Error::ImproperMoment(format!(
            "weight {} is zero: the u_{} direction is fixed by the torus and μ does not control it",
            j + 1,
            j + 1
        )));
    }
    let pts: Vec<Vec<f64>> = weights.iter().map(|w| w.as_f64()).collect();
    let dist = min_norm_in_hull(&pts);
    if dist < 1e-6 {
        return Err(Error::ImproperMoment(format!(
            "0 lies in the convex hull of the weights {:?}; no component of μ is bounded below on all u-directions",
            weights.iter().map(|w| w.coeffs.clone()).collect::<Vec<_>>()
        )));
    }
    Ok(complex_space_unchecked(weights, format!("distance of 0 to conv(weights) = {dist:.6}")))
}

/// Builds `ℂⁿ` without the properness check. Used to construct degenerate
/// configurations on purpose.
pub fn complex_space_unchecked(weights: Vec<Weight>, properness: String) -> Manifold {
    let n = weights.len();
    let k = weights[0].coeffs.len();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut periodic = Vec::new();
    for _ in 0..n {
        lo.extend([0.0, 0.0]);
        hi.extend([f64::INFINITY, TWO_PI]);
        periodic.extend([false, true]);
    }
    let chart = Chart {
        name: "polar (u_j = r_j²/2, θ_j)".into(),
        dim: 2 * n,
        lo,
        hi,
        periodic,
        simplex: vec![],
        negligible_boundary: true,
    };
    let proper = weights.iter().all(|w| !w.is_zero()) && {
        let pts: Vec<Vec<f64>> = weights.iter().map(|w| w.as_f64()).collect();
        min_norm_in_hull(&pts) >= 1e-6
    };
    let fixed_points = vec![FixedPointDatum {
        label: "origin".into(),
        point: vec![0.0; 2 * n],
        weights: weights.clone(),
        orientation_sign: 1,
        moment_value: Covector::new(vec![0.0; k]),
    }];
    let wl: Vec<String> = weights.iter().map(|w| format!("{:?}", w.coeffs)).collect();
    Manifold {
        name: format!("C{n}(weights={})", wl.join(",")),
        n,
        algebra: TorusAlgebra::new(k),
        chart,
        fixed_points,
        compact: false,
        proper_moment: proper,
        properness,
        model: Model::ComplexSpace { weights },
        moment_sign: 1.0,
    }
}

/// `CPⁿ` (n ∈ {1, 2}) with symplectic volume `scaleⁿ πⁿ / n!`.
pub fn catalog_projective_space(n: usize, scale: f64) -> Result<Manifold> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("projective space supported for n ∈ {{1, 2}}, got {n}")));
    }
    if scale.is_nan() || scale <= 0.0 || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let size = scale / 2.0;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut periodic = Vec::new();
    for _ in 0..n {
        lo.extend([0.0, 0.0]);
        hi.extend([size, TWO_PI]);
        periodic.extend([false, true]);
    }
    let chart = Chart {
        name: "action-angle over the open simplex".into(),
        dim: 2 * n,
        lo,
        hi,
        periodic,
        simplex: vec![((0..n).map(|j| 2 * j).collect(), size)],
        negligible_boundary: true,
    };
    let e = |j: usize| {
        let mut c = vec![0i64; n];
        c[j] = 1;
        Weight::new(c)
    };
    let mut fixed_points = vec![FixedPointDatum {
        label: "vertex 0".into(),
        point: vec![0.0; 2 * n],
        weights: (0..n).map(e).collect(),
        orientation_sign: 1,
        moment_value: Covector::new(vec![0.0; n]),
    }];
    for i in 0..n {
        let mut point = vec![0.0; 2 * n];
        point[2 * i] = size;
        let mut weights = vec![e(i).neg()];
        for j in 0..n {
            if j != i {
                weights.push(e(j).sub(&e(i)));
            }
        }
        let mut mv = vec![0.0; n];
        mv[i] = size;
        fixed_points.push(FixedPointDatum {
            label: format!("vertex {}", i + 1),
            point,
            weights,
            orientation_sign: 1,
            moment_value: Covector::new(mv),
        });
    }
    Ok(Manifold {
        name: format!("CP{n}(scale={scale})"),
        n,
        algebra: TorusAlgebra::new(n),
        chart,
        fixed_points,
        compact: true,
        proper_moment: true,
        properness: "compact manifold".into(),
        model: Model::Projective { n, size },
        moment_sign: 1.0,
    })
}

/// Cartesian product with the product torus acting factorwise.
pub fn catalog_product(factors: Vec<Manifold>) -> Result<Manifold> {
    if factors.len() < 2 {
        return Err(Error::InvalidParameter("a product needs at least two factors".into()));
    }
    let n: usize = factors.iter().map(|f| f.n).sum();
    let algebra = TorusAlgebra::direct_sum(&factors.iter().map(|f| &f.algebra).collect::<Vec<_>>());
    let k = algebra.dim;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut periodic = Vec::new();
    let mut simplex = Vec::new();
    let mut off = 0;
    for f in &factors {
        lo.extend_from_slice(&f.chart.lo);
        hi.extend_from_slice(&f.chart.hi);
        periodic.extend_from_slice(&f.chart.periodic);
        for (idx, s) in &f.chart.simplex {
            simplex.push((idx.iter().map(|i| i + off).collect(), *s));
        }
        off += f.chart.dim;
    }
    let chart = Chart {
        name: factors.iter().map(|f| f.chart.name.clone()).collect::<Vec<_>>().join(" × "),
        dim: 2 * n,
        lo,
        hi,
        periodic,
        simplex,
        negligible_boundary: factors.iter().all(|f| f.chart.negligible_boundary),
    };
    // fixed points: all combinations
    let mut fixed_points: Vec<FixedPointDatum> = vec![FixedPointDatum {
        label: String::new(),
        point: vec![],
        weights: vec![],
        orientation_sign: 1,
        moment_value: Covector::new(vec![]),
    }];
    let mut alg_off = 0;
    for f in &factors {
        let after = k - alg_off - f.algebra.dim;
        let mut next = Vec::new();
        for acc in &fixed_points {
            for fp in &f.fixed_points {
                let mut point = acc.point.clone();
                point.extend_from_slice(&fp.point);
                let mut weights = acc.weights.clone();
                weights.extend(fp.weights.iter().map(|w| w.embed(alg_off, after)));
                let mut mv = acc.moment_value.coords.clone();
                mv.extend_from_slice(&fp.moment_value.coords);
                let label =
                    if acc.label.is_empty() { fp.label.clone() } else { format!("{} × {}", acc.label, fp.label) };
                next.push(FixedPointDatum {
                    label,
                    point,
                    weights,
                    orientation_sign: acc.orientation_sign * fp.orientation_sign,
                    moment_value: Covector::new(mv),
                });
            }
        }
        // weights of earlier factors need padding for the new factor
        fixed_points = next;
        alg_off += f.algebra.dim;
    }
    // Pad all weights to full length k.
    for fp in &mut fixed_points {
        for w in &mut fp.weights {
            if w.coeffs.len() < k {
                w.coeffs.resize(k, 0);
            }
        }
    }
    let compact = factors.iter().all(|f| f.compact);
    let proper = factors.iter().all(|f| f.proper_moment);
    Ok(Manifold {
        name: factors.iter().map(|f| f.name.clone()).collect::<Vec<_>>().join(" x "),
        n,
        algebra,
        chart,
        fixed_points,
        compact,
        proper_moment: proper,
        properness: if proper { "every factor has a proper moment map".into() } else { "improper factor".into() },
        model: Model::Product(factors),
        moment_sign: 1.0,
    })
}

impl Manifold {
    /// Copy with the moment map negated; violates the Hamiltonian equation.
    pub fn with_negated_moment(&self) -> Manifold {
        let mut m = self.clone();
        m.moment_sign = -m.moment_sign;
        m.name = format!("{}[negated μ]", m.name);
        m
    }

    /// Same manifold with a different inner product on `𝔤*`.
    pub fn with_inner_product(&self, q: DMatrix<f64>) -> Result<Manifold> {
        let mut m = self.clone();
        m.algebra = TorusAlgebra::with_inner_product(self.algebra.dim, q)?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn k(&self) -> usize {
        self.algebra.dim
    }

    fn factors(&self) -> Vec<(usize, usize, &Manifold)> {
        match &self.model {
            Model::Product(fs) => {
                let mut out = Vec::new();
                let (mut c, mut a) = (0, 0);
                for f in fs {
                    out.push((c, a, f));
                    c += f.dim();
                    a += f.k();
                }
                out
            }
            _ => vec![],
        }
    }

    /// Coefficient matrix of ω (ω = Σ_{i<j} Ω_ij dx_i∧dx_j).
    pub fn omega_matrix(&self, p: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        match &self.model {
            Model::Sphere { a } => {
                m[(0, 1)] = *a;
                m[(1, 0)] = -*a;
            }
            Model::ComplexSpace { .. } | Model::Projective { .. } => {
                for j in 0..self.n {
                    m[(2 * j, 2 * j + 1)] = 1.0;
                    m[(2 * j + 1, 2 * j)] = -1.0;
                }
            }
            Model::Product(_) => {
                for (c, _, f) in self.factors() {
                    let fd = f.dim();
                    let sub = f.omega_matrix(&p[c..c + fd]);
                    m.view_mut((c, c), (fd, fd)).copy_from(&sub);
                }
            }
        }
        m
    }

    pub fn omega(&self, p: &[f64]) -> Graded {
        Graded::two_form(&self.omega_matrix(p))
    }

    /// Top coefficient of the Liouville form ωⁿ/n!.
    pub fn liouville_density(&self, p: &[f64]) -> f64 {
        match &self.model {
            Model::Sphere { a } => *a,
            Model::ComplexSpace { .. } | Model::Projective { .. } => 1.0,
            Model::Product(_) => self.factors().iter().map(|(c, _, f)| f.liouville_density(&p[*c..*c + f.dim()])).product(),
        }
    }

    /// μ(m) ∈ 𝔤*.
    pub fn moment(&self, p: &[f64]) -> Vec<f64> {
        let k = self.k();
        let mut mu = vec![0.0; k];
        match &self.model {
            Model::Sphere { a } => mu[0] = -a * p[1],
            Model::ComplexSpace { weights } => {
                for (j, w) in weights.iter().enumerate() {
                    for a in 0..k {
                        mu[a] += p[2 * j] * w.coeffs[a] as f64;
                    }
                }
            }
            Model::Projective { n, .. } => {
                for j in 0..*n {
                    mu[j] = p[2 * j];
                }
            }
            Model::Product(_) => {
                for (c, a, f) in self.factors() {
                    let sub = f.moment(&p[c..c + f.dim()]);
                    mu[a..a + f.k()].copy_from_slice(&sub);
                }
            }
        }
        if self.moment_sign != 1.0 {
            for v in &mut mu {
                *v *= self.moment_sign;
            }
        }
        mu
    }

    /// μ_X(m) = ⟨μ(m), X⟩.
    pub fn moment_x(&self, p: &[f64], x: &[f64]) -> f64 {
        self.moment(p).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Components of VF_X at `p`.
    pub fn vector_field(&self, x: &[f64], p: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        match &self.model {
            Model::Sphere { .. } => v[0] = x[0],
            Model::ComplexSpace { weights } => {
                for (j, w) in weights.iter().enumerate() {
                    v[2 * j + 1] = w.apply(x);
                }
            }
            Model::Projective { n, .. } => {
                for j in 0..*n {
                    v[2 * j + 1] = x[j];
                }
            }
            Model::Product(_) => {
                for (c, a, f) in self.factors() {
                    let sub = f.vector_field(&x[a..a + f.k()], &p[c..c + f.dim()]);
                    v[c..c + f.dim()].copy_from_slice(&sub);
                }
            }
        }
        v
    }

    /// Flow of VF_X for time `s`: `exp(sX)·m`.
    pub fn flow(&self, x: &[f64], s: f64, p: &[f64]) -> Vec<f64> {
        let v = self.vector_field(x, p);
        let mut q: Vec<f64> = p.iter().zip(&v).map(|(a, b)| a + s * b).collect();
        for i in 0..q.len() {
            if self.chart.periodic[i] {
                q[i] = q[i].rem_euclid(TWO_PI);
            }
        }
        q
    }

    /// T-invariant Riemannian metric.
    pub fn metric(&self, p: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        match &self.model {
            Model::Sphere { a } => {
                let s = (1.0 - p[1] * p[1]).max(0.0);
                g[(0, 0)] = a * s;
                g[(1, 1)] = a / s;
            }
            Model::ComplexSpace { .. } => {
                for j in 0..self.n {
                    let u = p[2 * j].max(0.0);
                    g[(2 * j, 2 * j)] = 1.0 / (2.0 * u);
                    g[(2 * j + 1, 2 * j + 1)] = 2.0 * u;
                }
            }
            Model::Projective { n, size } => {
                let n = *n;
                let u: Vec<f64> = (0..n).map(|j| p[2 * j].max(0.0)).collect();
                let l0 = (size - u.iter().sum::<f64>()).max(0.0);
                for i in 0..n {
                    for j in 0..n {
                        let diag_u = if i == j { 1.0 / u[i] } else { 0.0 };
                        g[(2 * i, 2 * j)] = 0.5 * (diag_u + 1.0 / l0);
                        let diag_t = if i == j { u[i] } else { 0.0 };
                        g[(2 * i + 1, 2 * j + 1)] = 2.0 * (diag_t - u[i] * u[j] / size);
                    }
                }
            }
            Model::Product(_) => {
                for (c, _, f) in self.factors() {
                    let fd = f.dim();
                    let sub = f.metric(&p[c..c + fd]);
                    g.view_mut((c, c), (fd, fd)).copy_from(&sub);
                }
            }
        }
        g
    }

    /// `(v, w)_M` skipping zero components so that degenerate entries of the
    /// metric at collapsing faces do not produce `∞·0`.
    pub fn metric_pair(&self, p: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let g = self.metric(p);
        let mut s = 0.0;
        for i in 0..v.len() {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..w.len() {
                if w[j] == 0.0 {
                    continue;
                }
                s += v[i] * g[(i, j)] * w[j];
            }
        }
        s
    }

    /// Metric dual of VF_X as a covector: `G·VF_X`, computed with the same
    /// zero-skipping rule as [`Manifold::metric_pair`].
    pub fn metric_lower(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        let g = self.metric(p);
        let d = v.len();
        (0..d)
            .map(|i| (0..d).filter(|&j| v[j] != 0.0).map(|j| g[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Proper exhaustion function: Σu_j on complex spaces, ‖μ‖ otherwise.
    pub fn exhaustion(&self, p: &[f64]) -> f64 {
        match &self.model {
            Model::ComplexSpace { .. } => (0..self.n).map(|j| p[2 * j]).sum(),
            Model::Product(_) => self.factors().iter().map(|(c, _, f)| f.exhaustion(&p[*c..*c + f.dim()])).sum(),
            _ => self.algebra.norm_dual(&self.moment(p)),
        }
    }

    /// sup ‖μ‖ for compact manifolds.
    pub fn max_moment_norm(&self) -> Option<f64> {
        if !self.compact {
            return None;
        }
        Some(self.fixed_points.iter().map(|fp| self.algebra.norm_dual(&fp.moment_value.coords)).fold(0.0, f64::max))
    }

    /// inf_M ⟨μ, X₀⟩, or a precondition error when it is not proper and
    /// bounded below.
    pub fn polarizer_minimum(&self, x0: &[f64]) -> Result<f64> {
        check_dim(self.k(), x0.len())?;
        match &self.model {
            _ if self.compact => Ok(self
                .fixed_points
                .iter()
                .map(|fp| fp.moment_value.coords.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                * if self.moment_sign < 0.0 { -1.0 } else { 1.0 }),
            Model::ComplexSpace { weights } => {
                if let Some(w) = weights.iter().find(|w| w.apply(x0) <= 0.0) {
                    Err(Error::Precondition(format!(
                        "μ_X₀ is not proper and bounded below: weight {:?} pairs to {} with X₀",
                        w.coeffs,
                        w.apply(x0)
                    )))
                } else {
                    Ok(0.0)
                }
            }
            Model::Product(_) => {
                let mut s = 0.0;
                for (_, a, f) in self.factors() {
                    s += f.polarizer_minimum(&x0[a..a + f.k()])?;
                }
                Ok(s)
            }
            _ => unreachable!("compact models handled above"),
        }
    }

    pub fn in_region(&self, p: &[f64], region: &Region) -> bool {
        match region {
            Region::Whole => true,
            Region::Sublevel(r) => self.algebra.norm_dual(&self.moment(p)) <= *r,
            Region::Polarized { x0, level } => self.moment_x(p, x0) <= *level,
        }
    }

    /// Parametrization of a region by the unit box.
    pub fn region_map(&self, region: &Region) -> Result<RegionMap> {
        if let Region::Sublevel(r) = region {
            if r.is_nan() || *r < 0.0 {
                return Err(Error::InvalidParameter(format!("truncation radius must be non-negative, got {r}")));
            }
        }
        let dim = self.dim();
        let angle_dims = self.chart.angle_dims();
        let kind = match &self.model {
            Model::Sphere { a } => {
                let (mut zlo, mut zhi) = (-1.0f64, 1.0f64);
                match region {
                    Region::Whole => {}
                    Region::Sublevel(r) => {
                        let scale = a * self.algebra.inner_product_dual[(0, 0)].sqrt();
                        let zm = (r / scale).min(1.0);
                        zlo = -zm;
                        zhi = zm;
                    }
                    Region::Polarized { x0, level } => {
                        // μ_X₀ = −σ a z x₀ ≤ level
                        let c = -self.moment_sign * a * x0[0];
                        if c > 0.0 {
                            zhi = zhi.min(level / c);
                        } else if c < 0.0 {
                            zlo = zlo.max(level / c);
                        } else if *level < 0.0 {
                            zhi = zlo;
                        }
                    }
                }
                if zhi <= zlo {
                    MapKind::Empty
                } else {
                    MapKind::Band { zlo, zhi }
                }
            }
            Model::ComplexSpace { weights } => {
                let cols: Vec<Vec<f64>> = weights.iter().map(|w| w.as_f64()).collect();
                let limit = match region {
                    Region::Whole => {
                        return Err(Error::Precondition(format!(
                            "`{}` is non-compact; integrate over a truncated or polarized region",
                            self.name
                        )))
                    }
                    Region::Sublevel(r) => RhoLimit::Norm(*r),
                    Region::Polarized { x0, level } => {
                        self.polarizer_minimum(x0)?;
                        let c: Vec<f64> = weights.iter().map(|w| self.moment_sign * w.apply(x0)).collect();
                        if *level < 0.0 {
                            return Ok(RegionMap { dim, angle_dims, kind: MapKind::Empty });
                        }
                        RhoLimit::Linear { c, level: *level }
                    }
                };
                MapKind::Cone { n: self.n, cols, q: self.algebra.inner_product_dual.clone(), limits: vec![limit] }
            }
            Model::Projective { n, size } => {
                let cols: Vec<Vec<f64>> = (0..*n)
                    .map(|j| {
                        let mut c = vec![0.0; *n];
                        c[j] = 1.0;
                        c
                    })
                    .collect();
                let mut limits = vec![RhoLimit::Simplex(*size)];
                match region {
                    Region::Whole => {}
                    Region::Sublevel(r) => limits.push(RhoLimit::Norm(*r)),
                    Region::Polarized { x0, level } => {
                        if *level < 0.0 {
                            return Err(Error::Precondition(
                                "polarized region below the vertex at the origin is not star-shaped in this chart".into(),
                            ));
                        }
                        let c: Vec<f64> = x0.iter().map(|v| self.moment_sign * v).collect();
                        limits.push(RhoLimit::Linear { c, level: *level });
                    }
                }
                MapKind::Cone { n: *n, cols, q: self.algebra.inner_product_dual.clone(), limits }
            }
            Model::Product(_) => {
                let mut parts = Vec::new();
                for (c, a, f) in self.factors() {
                    let sub_region = match region {
                        Region::Whole => Region::Whole,
                        Region::Sublevel(r) => Region::Sublevel(*r),
                        Region::Polarized { x0, level } => {
                            let mut others = 0.0;
                            for (_, a2, f2) in self.factors() {
                                if a2 != a {
                                    others += f2.polarizer_minimum(&x0[a2..a2 + f2.k()])?;
                                }
                            }
                            Region::Polarized { x0: x0[a..a + f.k()].to_vec(), level: level - others }
                        }
                    };
                    parts.push((c, f.region_map(&sub_region)?));
                }
                let test = match region {
                    Region::Whole => None,
                    r => Some((Box::new(self.clone()), r.clone())),
                };
                MapKind::Product { parts, test }
            }
        };
        Ok(RegionMap { dim, angle_dims, kind })
    }

    /// Moment-space points and interior chart points used for sampling
    /// checks: Halton points mapped through the region map, kept away from
    /// the chart boundary by `margin` in the unit box.
    pub fn sample_points(&self, n_samples: usize, region: &Region, margin: f64, offset: u64) -> Result<Vec<Vec<f64>>> {
        let map = self.region_map(region)?;
        let d = self.dim();
        let mut out = Vec::with_capacity(n_samples);
        let mut idx = offset + 1;
        let mut p = vec![0.0; d];
        let mut attempts = 0;
        while out.len() < n_samples && attempts < 50 * n_samples + 100 {
            let h = halton_point(idx, d);
            idx += 1;
            attempts += 1;
            let y: Vec<f64> = h.iter().map(|v| margin + (1.0 - 2.0 * margin) * v).collect();
            let jac = map.map(&y, &mut p);
            if jac > 0.0 {
                out.push(p.clone());
            }
        }
        Ok(out)
    }

    /// Default bounded region for sampling-based checks.
    pub fn sampling_region(&self) -> Region {
        if self.compact {
            Region::Whole
        } else {
            Region::Sublevel(4.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum RhoLimit {
    Norm(f64),
    Simplex(f64),
    Linear { c: Vec<f64>, level: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum MapKind {
    Empty,
    /// sphere: θ = 2π y₀, z ∈ [zlo, zhi]
    Band { zlo: f64, zhi: f64 },
    /// u = ρ w, w on the simplex by stick-breaking, ρ ∈ [0, ρmax(w)]
    Cone { n: usize, cols: Vec<Vec<f64>>, q: DMatrix<f64>, limits: Vec<RhoLimit> },
    Product { parts: Vec<(usize, RegionMap)>, test: Option<(Box<Manifold>, Region)> },
}

/// Map from the unit box `[0,1]^{2n}` onto a region of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    dim: usize,
    angle_dims: Vec<usize>,
    kind: MapKind,
}

impl RegionMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Box coordinates that parametrize torus angles (uniformly).
    pub fn angle_dims(&self) -> &[usize] {
        &self.angle_dims
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, MapKind::Empty)
    }

    /// Box coordinate whose upper face `y = 1` maps onto the outer boundary
    /// of the region, when the map is a cone over the moment image.
    pub fn radial_dim(&self) -> Option<usize> {
        match self.kind {
            MapKind::Cone { .. } => Some(0),
            _ => None,
        }
    }

    /// Writes the chart point for `y` into `p` and returns the Jacobian
    /// (0 outside the region).
    pub fn map(&self, y: &[f64], p: &mut [f64]) -> f64 {
        match &self.kind {
            MapKind::Empty => 0.0,
            MapKind::Band { zlo, zhi } => {
                p[0] = TWO_PI * y[0];
                p[1] = zlo + (zhi - zlo) * y[1];
                TWO_PI * (zhi - zlo)
            }
            MapKind::Cone { n, cols, q, limits } => {
                let n = *n;
                let mut w = [0.0f64; 8];
                let mut rem = 1.0;
                let mut jstick = 1.0;
                for j in 0..n - 1 {
                    w[j] = rem * y[2 * (j + 1)];
                    jstick *= rem;
                    rem -= w[j];
                }
                w[n - 1] = rem.max(0.0);
                let k = cols[0].len();
                let mut mu = [0.0f64; 8];
                for j in 0..n {
                    for a in 0..k {
                        mu[a] += w[j] * cols[j][a];
                    }
                }
                let mut rho_max = f64::INFINITY;
                for lim in limits {
                    let r = match lim {
                        RhoLimit::Norm(r) => {
                            let mut s = 0.0;
                            for a in 0..k {
                                for b in 0..k {
                                    s += mu[a] * q[(a, b)] * mu[b];
                                }
                            }
                            let nm = s.max(0.0).sqrt();
                            if nm > 0.0 {
                                r / nm
                            } else {
                                f64::INFINITY
                            }
                        }
                        RhoLimit::Simplex(s) => *s,
                        RhoLimit::Linear { c, level } => {
                            let lin: f64 = (0..n).map(|j| w[j] * c[j]).sum();
                            if lin > 0.0 {
                                level / lin
                            } else {
                                f64::INFINITY
                            }
                        }
                    };
                    rho_max = rho_max.min(r);
                }
                if !rho_max.is_finite() {
                    rho_max = 0.0;
                }
                let rho = y[0] * rho_max;
                for j in 0..n {
                    p[2 * j] = rho * w[j];
                    p[2 * j + 1] = TWO_PI * y[2 * j + 1];
                }
                rho.powi(n as i32 - 1) * rho_max * jstick * TWO_PI.powi(n as i32)
            }
            MapKind::Product { parts, test } => {
                let mut jac = 1.0;
                for (off, m) in parts {
                    let d = m.dim;
                    jac *= m.map(&y[*off..*off + d], &mut p[*off..*off + d]);
                }
                if let Some((mf, region)) = test {
                    if !mf.in_region(p, region) {
                        return 0.0;
                    }
                }
                jac
            }
        }
    }
}

/// `VF_X(m)` after checking that `m` lies in the chart.
pub fn evaluate_vector_field(m: &Manifold, x: &AlgebraVector, p: &[f64]) -> Result<Vec<f64>> {
    check_dim(m.k(), x.dim())?;
    m.chart.check(p)?;
    Ok(m.vector_field(&x.coords, p))
}

/// `‖μ(m)‖_{𝔤*}`.
pub fn moment_norm(m: &Manifold, p: &[f64]) -> Result<f64> {
    m.chart.check(p)?;
    Ok(m.algebra.norm_dual(&m.moment(p)))
}

/// Central-difference gradient with one-sided fallback at the chart boundary.
pub(crate) fn fd_gradient(chart: &Chart, f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Vec<f64> {
    let d = p.len();
    let mut g = vec![0.0; d];
    let mut q = p.to_vec();
    for i in 0..d {
        let hi = h * (1.0 + p[i].abs().min(1.0));
        q[i] = p[i] + hi;
        let plus_ok = chart.contains(&q);
        let fp = if plus_ok { f(&q) } else { 0.0 };
        q[i] = p[i] - hi;
        let minus_ok = chart.contains(&q);
        let fm = if minus_ok { f(&q) } else { 0.0 };
        g[i] = if plus_ok && minus_ok {
            (fp - fm) / (2.0 * hi)
        } else if plus_ok {
            q[i] = p[i] + 2.0 * hi;
            (-3.0 * f(p) + 4.0 * fp - f(&q)) / (2.0 * hi)
        } else if minus_ok {
            q[i] = p[i] - 2.0 * hi;
            (3.0 * f(p) - 4.0 * fm + f(&q)) / (2.0 * hi)
        } else {
            0.0
        };
        q[i] = p[i];
    }
    g
}

/// Checks the Hamiltonian equation `dμ_X = −ι_{VF_X}ω`, closedness and
/// nondegeneracy of ω, and invariance of μ along the torus action.
pub fn validate_hamiltonian(m: &Manifold, n_samples: usize, tol: f64) -> Result<VerificationReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let h = 1e-5;
    let pts = m.sample_points(n_samples, &m.sampling_region(), 0.01, 0)?;
    let k = m.k();
    let d = m.dim();
    let mut ham_res = 0.0f64;
    let mut ham_scale = 0.0f64;
    let mut closed_res = 0.0f64;
    let mut min_det = f64::INFINITY;
    let mut inv_res = 0.0f64;
    let mut witness = None;
    for p in &pts {
        for a in 0..k {
            let mut e = vec![0.0; k];
            e[a] = 1.0;
            let f = |q: &[f64]| m.moment_x(q, &e);
            let dmu = fd_gradient(&m.chart, &f, p, h);
            let v = m.vector_field(&e, p);
            let om = m.omega_matrix(p);
            // (ι_V ω)_j = Σ_i V_i Ω_ij
            let mut worst = 0.0f64;
            for j in 0..d {
                let iv: f64 = (0..d).map(|i| v[i] * om[(i, j)]).sum();
                let r = (dmu[j] + iv).abs();
                if !r.is_finite() {
                    return Err(Error::Evaluation(format!("non-finite residual at {p:?}")));
                }
                worst = worst.max(r);
                ham_scale = ham_scale.max(dmu[j].abs());
            }
            if worst > ham_res {
                ham_res = worst;
                if worst > tol {
                    witness = Some(format!("point {p:?}, basis vector E{}", a + 1));
                }
            }
            // μ invariance: dμ(VF_E) for every component b, and along the flow
            for b in 0..k {
                let mut eb = vec![0.0; k];
                eb[b] = 1.0;
                let fb = |q: &[f64]| m.moment_x(q, &eb);
                let g = fd_gradient(&m.chart, &fb, p, h);
                let dir: f64 = g.iter().zip(&v).map(|(x, y)| x * y).sum();
                inv_res = inv_res.max(dir.abs());
            }
            let q = m.flow(&e, 0.731, p);
            let dm: f64 = m.moment(&q).iter().zip(m.moment(p)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            inv_res = inv_res.max(dm);
        }
        // dω via finite differences of the coefficient matrix
        for i in 0..d {
            for j in (i + 1)..d {
                for l in 0..d {
                    let f = |q: &[f64]| m.omega_matrix(q)[(i, j)];
                    let g = fd_gradient(&m.chart, &f, p, h);
                    let _ = l;
                    // (dω) coefficient on dx_l∧dx_i∧dx_j collects cyclic terms
                    let gi = fd_gradient(&m.chart, &|q: &[f64]| m.omega_matrix(q)[(j, l)], p, h);
                    let gj = fd_gradient(&m.chart, &|q: &[f64]| m.omega_matrix(q)[(l, i)], p, h);
                    let c = g[l] + gi[i] + gj[j];
                    closed_res = closed_res.max(c.abs());
                }
            }
        }
        let det = m.omega_matrix(p).determinant();
        min_det = min_det.min(det.abs());
    }
    let mut rep = VerificationReport::new(format!("validate_hamiltonian[{}]", m.name));
    rep.check("hamiltonian residual max|dμ_X + ι_X ω|", ham_res, tol, witness);
    rep.check("closedness max|dω|", closed_res, tol, None);
    rep.check_min("nondegeneracy min|det ω|", min_det, 1e-12, None);
    rep.check("moment invariance along VF", inv_res, tol, None);
    rep.note(format!("{} samples, finite-difference step {h}, max|dμ_X| = {ham_scale:.3e}", pts.len()));
    Ok(rep)
}

/// Stored fixed points, verified by a grid search for zeros of `|VF_X|²`
/// at a generic `X`.
pub fn fixed_point_data(m: &Manifold) -> Result<Vec<FixedPointDatum>> {
    for fp in &m.fixed_points {
        if fp.weights.len() != m.n || fp.weights.iter().any(|w| w.is_zero() || w.coeffs.len() != m.k()) {
            return Err(Error::InconsistentCatalog(format!("fixed point `{}` has malformed weights", fp.label)));
        }
        if fp.orientation_sign.abs() != 1 {
            return Err(Error::InconsistentCatalog(format!("fixed point `{}` has orientation sign {}", fp.label, fp.orientation_sign)));
        }
    }
    let k = m.k();
    // generic direction: avoid rational relations between components
    let x: Vec<f64> = (0..k).map(|a| 1.0 + (a as f64 + 1.0) * 0.318_309_886).collect();
    let region = if m.compact { Region::Whole } else { Region::Sublevel(4.0) };
    let scale = m.max_moment_norm().unwrap_or(4.0).max(1e-12);
    let map = m.region_map(&region)?;
    let d = m.dim();
    let action: Vec<usize> = (0..d).filter(|i| !map.angle_dims().contains(i)).collect();
    let na = action.len();
    let steps: usize = match na {
        1 => 400,
        2 => 80,
        _ => 16,
    };
    let total = (steps + 1).pow(na as u32);
    let mut vals = vec![0.0; total];
    let mut moments = vec![vec![0.0; k]; total];
    let mut y = vec![0.5; d];
    let mut p = vec![0.0; d];
    let xn2: f64 = x.iter().map(|v| v * v).sum();
    for idx in 0..total {
        let mut r = idx;
        for &ai in &action {
            y[ai] = (r % (steps + 1)) as f64 / steps as f64;
            r /= steps + 1;
        }
        map.map(&y, &mut p);
        let v = m.vector_field(&x, &p);
        vals[idx] = m.metric_pair(&p, &v, &v).max(0.0);
        moments[idx] = m.moment(&p);
    }
    let h = 1.0 / steps as f64;
    let tau = 4.0 * h * scale * xn2;
    let near = 2.0 * h * scale * (k as f64).sqrt() * 2.0;
    let mut found = vec![false; m.fixed_points.len()];
    for idx in 0..total {
        if vals[idx] >= tau {
            continue;
        }
        // local minimum over grid neighbours
        let mut is_min = true;
        let mut stride = 1;
        let mut r = idx;
        for _ in 0..na {
            let c = r % (steps + 1);
            r /= steps + 1;
            if c > 0 && vals[idx - stride] < vals[idx] {
                is_min = false;
            }
            if c < steps && vals[idx + stride] < vals[idx] {
                is_min = false;
            }
            stride *= steps + 1;
        }
        if !is_min {
            continue;
        }
        let mu = &moments[idx];
        let hit = m.fixed_points.iter().position(|fp| {
            let dist: f64 =
                fp.moment_value.coords.iter().zip(mu).map(|(a, b)| (a * m.moment_sign - b).powi(2)).sum::<f64>().sqrt();
            dist <= near
        });
        match hit {
            Some(i) => found[i] = true,
            None => {
                return Err(Error::InconsistentCatalog(format!(
                    "zero of VF_X near μ = {mu:?} is not among the reported fixed points of `{}`",
                    m.name
                )))
            }
        }
    }
    if let Some(i) = found.iter().position(|f| !f) {
        return Err(Error::InconsistentCatalog(format!(
            "reported fixed point `{}` of `{}` not found by the grid search",
            m.fixed_points[i].label, m.name
        )));
    }
    Ok(m.fixed_points.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::Weight;
    use proptest::prelude::*;

    fn c1() -> Manifold {
        catalog_complex_space(1, vec![Weight::new(vec![1])]).unwrap()
    }

    fn c2() -> Manifold {
        catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1])]).unwrap()
    }

    #[test]
    fn sphere_moment_and_field() {
        let s = catalog_sphere(1.0).unwrap();
        assert_eq!(moment_norm(&s, &[0.3, 0.0]).unwrap(), 0.0);
        assert_eq!(moment_norm(&s, &[0.3, -1.0]).unwrap(), 1.0);
        let v = evaluate_vector_field(&s, &AlgebraVector::new(vec![2.5]), &[1.0, 0.2]).unwrap();
        assert_eq!(v, vec![2.5, 0.0]);
        let z = evaluate_vector_field(&s, &AlgebraVector::new(vec![0.0]), &[1.0, 0.2]).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
        assert!(matches!(
            evaluate_vector_field(&s, &AlgebraVector::new(vec![1.0]), &[1.0, 1.5]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn complex_line_moment_and_field() {
        let c = c1();
        assert_eq!(moment_norm(&c, &[3.0, 0.1]).unwrap(), 3.0);
        let v = evaluate_vector_field(&c, &AlgebraVector::new(vec![1.7]), &[0.4, 2.0]).unwrap();
        assert_eq!(v, vec![0.0, 1.7]);
    }

    #[test]
    fn vector_field_matches_flow_derivative() {
        for m in [catalog_sphere(1.3).unwrap(), c2(), catalog_projective_space(2, 1.0).unwrap()] {
            let k = m.k();
            let x: Vec<f64> = (0..k).map(|a| 0.7 - 0.4 * a as f64).collect();
            for p in m.sample_points(20, &m.sampling_region(), 0.05, 3).unwrap() {
                let eps = 1e-6;
                let q1 = m.flow(&x, eps, &p);
                let q0 = m.flow(&x, -eps, &p);
                let v = m.vector_field(&x, &p);
                for i in 0..m.dim() {
                    let mut diff = q1[i] - q0[i];
                    if m.chart.periodic[i] {
                        diff = (diff + PI).rem_euclid(TWO_PI) - PI;
                    }
                    assert!((diff / (2.0 * eps) - v[i]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn improper_configurations_rejected() {
        let e = catalog_complex_space(2, vec![Weight::new(vec![1]), Weight::new(vec![-1])]);
        assert!(matches!(e, Err(Error::ImproperMoment(_))));
        let e = catalog_complex_space(2, vec![Weight::new(vec![1]), Weight::new(vec![0])]);
        assert!(matches!(e, Err(Error::ImproperMoment(_))));
        let e = catalog_complex_space(
            3,
            vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1]), Weight::new(vec![-1, -1])],
        );
        assert!(matches!(e, Err(Error::ImproperMoment(_))));
        assert!(catalog_complex_space(2, vec![Weight::new(vec![1, 0]), Weight::new(vec![1, 1])]).is_ok());
        assert!(catalog_projective_space(3, 1.0).is_err());
        assert!(catalog_sphere(0.0).is_err());
    }

    #[test]
    fn hamiltonian_validation_passes_on_catalog() {
        for m in [
            catalog_sphere(1.0).unwrap(),
            c1(),
            c2(),
            catalog_projective_space(1, 1.0).unwrap(),
            catalog_projective_space(2, 1.0).unwrap(),
            catalog_product(vec![catalog_sphere(1.0).unwrap(), c1()]).unwrap(),
        ] {
            let r = validate_hamiltonian(&m, 200, 1e-6).unwrap();
            assert!(r.passed, "{}", r.summary());
        }
    }

    #[test]
    fn negated_moment_fails_with_twice_the_gradient() {
        let m = catalog_sphere(1.0).unwrap().with_negated_moment();
        let r = validate_hamiltonian(&m, 50, 1e-6).unwrap();
        assert!(!r.passed);
        let res = r.checks[0].value;
        // |dμ_X| = a = 1, residual 2
        assert!((res - 2.0).abs() < 1e-6, "residual {res}");
    }

    #[test]
    fn fixed_points_found_by_grid_search() {
        assert_eq!(fixed_point_data(&catalog_sphere(1.0).unwrap()).unwrap().len(), 2);
        assert_eq!(fixed_point_data(&c1()).unwrap().len(), 1);
        assert_eq!(fixed_point_data(&c2()).unwrap().len(), 1);
        assert_eq!(fixed_point_data(&catalog_projective_space(1, 1.0).unwrap()).unwrap().len(), 2);
        assert_eq!(fixed_point_data(&catalog_projective_space(2, 1.0).unwrap()).unwrap().len(), 3);
    }

    #[test]
    fn missing_fixed_point_detected() {
        let mut m = catalog_sphere(1.0).unwrap();
        m.fixed_points.pop();
        assert!(matches!(fixed_point_data(&m), Err(Error::InconsistentCatalog(_))));
    }

    #[test]
    fn metric_is_positive_definite_in_the_interior() {
        for m in [catalog_sphere(2.0).unwrap(), c2(), catalog_projective_space(2, 1.0).unwrap()] {
            for p in m.sample_points(30, &m.sampling_region(), 0.05, 7).unwrap() {
                let g = m.metric(&p);
                assert!(g.clone().cholesky().is_some(), "{} at {p:?}", m.name);
            }
        }
    }

    #[test]
    fn product_fixed_points_and_weights() {
        let m = catalog_product(vec![catalog_sphere(1.0).unwrap(), catalog_projective_space(1, 2.0).unwrap()]).unwrap();
        assert_eq!(m.fixed_points.len(), 4);
        assert!(m.fixed_points.iter().all(|fp| fp.weights.iter().all(|w| w.coeffs.len() == 2)));
        assert_eq!(m.fixed_points[0].weights, vec![Weight::new(vec![1, 0]), Weight::new(vec![0, 1])]);
        assert_eq!(fixed_point_data(&m).unwrap().len(), 4);
    }

    proptest! {
        #[test]
        fn vector_field_is_linear(
            a in -3.0f64..3.0,
            x in proptest::collection::vec(-2.0f64..2.0, 2),
            y in proptest::collection::vec(-2.0f64..2.0, 2),
            u1 in 0.0f64..5.0, u2 in 0.0f64..5.0, t1 in 0.0f64..6.0, t2 in 0.0f64..6.0,
        ) {
            let m = c2();
            let p = [u1, t1, u2, t2];
            let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
            let lhs = m.vector_field(&comb, &p);
            let vx = m.vector_field(&x, &p);
            let vy = m.vector_field(&y, &p);
            for i in 0..4 {
                prop_assert!((lhs[i] - (a * vx[i] + vy[i])).abs() < 1e-12);
            }
        }

        #[test]
        fn moment_is_invariant_under_the_torus(
            s in -10.0f64..10.0,
            x in proptest::collection::vec(-2.0f64..2.0, 2),
            y0 in 0.01f64..0.99, y1 in 0.0f64..1.0, y2 in 0.01f64..0.99, y3 in 0.0f64..1.0,
        ) {
            let m = catalog_projective_space(2, 1.0).unwrap();
            let map = m.region_map(&Region::Whole).unwrap();
            let mut p = vec![0.0; 4];
            map.map(&[y0, y1, y2, y3], &mut p);
            let q = m.flow(&x, s, &p);
            let d: f64 = m.moment(&q).iter().zip(m.moment(&p)).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(d < 1e-8);
        }

        #[test]
        fn truncation_is_monotone(r1 in 0.0f64..5.0, dr in 0.0f64..5.0, u1 in 0.0f64..6.0, u2 in 0.0f64..6.0) {
            let m = c2();
            let p = [u1, 0.0, u2, 0.0];
            if m.in_region(&p, &Region::Sublevel(r1)) {
                prop_assert!(m.in_region(&p, &Region::Sublevel(r1 + dr)));
            }
        }
    }
}
