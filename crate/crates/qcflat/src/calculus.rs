//! Horizontal calculus on the flat group.
//!
//! Scalar fields expose Euclidean derivatives; horizontal derivatives are
//! exact contractions with the left-invariant frame. With the metric
//! normalization g0(Y_j, Y_k) = 2 delta_jk:
//!
//!   Y_j f        = frame row j . euclidean gradient
//!   |grad f|^2   = (1/2) sum_j (Y_j f)^2
//!   Delta f      = -(1/2) sum_j Y_j Y_j f
//!
//! The diagonal products Y_j Y_j f reduce to Hessian contractions
//! v_j^T H v_j with no first-order remainder: the t-coefficients of Y_j vary
//! only through y_j itself and b^s_{jj} = 0.
//!
//! Conformal changes g = e^{2h} g0 = phi^{4/(Q-2)} g0 carry the scalar
//! curvature laws
//!
//!   s = e^{-2h} (2(Q+2) Delta h - ((Q+2)(Q-2)/2) sum_j (Y_j h)^2)
//!   s = phi^{-(Q+2)/(Q-2)} b_n Delta phi
//!
//! and the conformal sublaplacian
//!
//!   Delta_g f = phi^{-4/(Q-2)} (Delta f - sum_j (Y_j phi / phi) Y_j f).

use crate::algebra::B;
use crate::fd;
use crate::heisenberg::{apply_auto, frame_at, h_norm, HeisAuto, HeisPoint};
use crate::rng::substream;
use crate::{homogeneous_dim, yamabe_b};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the calculus layer.
#[derive(Debug, Error, PartialEq)]
pub enum CalculusError {
    #[error("conformal factor must be positive, got {value:.6e}")]
    NonPositiveConformalFactor { value: f64 },
    #[error("denominator estimate degenerate: {estimate:.6e}")]
    DegenerateDenominator { estimate: f64 },
}

/// How a field produces its derivatives.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeMode {
    ClosedForm,
    FiniteDifference,
}

/// A twice-differentiable function on the group with Euclidean derivative
/// access in the flattened (y, t) coordinates.
pub trait ScalarField {
    /// Quaternionic dimension of the domain.
    fn n(&self) -> usize;
    fn eval(&self, p: &HeisPoint) -> f64;
    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64>;
    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>>;
    fn mode(&self) -> DerivativeMode;

    fn dim(&self) -> usize {
        4 * self.n() + 3
    }
}

/// Step for second-difference stencils; wider than the first-order step
/// because second differences lose half the significant digits to roundoff.
pub const DEFAULT_HESS_STEP: f64 = 5e-3;

/// Field defined by an arbitrary evaluation closure; derivatives come from
/// Richardson-extrapolated central differences.
pub struct FnField<F: Fn(&HeisPoint) -> f64> {
    pub n: usize,
    pub f: F,
    pub step_grad: f64,
    pub step_hess: f64,
}

impl<F: Fn(&HeisPoint) -> f64> FnField<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnField {
            n,
            f,
            step_grad: fd::DEFAULT_STEP,
            step_hess: DEFAULT_HESS_STEP,
        }
    }

    fn eval_coords(&self, c: &[f64]) -> f64 {
        (self.f)(&HeisPoint::from_coords(self.n, c))
    }
}

impl<F: Fn(&HeisPoint) -> f64> ScalarField for FnField<F> {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        (self.f)(p)
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let x = p.coords();
        fd::gradient(&|c| self.eval_coords(c), &x, self.step_grad)
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let x = p.coords();
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        fd::hessian(&|c| self.eval_coords(c), &x, self.step_hess * scale)
    }

    fn mode(&self) -> DerivativeMode {
        DerivativeMode::FiniteDifference
    }
}

/// The fourth gauge power N(y, t) = |y|^4 + |t|^2 with closed-form
/// derivatives: grad_y N = 4|y|^2 y, grad_t N = 2t, Hessian blocks
/// 8 y y^T + 4|y|^2 I and 2 I.
pub struct GaugeFourth {
    pub n: usize,
}

impl ScalarField for GaugeFourth {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        p.gauge4()
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let dim = self.dim();
        let ysq = p.y_norm_sq();
        let c = p.coords();
        let mut g = vec![0.0; dim];
        for i in 0..4 * self.n {
            g[i] = 4.0 * ysq * c[i];
        }
        for s in 0..3 {
            g[4 * self.n + s] = 2.0 * p.t[s];
        }
        g
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let ny = 4 * self.n;
        let ysq = p.y_norm_sq();
        let c = p.coords();
        let mut h = vec![vec![0.0; dim]; dim];
        for i in 0..ny {
            for j in 0..ny {
                h[i][j] = 8.0 * c[i] * c[j];
            }
            h[i][i] += 4.0 * ysq;
        }
        for s in 0..3 {
            h[ny + s][ny + s] = 2.0;
        }
        h
    }

    fn mode(&self) -> DerivativeMode {
        DerivativeMode::ClosedForm
    }
}

/// Power of the regularized gauge, (N + eps^2)^expo, with derivatives by
/// the chain rule on [`GaugeFourth`].
pub struct PowerOfShiftedGauge {
    pub gauge: GaugeFourth,
    pub eps2: f64,
    pub expo: f64,
}

impl PowerOfShiftedGauge {
    pub fn new(n: usize, eps2: f64, expo: f64) -> Self {
        PowerOfShiftedGauge {
            gauge: GaugeFourth { n },
            eps2,
            expo,
        }
    }

    fn base(&self, p: &HeisPoint) -> f64 {
        self.gauge.eval(p) + self.eps2
    }
}

impl ScalarField for PowerOfShiftedGauge {
    fn n(&self) -> usize {
        self.gauge.n
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        self.base(p).powf(self.expo)
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let u = self.base(p);
        let du = self.gauge.euclidean_gradient(p);
        let c = self.expo * u.powf(self.expo - 1.0);
        du.iter().map(|g| c * g).collect()
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let u = self.base(p);
        let du = self.gauge.euclidean_gradient(p);
        let mut h = self.gauge.euclidean_hessian(p);
        let c1 = self.expo * u.powf(self.expo - 1.0);
        let c2 = self.expo * (self.expo - 1.0) * u.powf(self.expo - 2.0);
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                h[i][j] = c1 * h[i][j] + c2 * du[i] * du[j];
            }
        }
        h
    }

    fn mode(&self) -> DerivativeMode {
        DerivativeMode::ClosedForm
    }
}

/// coeff * ln(inner), defined where inner > 0.
pub struct LogOfField<S: ScalarField> {
    pub inner: S,
    pub coeff: f64,
}

impl<S: ScalarField> ScalarField for LogOfField<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        self.coeff * self.inner.eval(p).ln()
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let u = self.inner.eval(p);
        let du = self.inner.euclidean_gradient(p);
        du.iter().map(|g| self.coeff * g / u).collect()
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let u = self.inner.eval(p);
        let du = self.inner.euclidean_gradient(p);
        let mut h = self.inner.euclidean_hessian(p);
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                h[i][j] = self.coeff * (h[i][j] / u - du[i] * du[j] / (u * u));
            }
        }
        h
    }

    fn mode(&self) -> DerivativeMode {
        self.inner.mode()
    }
}

/// An affine coordinate map x -> A x + b on R^{4n+3}. Left translations,
/// rotations, dilations and the two-point combination maps
/// xi -> xi^{-1} eta (eta fixed) and eta -> xi^{-1} eta (xi fixed) are all
/// of this form, so pullbacks along them differentiate exactly.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub mat: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffineMap {
    /// Reconstructs the matrix and offset of a map known to be affine by
    /// probing it on the coordinate basis.
    pub fn from_affine_fn(dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let zero = vec![0.0; dim];
        let offset = f(&zero);
        let mut mat = vec![vec![0.0; dim]; dim];
        let mut probe = zero;
        for c in 0..dim {
            probe[c] = 1.0;
            let img = f(&probe);
            probe[c] = 0.0;
            for (r, row) in mat.iter_mut().enumerate() {
                row[c] = img[r] - offset[r];
            }
        }
        AffineMap { mat, offset }
    }

    /// The map xi -> xi^{-1} eta for fixed eta, in flattened coordinates.
    pub fn left_diff_in_first(eta: &HeisPoint) -> Self {
        let n = eta.n();
        let eta = eta.clone();
        Self::from_affine_fn(4 * n + 3, move |c| {
            let xi = HeisPoint::from_coords(n, c);
            crate::heisenberg::left_diff(&xi, &eta).unwrap().coords()
        })
    }

    /// The map eta -> xi^{-1} eta for fixed xi.
    pub fn left_diff_in_second(xi: &HeisPoint) -> Self {
        let n = xi.n();
        let xi = xi.clone();
        Self::from_affine_fn(4 * n + 3, move |c| {
            let eta = HeisPoint::from_coords(n, c);
            crate::heisenberg::left_diff(&xi, &eta).unwrap().coords()
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.offset.clone();
        for (r, row) in self.mat.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                out[r] += a * x[c];
            }
        }
        out
    }
}

/// Pullback inner(A x + b) of a field along an affine map; gradient and
/// Hessian transform by A^T grad and A^T H A with no curvature terms.
pub struct AffinePullback<S: ScalarField> {
    pub inner: S,
    pub map: AffineMap,
}

impl<S: ScalarField> AffinePullback<S> {
    fn image(&self, p: &HeisPoint) -> HeisPoint {
        HeisPoint::from_coords(self.inner.n(), &self.map.apply(&p.coords()))
    }
}

impl<S: ScalarField> ScalarField for AffinePullback<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        self.inner.eval(&self.image(p))
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let g = self.inner.euclidean_gradient(&self.image(p));
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for (r, row) in self.map.mat.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                out[c] += a * g[r];
            }
        }
        out
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let h = self.inner.euclidean_hessian(&self.image(p));
        let dim = self.dim();
        let a = &self.map.mat;
        let mut out = vec![vec![0.0; dim]; dim];
        for c1 in 0..dim {
            for c2 in 0..dim {
                let mut acc = 0.0;
                for (r1, row1) in a.iter().enumerate() {
                    let a1 = row1[c1];
                    if a1 == 0.0 {
                        continue;
                    }
                    for (r2, row2) in a.iter().enumerate() {
                        acc += a1 * h[r1][r2] * row2[c2];
                    }
                }
                out[c1][c2] = acc;
            }
        }
        out
    }

    fn mode(&self) -> DerivativeMode {
        self.inner.mode()
    }
}

/// c * inner.
pub struct ScaledField<S: ScalarField> {
    pub inner: S,
    pub c: f64,
}

impl<S: ScalarField> ScalarField for ScaledField<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        self.c * self.inner.eval(p)
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        self.inner
            .euclidean_gradient(p)
            .iter()
            .map(|g| self.c * g)
            .collect()
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let mut h = self.inner.euclidean_hessian(p);
        for row in &mut h {
            for v in row {
                *v *= self.c;
            }
        }
        h
    }

    fn mode(&self) -> DerivativeMode {
        self.inner.mode()
    }
}

/// Sum of boxed fields over a common domain.
pub struct SumField {
    pub n: usize,
    pub terms: Vec<Box<dyn ScalarField>>,
}

impl ScalarField for SumField {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, p: &HeisPoint) -> f64 {
        self.terms.iter().map(|f| f.eval(p)).sum()
    }

    fn euclidean_gradient(&self, p: &HeisPoint) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for f in &self.terms {
            for (o, g) in out.iter_mut().zip(f.euclidean_gradient(p)) {
                *o += g;
            }
        }
        out
    }

    fn euclidean_hessian(&self, p: &HeisPoint) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut out = vec![vec![0.0; dim]; dim];
        for f in &self.terms {
            let h = f.euclidean_hessian(p);
            for i in 0..dim {
                for j in 0..dim {
                    out[i][j] += h[i][j];
                }
            }
        }
        out
    }

    fn mode(&self) -> DerivativeMode {
        if self
            .terms
            .iter()
            .all(|f| f.mode() == DerivativeMode::ClosedForm)
        {
            DerivativeMode::ClosedForm
        } else {
            DerivativeMode::FiniteDifference
        }
    }
}

/// Frame derivative Y_j f(p).
pub fn horizontal_derivative(f: &dyn ScalarField, j: usize, p: &HeisPoint) -> f64 {
    let grad = f.euclidean_gradient(p);
    let frame = frame_at(p);
    frame.rows[j]
        .iter()
        .zip(grad.iter())
        .map(|(a, b)| a * b)
        .sum()
}

/// All frame derivatives (Y_1 f, ..., Y_{4n} f) at p.
pub fn horizontal_derivatives(f: &dyn ScalarField, p: &HeisPoint) -> Vec<f64> {
    let grad = f.euclidean_gradient(p);
    horizontal_from_gradient(&grad, p)
}

/// Frame contraction of an already-computed Euclidean gradient.
pub fn horizontal_from_gradient(grad: &[f64], p: &HeisPoint) -> Vec<f64> {
    let frame = frame_at(p);
    frame
        .rows
        .iter()
        .map(|row| row.iter().zip(grad.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Sublaplacian -(1/2) sum_j Y_j Y_j f at p; the frame rows contract the
/// Euclidean Hessian exactly.
pub fn sublaplacian(f: &dyn ScalarField, p: &HeisPoint) -> f64 {
    let h = f.euclidean_hessian(p);
    sublaplacian_from_hessian(&h, p)
}

/// Frame contraction of an already-computed Euclidean Hessian.
pub fn sublaplacian_from_hessian(h: &[Vec<f64>], p: &HeisPoint) -> f64 {
    let frame = frame_at(p);
    let mut acc = 0.0;
    for row in &frame.rows {
        for (i, vi) in row.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            for (j, vj) in row.iter().enumerate() {
                if *vj != 0.0 {
                    acc += vi * h[i][j] * vj;
                }
            }
        }
    }
    -0.5 * acc
}

/// Squared horizontal gradient (1/2) sum_j (Y_j f)^2.
pub fn horizontal_gradient_sq(f: &dyn ScalarField, p: &HeisPoint) -> f64 {
    0.5 * horizontal_derivatives(f, p)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
}

/// Scalar curvature of e^{2h} g0.
pub fn conformal_scalar_curvature_exp(h: &dyn ScalarField, p: &HeisPoint) -> f64 {
    let q = homogeneous_dim(h.n());
    let lap = sublaplacian(h, p);
    let raw_grad_sq = 2.0 * horizontal_gradient_sq(h, p);
    let hv = h.eval(p);
    (-2.0 * hv).exp() * (2.0 * (q + 2.0) * lap - (q + 2.0) * (q - 2.0) / 2.0 * raw_grad_sq)
}

/// Scalar curvature of phi^{4/(Q-2)} g0 through the Yamabe equation,
/// phi^{-(Q+2)/(Q-2)} b_n Delta phi.
pub fn conformal_scalar_curvature_phi(
    phi: &dyn ScalarField,
    p: &HeisPoint,
) -> Result<f64, CalculusError> {
    let value = phi.eval(p);
    if value <= 0.0 {
        return Err(CalculusError::NonPositiveConformalFactor { value });
    }
    let q = homogeneous_dim(phi.n());
    let b = yamabe_b(phi.n());
    Ok(value.powf(-(q + 2.0) / (q - 2.0)) * b * sublaplacian(phi, p))
}

/// Sublaplacian of the conformal metric phi^{4/(Q-2)} g0 applied to f,
/// in divergence form with the conformal volume weight.
pub fn conformal_sublaplacian(
    phi: &dyn ScalarField,
    f: &dyn ScalarField,
    p: &HeisPoint,
) -> Result<f64, CalculusError> {
    let pv = phi.eval(p);
    if pv <= 0.0 {
        return Err(CalculusError::NonPositiveConformalFactor { value: pv });
    }
    let q = homogeneous_dim(phi.n());
    let yf = horizontal_derivatives(f, p);
    let yphi = horizontal_derivatives(phi, p);
    let drift: f64 = yphi.iter().zip(yf.iter()).map(|(a, b)| a * b).sum();
    Ok(pv.powf(-4.0 / (q - 2.0)) * (sublaplacian(f, p) - drift / pv))
}

/// Point evaluation bundle of the conformal curvature data of e^{2h} g0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub scalar_curvature: f64,
    pub gradient_norm_sq: f64,
    pub sublaplacian: f64,
}

/// Evaluates curvature, |grad h|^2 and Delta h of e^{2h} g0 at p.
pub fn curvature_report(h: &dyn ScalarField, p: &HeisPoint) -> CurvatureReport {
    CurvatureReport {
        point: p.coords(),
        scalar_curvature: conformal_scalar_curvature_exp(h, p),
        gradient_norm_sq: horizontal_gradient_sq(h, p),
        sublaplacian: sublaplacian(h, p),
    }
}

/// Axis-aligned sampling box in flattened coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleBox {
    pub n: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    /// Cube [-r, r]^{4n+3}.
    pub fn centered(n: usize, r: f64) -> Self {
        let dim = 4 * n + 3;
        SampleBox {
            n,
            lo: vec![-r; dim],
            hi: vec![r; dim],
        }
    }

    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> HeisPoint {
        let c: Vec<f64> = self
            .lo
            .iter()
            .zip(self.hi.iter())
            .map(|(a, b)| rng.gen_range(*a..*b))
            .collect();
        HeisPoint::from_coords(self.n, &c)
    }
}

/// Monte Carlo value of the Yamabe quotient of a compactly supported u.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YamabeQuotient {
    pub value: f64,
    pub numerator: f64,
    pub denominator_integral: f64,
    pub numerator_sigma: f64,
    pub denominator_sigma: f64,
    pub samples: usize,
    pub seed: u64,
}

const MC_BLOCK: usize = 1 << 16;

/// Seeded Monte Carlo estimate of
/// b_n Int |grad u|^2 dV / (Int u^{2Q/(Q-2)} dV)^{(Q-2)/Q}
/// over a box containing the support of u.
pub fn yamabe_quotient(
    u: &dyn ScalarField,
    region: &SampleBox,
    samples: usize,
    seed: u64,
) -> Result<YamabeQuotient, CalculusError> {
    let q = homogeneous_dim(u.n());
    let b = yamabe_b(u.n());
    let crit = 2.0 * q / (q - 2.0);
    let vol = region.volume();

    let mut sum_num = 0.0;
    let mut sum_num2 = 0.0;
    let mut sum_den = 0.0;
    let mut sum_den2 = 0.0;
    let mut done = 0usize;
    let mut block = 0u64;
    while done < samples {
        let take = MC_BLOCK.min(samples - done);
        let mut rng = substream(seed, block);
        for _ in 0..take {
            let p = region.sample(&mut rng);
            let g = horizontal_gradient_sq(u, &p);
            let d = u.eval(&p).abs().powf(crit);
            sum_num += g;
            sum_num2 += g * g;
            sum_den += d;
            sum_den2 += d * d;
        }
        done += take;
        block += 1;
    }

    let m = samples as f64;
    let mean_num = sum_num / m;
    let mean_den = sum_den / m;
    let var_num = (sum_num2 / m - mean_num * mean_num).max(0.0) / m;
    let var_den = (sum_den2 / m - mean_den * mean_den).max(0.0) / m;
    let numerator = b * vol * mean_num;
    let denominator_integral = vol * mean_den;
    if !(denominator_integral > 1e-280) || !denominator_integral.is_finite() {
        return Err(CalculusError::DegenerateDenominator {
            estimate: denominator_integral,
        });
    }
    Ok(YamabeQuotient {
        value: numerator / denominator_integral.powf((q - 2.0) / q),
        numerator,
        denominator_integral,
        numerator_sigma: b * vol * var_num.sqrt(),
        denominator_sigma: vol * var_den.sqrt(),
        samples,
        seed,
    })
}

/// Residual record of one closed-form identity over a point sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub identity: String,
    pub n: usize,
    pub samples: usize,
    pub max_abs: f64,
    pub max_rel: f64,
    pub seed: u64,
}

struct ResidualAcc {
    max_abs: f64,
    max_rel: f64,
}

impl ResidualAcc {
    fn new() -> Self {
        ResidualAcc {
            max_abs: 0.0,
            max_rel: 0.0,
        }
    }

    fn push(&mut self, lhs: f64, rhs: f64) {
        let abs = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs()).max(1e-30);
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(abs / scale);
    }

    fn into_residual(self, identity: &str, n: usize, samples: usize, seed: u64) -> IdentityResidual {
        IdentityResidual {
            identity: identity.to_string(),
            n,
            samples,
            max_abs: self.max_abs,
            max_rel: self.max_rel,
            seed,
        }
    }
}

/// Closed-form identities of the gauge function and the cylinder metric,
/// evaluated over random points. Closed-form entries pit two independent
/// closed-form expressions against each other; the `-fd` entries replace
/// one side by finite differences of a plain evaluation closure.
pub fn identity_suite(n: usize, samples: usize, seed: u64) -> Vec<IdentityResidual> {
    let q = homogeneous_dim(n);
    let gauge = GaugeFourth { n };
    let gauge_fd = FnField::new(n, |p: &HeisPoint| p.gauge4());
    let cyl = LogOfField {
        inner: GaugeFourth { n },
        coeff: -0.25,
    };
    let cyl_fd = FnField::new(n, |p: &HeisPoint| -0.25 * p.gauge4().ln());
    let eps_cases = [0.1f64, 1.0f64];
    let box_ = SampleBox::centered(n, 2.0);
    let mut rng = substream(seed, 0);

    let mut frame_deriv = ResidualAcc::new();
    let mut frame_deriv_fd = ResidualAcc::new();
    let mut grad_sq = ResidualAcc::new();
    let mut sublap = ResidualAcc::new();
    let mut sublap_fd = ResidualAcc::new();
    let mut reg_kernel: Vec<ResidualAcc> = eps_cases.iter().map(|_| ResidualAcc::new()).collect();
    let mut cyl_curv = ResidualAcc::new();
    let mut cyl_curv_fd = ResidualAcc::new();
    let mut cyl_grad_sphere = ResidualAcc::new();

    for _ in 0..samples {
        let p = box_.sample(&mut rng);
        let ysq = p.y_norm_sq();
        let n4 = p.gauge4();
        let c = p.coords();

        // frame derivative of the gauge power:
        // Y_{4l+j} N = 4 |y|^2 y_{4l+j} + 4 sum_{s,k} b^s_{kj} y_{4l+k} t_s
        let yd = horizontal_derivatives(&gauge, &p);
        for l in 0..n {
            let yc = p.y[l].components();
            for j in 0..4 {
                let mut cross = 0.0;
                for s in 0..3 {
                    for (k, yk) in yc.iter().enumerate() {
                        cross += B[s][k][j] * yk * p.t[s];
                    }
                }
                let rhs = 4.0 * ysq * c[4 * l + j] + 4.0 * cross;
                frame_deriv.push(yd[4 * l + j], rhs);
                frame_deriv_fd.push(horizontal_derivative(&gauge_fd, 4 * l + j, &p), rhs);
            }
        }

        // (1/2) sum (Y_j N)^2 = 8 N |y|^2
        grad_sq.push(horizontal_gradient_sq(&gauge, &p), 8.0 * n4 * ysq);

        // Delta N = -2 (Q+2) |y|^2
        let lap_rhs = -2.0 * (q + 2.0) * ysq;
        sublap.push(sublaplacian(&gauge, &p), lap_rhs);
        sublap_fd.push(sublaplacian(&gauge_fd, &p), lap_rhs);

        // Delta (N + eps^2)^{-(Q-2)/4}
        //   = (Q-2)(Q+2) |y|^2 eps^2 / (2 (N + eps^2)^{(Q+6)/4})
        for (acc, &eps) in reg_kernel.iter_mut().zip(eps_cases.iter()) {
            let e2 = eps * eps;
            let f = PowerOfShiftedGauge::new(n, e2, -(q - 2.0) / 4.0);
            let rhs =
                (q - 2.0) * (q + 2.0) * ysq * e2 / (2.0 * (n4 + e2).powf((q + 6.0) / 4.0));
            acc.push(sublaplacian(&f, &p), rhs);
        }

        // scalar curvature of g0 / ||xi||^2:
        //   (Q-2)(Q+2)/2 * |y|^2 / ||xi||^2
        let curv_rhs = (q - 2.0) * (q + 2.0) / 2.0 * ysq / n4.sqrt();
        cyl_curv.push(conformal_scalar_curvature_exp(&cyl, &p), curv_rhs);
        cyl_curv_fd.push(conformal_scalar_curvature_exp(&cyl_fd, &p), curv_rhs);

        // |grad ln(1/||xi||)|^2 in the cylinder metric, on the unit gauge
        // sphere: (1/2) |y|^2
        let unit = apply_auto(&HeisAuto::Dilation(1.0 / h_norm(&p)), &p).unwrap();
        let e2h = (-2.0 * cyl.eval(&unit)).exp();
        cyl_grad_sphere.push(
            e2h * horizontal_gradient_sq(&cyl, &unit),
            0.5 * unit.y_norm_sq(),
        );
    }

    let mut out = vec![
        frame_deriv.into_residual("gauge4-frame-derivative", n, samples, seed),
        frame_deriv_fd.into_residual("gauge4-frame-derivative-fd", n, samples, seed),
        grad_sq.into_residual("gauge4-gradient-square", n, samples, seed),
        sublap.into_residual("gauge4-sublaplacian", n, samples, seed),
        sublap_fd.into_residual("gauge4-sublaplacian-fd", n, samples, seed),
    ];
    for (acc, &eps) in reg_kernel.into_iter().zip(eps_cases.iter()) {
        out.push(acc.into_residual(
            &format!("regularized-kernel-sublaplacian-eps{eps}"),
            n,
            samples,
            seed,
        ));
    }
    out.push(cyl_curv.into_residual("cylinder-scalar-curvature", n, samples, seed));
    out.push(cyl_curv_fd.into_residual("cylinder-scalar-curvature-fd", n, samples, seed));
    out.push(cyl_grad_sphere.into_residual("cylinder-gradient-unit-sphere", n, samples, seed));
    out
}
