//! The ball model of quaternionic hyperbolic space and its boundary sphere.
//!
//! The isometry group is realized as quaternionic (n+2) x (n+2) matrices
//! preserving the signature form J = diag(-I_{n+1}, +1) in the sense
//! g J conj(g)^t = J. Matrices act projectively on row vectors,
//!
//!   act(g, z)_l = [(z, 1) g]_{n+2}^{-1} [(z, 1) g]_l,
//!
//! which maps the sphere |z| = 1 to itself and the open ball to itself; the
//! boundary conformal factor is |g'(z)| = 1 / |[(z, 1) g]_{n+2}|. The
//! fundamental two-point identity behind every invariance here is
//!
//!   - sum_l w_l conj(w'_l) + w_{n+2} conj(w'_{n+2}) = 1 - <z, z'>
//!
//! for w = (z, 1) g, w' = (z', 1) g. Hyperbolic distance, Buseman
//! functions, the stereographic (Cayley) identification with the Heisenberg
//! group, and the sphere Green kernel are all expressed through it.

use crate::algebra::{
    hyperhermitian, qinv, qmul, qvec_norm_sq, vec_mat, QuatMatrix, QuatVector, Quaternion,
};
use crate::heisenberg::HeisPoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the ball-model layer.
#[derive(Debug, Error, PartialEq)]
pub enum SphereError {
    #[error("cannot normalize a (near-)zero vector to the sphere, |z| = {norm:.3e}")]
    ZeroVector { norm: f64 },
    #[error("point lies outside the open ball, |q|^2 = {norm_sq:.17}")]
    NotInBall { norm_sq: f64 },
    #[error("matrix does not preserve the signature form, residual {residual:.3e}")]
    NonSymplectic { residual: f64 },
    #[error("projective denominator underflow, |w_{{n+2}}| = {abs:.3e}")]
    ProjectiveDenominatorUnderflow { abs: f64 },
    #[error("point is numerically on the boundary sphere, 1 - |q|^2 = {defect:.3e}")]
    BoundaryPoint { defect: f64 },
    #[error("stereographic projection undefined at the south pole, |1 + z_{{n+1}}| = {dist:.3e}")]
    SouthPole { dist: f64 },
    #[error("kernel evaluated on the diagonal, |1 - <p, p'>| = {gap:.3e}")]
    CoincidentPoints { gap: f64 },
    #[error("operands have different dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// A point of S^{4n+3}, stored as n+1 quaternions of unit Euclidean norm;
/// construction renormalizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    zeta: QuatVector,
}

impl SpherePoint {
    pub fn new(zeta: QuatVector) -> Result<Self, SphereError> {
        let norm = qvec_norm_sq(&zeta).sqrt();
        if norm < 1e-12 {
            return Err(SphereError::ZeroVector { norm });
        }
        let zeta = zeta.iter().map(|q| q.scale(1.0 / norm)).collect();
        Ok(SpherePoint { zeta })
    }

    /// North pole (0, ..., 0, 1).
    pub fn north(n: usize) -> Self {
        let mut zeta = vec![Quaternion::ZERO; n + 1];
        zeta[n] = Quaternion::ONE;
        SpherePoint { zeta }
    }

    pub fn coords(&self) -> &[Quaternion] {
        &self.zeta
    }

    /// Quaternionic dimension n of the underlying group model.
    pub fn n(&self) -> usize {
        self.zeta.len() - 1
    }
}

/// A point of the open unit ball in H^{n+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    q: QuatVector,
}

impl BallPoint {
    pub fn new(q: QuatVector) -> Result<Self, SphereError> {
        let norm_sq = qvec_norm_sq(&q);
        if norm_sq >= 1.0 {
            return Err(SphereError::NotInBall { norm_sq });
        }
        Ok(BallPoint { q })
    }

    pub fn origin(n: usize) -> Self {
        BallPoint {
            q: vec![Quaternion::ZERO; n + 1],
        }
    }

    pub fn coords(&self) -> &[Quaternion] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len() - 1
    }

    pub fn norm_sq(&self) -> f64 {
        qvec_norm_sq(&self.q)
    }
}

/// An isometry of the ball model; wraps a matrix that passes [`sp_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpElement {
    gamma: QuatMatrix,
}

/// The signature matrix J = diag(-I_{n+1}, +1) of size m = n+2.
pub fn signature_matrix(m: usize) -> QuatMatrix {
    let mut j = QuatMatrix::zeros(m, m);
    for i in 0..m - 1 {
        j.set(i, i, -Quaternion::ONE);
    }
    j.set(m - 1, m - 1, Quaternion::ONE);
    j
}

/// Residual and verdict of the membership identity g J conj(g)^t = J.
pub fn sp_check(gamma: &QuatMatrix) -> (bool, f64) {
    assert_eq!(gamma.rows, gamma.cols, "membership check needs a square matrix");
    let j = signature_matrix(gamma.rows);
    let residual = gamma.mat_mul(&j).mat_mul(&gamma.conj_t()).max_entry_dist(&j);
    (residual < 1e-10, residual)
}

impl SpElement {
    pub fn new(gamma: QuatMatrix) -> Result<Self, SphereError> {
        let (ok, residual) = sp_check(&gamma);
        if !ok {
            return Err(SphereError::NonSymplectic { residual });
        }
        Ok(SpElement { gamma })
    }

    /// Wraps a matrix already known to satisfy the form constraint to
    /// working precision, e.g. the output of a reorthogonalization step.
    pub fn new_unchecked(gamma: QuatMatrix) -> Self {
        SpElement { gamma }
    }

    pub fn identity(n: usize) -> Self {
        SpElement {
            gamma: QuatMatrix::identity(n + 2),
        }
    }

    pub fn matrix(&self) -> &QuatMatrix {
        &self.gamma
    }

    /// Quaternionic dimension n of the boundary model.
    pub fn n(&self) -> usize {
        self.gamma.rows - 2
    }

    /// Exact inverse J conj(g)^t J of a form-preserving matrix.
    pub fn inverse(&self) -> SpElement {
        let j = signature_matrix(self.gamma.rows);
        SpElement {
            gamma: j.mat_mul(&self.gamma.conj_t()).mat_mul(&j),
        }
    }

    /// Matrix product self * rhs, which acts as "apply self first, then
    /// rhs": act(self.then(rhs), z) = act(rhs, act(self, z)).
    pub fn then(&self, rhs: &SpElement) -> SpElement {
        SpElement {
            gamma: self.gamma.mat_mul(&rhs.gamma),
        }
    }

    pub fn sp_residual(&self) -> f64 {
        sp_check(&self.gamma).1
    }

    /// Serializable record: row-major quaternion 4-tuples plus the
    /// membership residual.
    pub fn export_record(&self) -> SpElementRecord {
        SpElementRecord {
            size: self.gamma.rows,
            entries: self.gamma.data.iter().map(|q| q.components()).collect(),
            sp_residual: self.sp_residual(),
        }
    }

    pub fn from_record(rec: &SpElementRecord) -> Result<Self, SphereError> {
        let data = rec
            .entries
            .iter()
            .map(|c| Quaternion::from_components(*c))
            .collect();
        SpElement::new(QuatMatrix {
            rows: rec.size,
            cols: rec.size,
            data,
        })
    }
}

/// JSON shape of a group element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpElementRecord {
    pub size: usize,
    pub entries: Vec<[f64; 4]>,
    pub sp_residual: f64,
}

/// Image of the extended row (z, 1) under gamma, before projectivization.
fn extended_image(gamma: &SpElement, z: &[Quaternion]) -> QuatVector {
    let mut row = z.to_vec();
    row.push(Quaternion::ONE);
    vec_mat(&row, &gamma.gamma)
}

/// Projective action on raw coordinates, no renormalization of the result.
pub fn act_raw(gamma: &SpElement, z: &[Quaternion]) -> Result<QuatVector, SphereError> {
    if z.len() + 1 != gamma.gamma.rows {
        return Err(SphereError::DimensionMismatch {
            left: z.len() + 1,
            right: gamma.gamma.rows,
        });
    }
    let w = extended_image(gamma, z);
    let denom = w[z.len()];
    let abs = denom.norm();
    if abs < 1e-12 {
        return Err(SphereError::ProjectiveDenominatorUnderflow { abs });
    }
    let inv = qinv(denom).expect("denominator checked above");
    Ok(w[..z.len()].iter().map(|q| qmul(inv, *q)).collect())
}

/// Action on a sphere point.
pub fn act(gamma: &SpElement, zeta: &SpherePoint) -> Result<SpherePoint, SphereError> {
    SpherePoint::new(act_raw(gamma, &zeta.zeta)?)
}

/// Action on a ball point.
pub fn act_ball(gamma: &SpElement, q: &BallPoint) -> Result<BallPoint, SphereError> {
    BallPoint::new(act_raw(gamma, &q.q)?)
}

/// Boundary conformal factor |gamma'(zeta)| = 1 / |[(zeta,1) gamma]_{n+2}|.
pub fn conformal_factor(gamma: &SpElement, zeta: &SpherePoint) -> Result<f64, SphereError> {
    let w = extended_image(gamma, &zeta.zeta);
    let abs = w[zeta.zeta.len()].norm();
    if abs < 1e-12 {
        return Err(SphereError::ProjectiveDenominatorUnderflow { abs });
    }
    Ok(1.0 / abs)
}

/// The point-pair invariant |(q, p)| = |1 - <q, p>| / ((1-|q|^2)(1-|p|^2))^{1/2}.
pub fn pairing_abs(p: &BallPoint, q: &BallPoint) -> Result<f64, SphereError> {
    let dp = 1.0 - qvec_norm_sq(&p.q);
    let dq = 1.0 - qvec_norm_sq(&q.q);
    if dp < 1e-14 {
        return Err(SphereError::BoundaryPoint { defect: dp });
    }
    if dq < 1e-14 {
        return Err(SphereError::BoundaryPoint { defect: dq });
    }
    let one_minus = Quaternion::ONE - hyperhermitian(&q.q, &p.q);
    Ok(one_minus.norm() / (dp * dq).sqrt())
}

/// Hyperbolic distance d(p, q) = 2 arccosh |(q, p)|.
pub fn hyp_distance(p: &BallPoint, q: &BallPoint) -> Result<f64, SphereError> {
    let c = pairing_abs(p, q)?.max(1.0);
    Ok(2.0 * c.acosh())
}

/// Distance from the ball origin to act(gamma, q), computed from matrix
/// data: cosh(d/2) = |[(q,1) gamma]_{n+2}| / (1 - |q|^2)^{1/2}. Stays
/// finite-precision-stable when the image point rounds onto the boundary.
pub fn dist_origin_act(gamma: &SpElement, q: &BallPoint) -> Result<f64, SphereError> {
    let dq = 1.0 - qvec_norm_sq(&q.q);
    if dq < 1e-14 {
        return Err(SphereError::BoundaryPoint { defect: dq });
    }
    let w = extended_image(gamma, &q.q);
    let c = (w[q.q.len()].norm() / dq.sqrt()).max(1.0);
    Ok(2.0 * c.acosh())
}

/// Distance from the origin to its image, d(0, gamma(0)) =
/// 2 arccosh |gamma_{n+2,n+2}|.
pub fn dist_origin_orbit(gamma: &SpElement) -> f64 {
    let m = gamma.gamma.rows;
    2.0 * gamma.gamma.get(m - 1, m - 1).norm().max(1.0).acosh()
}

/// Distance d(q, gamma(q)). The boundary defect of the image is replaced
/// through 1 - |gamma q|^2 = (1 - |q|^2) / |w_{n+2}|^2, so the formula
/// stays stable when the image rounds onto the boundary.
pub fn dist_pair_act(gamma: &SpElement, q: &BallPoint) -> Result<f64, SphereError> {
    let dq = 1.0 - qvec_norm_sq(&q.q);
    if dq < 1e-14 {
        return Err(SphereError::BoundaryPoint { defect: dq });
    }
    let w = extended_image(gamma, &q.q);
    let m = q.q.len();
    let denom = w[m];
    let dinv = match qinv(denom) {
        Ok(d) => d,
        Err(_) => {
            return Err(SphereError::ProjectiveDenominatorUnderflow { abs: denom.norm() })
        }
    };
    let image: QuatVector = (0..m).map(|l| qmul(dinv, w[l])).collect();
    let one_minus = Quaternion::ONE - hyperhermitian(&q.q, &image);
    let c = (one_minus.norm() * denom.norm() / dq).max(1.0);
    Ok(2.0 * c.acosh())
}

/// Spherical gauge distance |1 - <a, b>|^{1/2} between boundary points.
pub fn gauge_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    (Quaternion::ONE - hyperhermitian(&a.zeta, &b.zeta)).norm().sqrt()
}

/// Buseman function rho_{p,xi}(q) =
/// ln( |1-<p,p>| |1-<q,xi>|^2 / (|1-<q,q>| |1-<p,xi>|^2) ).
pub fn buseman(p: &BallPoint, xi: &SpherePoint, q: &BallPoint) -> f64 {
    let num = (1.0 - qvec_norm_sq(&p.q))
        * (Quaternion::ONE - hyperhermitian(&q.q, &xi.zeta)).norm_sq();
    let den = (1.0 - qvec_norm_sq(&q.q))
        * (Quaternion::ONE - hyperhermitian(&p.q, &xi.zeta)).norm_sq();
    (num / den).ln()
}

/// Stereographic projection to the group model: q = (1+z_{n+1})^{-1} z,
/// t = 2 Im z_{n+1} / |1+z_{n+1}|^2. Undefined at the south pole.
pub fn cayley(zeta: &SpherePoint) -> Result<HeisPoint, SphereError> {
    let n = zeta.n();
    let last = zeta.zeta[n];
    let shift = Quaternion::ONE + last;
    let dist = shift.norm();
    if dist < 1e-12 {
        return Err(SphereError::SouthPole { dist });
    }
    let inv = qinv(shift).expect("south pole checked above");
    let y = zeta.zeta[..n].iter().map(|z| qmul(inv, *z)).collect();
    let im = last.im();
    let d2 = shift.norm_sq();
    Ok(HeisPoint::new(
        y,
        [2.0 * im[0] / d2, 2.0 * im[1] / d2, 2.0 * im[2] / d2],
    ))
}

/// Inverse stereographic projection. With u = |y|^2 - t as a quaternion,
/// z_{n+1} = (1-u)(1+u)^{-1} and z_l = 2 (1+u)^{-1} y_l.
pub fn cayley_inv(p: &HeisPoint) -> SpherePoint {
    let u = Quaternion::from_re_im(p.y_norm_sq(), [-p.t[0], -p.t[1], -p.t[2]]);
    let shift_inv = qinv(Quaternion::ONE + u).expect("Re(1+u) >= 1");
    let mut zeta: QuatVector = p
        .y
        .iter()
        .map(|y| qmul(shift_inv, *y).scale(2.0))
        .collect();
    zeta.push(qmul(Quaternion::ONE - u, shift_inv));
    SpherePoint::new(zeta).expect("image of the inverse projection is on the sphere")
}

/// Conformal factor lambda(zeta) of the stereographic projection in the
/// metric sense F* g0 = lambda g_S, namely 1 / (2 |1 + z_{n+1}|^2).
pub fn cayley_metric_factor(zeta: &SpherePoint) -> Result<f64, SphereError> {
    let last = zeta.zeta[zeta.n()];
    let shift = Quaternion::ONE + last;
    if shift.norm() < 1e-12 {
        return Err(SphereError::SouthPole { dist: shift.norm() });
    }
    Ok(1.0 / (2.0 * shift.norm_sq()))
}

/// Hyperbolic translation of length T along the axis through the first
/// ball coordinate: cosh/sinh(T/2) mixing coordinates 1 and n+2.
pub fn boost(n: usize, t: f64) -> SpElement {
    let m = n + 2;
    let mut g = QuatMatrix::identity(m);
    let c = (0.5 * t).cosh();
    let s = (0.5 * t).sinh();
    g.set(0, 0, Quaternion::new(c, 0.0, 0.0, 0.0));
    g.set(0, m - 1, Quaternion::new(s, 0.0, 0.0, 0.0));
    g.set(m - 1, 0, Quaternion::new(s, 0.0, 0.0, 0.0));
    g.set(m - 1, m - 1, Quaternion::new(c, 0.0, 0.0, 0.0));
    SpElement { gamma: g }
}

/// Embeds U in Sp(n+1) as the block-diagonal isometry diag(U, 1).
pub fn rotation_elem(u: &QuatMatrix) -> Result<SpElement, SphereError> {
    assert_eq!(u.rows, u.cols, "rotation block must be square");
    let m = u.rows + 1;
    let residual = u
        .mat_mul(&u.conj_t())
        .max_entry_dist(&QuatMatrix::identity(u.rows));
    if residual > 1e-10 {
        return Err(SphereError::NonSymplectic { residual });
    }
    let mut g = QuatMatrix::identity(m);
    for i in 0..u.rows {
        for j in 0..u.cols {
            g.set(i, j, u.get(i, j));
        }
    }
    SpElement::new(g)
}

/// Conjugated element g^{-1} h g, acting pointwise as g . h . g^{-1}; it
/// keeps the translation length of h and moves its axis by g.
pub fn conjugate(g: &SpElement, h: &SpElement) -> SpElement {
    SpElement {
        gamma: g
            .inverse()
            .gamma
            .mat_mul(&h.gamma)
            .mat_mul(&g.gamma),
    }
}

/// The sphere Green kernel with an explicitly supplied normalization
/// constant: c_q (4 |1 - <p, p'>|)^{-(Q-2)/2}.
pub fn sphere_green_with(
    c_q: f64,
    n: usize,
    p: &SpherePoint,
    pp: &SpherePoint,
) -> Result<f64, SphereError> {
    let q = crate::homogeneous_dim(n);
    let gap = (Quaternion::ONE - hyperhermitian(&p.zeta, &pp.zeta)).norm();
    if gap < 1e-14 {
        return Err(SphereError::CoincidentPoints { gap });
    }
    Ok(c_q * (4.0 * gap).powf(-(q - 2.0) / 2.0))
}

/// Projection of v onto the horizontal space H_z = {v : <v, z> = 0},
/// removing the quaternionic line through z.
pub fn horizontal_project(zeta: &SpherePoint, v: &[Quaternion]) -> QuatVector {
    let c = hyperhermitian(v, &zeta.zeta);
    v.iter()
        .zip(zeta.zeta.iter())
        .map(|(vi, zi)| *vi - qmul(c, *zi))
        .collect()
}

/// Pseudorandom isometry built as rotation, boost, rotation. Each rotation
/// combines independent unit-quaternion diagonal entries with one real plane
/// rotation, which reaches generic elements for invariance sampling.
pub fn random_sp_element<R: rand::Rng>(n: usize, rng: &mut R) -> SpElement {
    let rot = |rng: &mut R| {
        rotation_elem(&crate::algebra::random_unitary(n + 1, rng))
            .expect("unitary by construction")
    };
    let t = rng.gen_range(0.25..1.5);
    rot(rng).then(&boost(n, t)).then(&rot(rng))
}

/// Residual of the fundamental two-point identity: for w = (a, 1) g and
/// w' = (b, 1) g,
///
///   - sum_{l <= n+1} w_l conj(w'_l) + w_{n+2} conj(w'_{n+2}) = 1 - <a, b>,
///
/// quaternion-valued on both sides. Vanishes exactly when g preserves the
/// signature form, for any pair of rows a, b.
pub fn q_form_residual(gamma: &SpElement, a: &[Quaternion], b: &[Quaternion]) -> f64 {
    let w = extended_image(gamma, a);
    let wp = extended_image(gamma, b);
    let m = a.len();
    let mut lhs = qmul(w[m], wp[m].conj());
    for l in 0..m {
        lhs = lhs - qmul(w[l], wp[l].conj());
    }
    let rhs = Quaternion::ONE - hyperhermitian(a, b);
    (lhs - rhs).norm()
}

/// Uniform random point of the boundary sphere: normalized Gaussian
/// coordinates.
pub fn random_sphere_point<R: rand::Rng>(n: usize, rng: &mut R) -> SpherePoint {
    loop {
        let mut zeta = Vec::with_capacity(n + 1);
        for _ in 0..n + 1 {
            let c: [f64; 4] =
                std::array::from_fn(|_| rng.sample::<f64, _>(rand_distr::StandardNormal));
            zeta.push(Quaternion::from_components(c));
        }
        if let Ok(p) = SpherePoint::new(zeta) {
            return p;
        }
    }
}
