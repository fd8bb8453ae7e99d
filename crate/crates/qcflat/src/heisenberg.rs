//! The quaternionic Heisenberg group.
//!
//! Points are pairs (y, t) with y in H^n and t in R^3 standing for the
//! Im H coefficients. The group law is
//!
//!   (y, t) * (y', t') = (y + y', t + t' + 2 Im(y . conj(y')))
//!
//! with the hyperhermitian pairing y . conj(y') = sum_l y_l conj(y'_l). The
//! gauge norm is ||(y,t)|| = (|y|^4 + |t|^2)^{1/4} and the homogeneous
//! dimension is Q = 4n + 6. Automorphisms are generated by dilations, left
//! translations, Sp(n) rotations, unit-quaternion Sp(1) actions and the
//! conformal inversion; each carries a conformal factor lambda with
//! a* g0 = lambda g0.

use crate::algebra::{
    hyperhermitian, im_bilinear, qinv, qmul, qvec_norm_sq, vec_mat, QuatMatrix, QuatVector,
    Quaternion, B,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by Heisenberg group operations.
#[derive(Debug, Error, PartialEq)]
pub enum HeisError {
    #[error("operands live on different groups: n = {left} vs n = {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("inversion is undefined at the group origin")]
    InversionAtOrigin,
    #[error("gauge norm {norm:.6e} outside the gluing annulus ({t:.6e}, 1)")]
    OutOfAnnulus { norm: f64, t: f64 },
    #[error("rotation block is not symplectic-unitary, residual {residual:.3e}")]
    NonUnitaryRotation { residual: f64 },
    #[error("dilation parameter must be positive, got {delta}")]
    NonPositiveDilation { delta: f64 },
}

/// A point (y, t) of the quaternionic Heisenberg group of dimension n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisPoint {
    pub y: QuatVector,
    pub t: [f64; 3],
}

impl HeisPoint {
    pub fn new(y: QuatVector, t: [f64; 3]) -> Self {
        HeisPoint { y, t }
    }

    pub fn origin(n: usize) -> Self {
        HeisPoint {
            y: vec![Quaternion::ZERO; n],
            t: [0.0; 3],
        }
    }

    /// Quaternionic dimension n.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Group inverse (-y, -t).
    pub fn inverse(&self) -> Self {
        HeisPoint {
            y: self.y.iter().map(|q| -*q).collect(),
            t: [-self.t[0], -self.t[1], -self.t[2]],
        }
    }

    /// Squared Euclidean norm |y|^2 of the horizontal part.
    pub fn y_norm_sq(&self) -> f64 {
        qvec_norm_sq(&self.y)
    }

    /// Fourth power of the gauge norm, |y|^4 + |t|^2.
    pub fn gauge4(&self) -> f64 {
        let ysq = self.y_norm_sq();
        ysq * ysq + self.t.iter().map(|a| a * a).sum::<f64>()
    }

    /// Flattens to real coordinates (y_1..y_{4n}, t_1, t_2, t_3).
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.n() + 3);
        for q in &self.y {
            out.extend_from_slice(&q.components());
        }
        out.extend_from_slice(&self.t);
        out
    }

    /// Rebuilds a point from flattened coordinates.
    pub fn from_coords(n: usize, c: &[f64]) -> Self {
        assert_eq!(c.len(), 4 * n + 3, "coordinate length must be 4n+3");
        let y = (0..n)
            .map(|l| Quaternion::new(c[4 * l], c[4 * l + 1], c[4 * l + 2], c[4 * l + 3]))
            .collect();
        HeisPoint {
            y,
            t: [c[4 * n], c[4 * n + 1], c[4 * n + 2]],
        }
    }
}

/// Group multiplication p * q.
pub fn h_mul(p: &HeisPoint, q: &HeisPoint) -> Result<HeisPoint, HeisError> {
    if p.n() != q.n() {
        return Err(HeisError::DimensionMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    let y: QuatVector = p.y.iter().zip(q.y.iter()).map(|(a, b)| *a + *b).collect();
    let im = hyperhermitian(&p.y, &q.y).im();
    let t = [
        p.t[0] + q.t[0] + 2.0 * im[0],
        p.t[1] + q.t[1] + 2.0 * im[1],
        p.t[2] + q.t[2] + 2.0 * im[2],
    ];
    Ok(HeisPoint { y, t })
}

/// Group inverse.
pub fn h_inv(p: &HeisPoint) -> HeisPoint {
    p.inverse()
}

/// The combination xi^{-1} eta entering every two-point kernel.
pub fn left_diff(xi: &HeisPoint, eta: &HeisPoint) -> Result<HeisPoint, HeisError> {
    h_mul(&h_inv(xi), eta)
}

/// Gauge norm (|y|^4 + |t|^2)^{1/4}.
pub fn h_norm(p: &HeisPoint) -> f64 {
    p.gauge4().powf(0.25)
}

/// A qc automorphism of the group, applied through [`apply_auto`].
#[derive(Clone, Debug)]
pub enum HeisAuto {
    /// Anisotropic dilation (y, t) -> (delta y, delta^2 t), delta > 0.
    Dilation(f64),
    /// Left translation by a fixed group element.
    LeftTranslation(HeisPoint),
    /// Right action y -> yU of a symplectic-unitary matrix, t unchanged.
    Rotation(QuatMatrix),
    /// Unit quaternion action (y, t) -> (sigma y, sigma t sigma^{-1}).
    Sp1(Quaternion),
    /// Conformal inversion (y, t) -> (-(|y|^2 - t)^{-1} y, -t / ||.||^4).
    Inversion,
    /// Composition, applied right to left: [a, b] maps p to a(b(p)).
    Composition(Vec<HeisAuto>),
}

/// Residual of the symplectic-unitary condition U conj(U)^t = I.
pub fn sp_n_residual(u: &QuatMatrix) -> f64 {
    u.mat_mul(&u.conj_t())
        .max_entry_dist(&QuatMatrix::identity(u.rows))
}

/// Checks the structural constraints of an automorphism: positive dilation
/// parameters and rotation blocks unitary to 1e-10.
pub fn validate_auto(a: &HeisAuto) -> Result<(), HeisError> {
    match a {
        HeisAuto::Dilation(delta) => {
            if *delta <= 0.0 {
                return Err(HeisError::NonPositiveDilation { delta: *delta });
            }
        }
        HeisAuto::Rotation(u) => {
            let residual = sp_n_residual(u);
            if residual > 1e-10 {
                return Err(HeisError::NonUnitaryRotation { residual });
            }
        }
        HeisAuto::Composition(list) => {
            for item in list {
                validate_auto(item)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn unit_sigma(sigma: Quaternion) -> Quaternion {
    sigma.scale(1.0 / sigma.norm())
}

/// Applies an automorphism to a point.
pub fn apply_auto(a: &HeisAuto, p: &HeisPoint) -> Result<HeisPoint, HeisError> {
    match a {
        HeisAuto::Dilation(delta) => Ok(HeisPoint {
            y: p.y.iter().map(|q| q.scale(*delta)).collect(),
            t: [
                delta * delta * p.t[0],
                delta * delta * p.t[1],
                delta * delta * p.t[2],
            ],
        }),
        HeisAuto::LeftTranslation(q) => h_mul(q, p),
        HeisAuto::Rotation(u) => Ok(HeisPoint {
            y: vec_mat(&p.y, u),
            t: p.t,
        }),
        HeisAuto::Sp1(sigma) => {
            let s = unit_sigma(*sigma);
            let y = p.y.iter().map(|q| qmul(s, *q)).collect();
            let t_quat = qmul(qmul(s, Quaternion::from_im(p.t)), s.conj());
            Ok(HeisPoint { y, t: t_quat.im() })
        }
        HeisAuto::Inversion => {
            let n4 = p.gauge4();
            if n4 == 0.0 {
                return Err(HeisError::InversionAtOrigin);
            }
            // (|y|^2 - t)^{-1} = (|y|^2 + t) / (|y|^4 + |t|^2)
            let denom = Quaternion::from_re_im(p.y_norm_sq(), [-p.t[0], -p.t[1], -p.t[2]]);
            let inv = qinv(denom).map_err(|_| HeisError::InversionAtOrigin)?;
            let y = p.y.iter().map(|q| -qmul(inv, *q)).collect();
            let t = [-p.t[0] / n4, -p.t[1] / n4, -p.t[2] / n4];
            Ok(HeisPoint { y, t })
        }
        HeisAuto::Composition(list) => {
            let mut cur = p.clone();
            for item in list.iter().rev() {
                cur = apply_auto(item, &cur)?;
            }
            Ok(cur)
        }
    }
}

/// The scalar lambda(p) with a* g0 = lambda(p) g0 at p.
pub fn auto_conformal_factor(a: &HeisAuto, p: &HeisPoint) -> Result<f64, HeisError> {
    match a {
        HeisAuto::Dilation(delta) => Ok(delta * delta),
        HeisAuto::LeftTranslation(_) | HeisAuto::Rotation(_) | HeisAuto::Sp1(_) => Ok(1.0),
        HeisAuto::Inversion => {
            let n4 = p.gauge4();
            if n4 == 0.0 {
                return Err(HeisError::InversionAtOrigin);
            }
            Ok(1.0 / n4)
        }
        HeisAuto::Composition(list) => {
            let mut cur = p.clone();
            let mut lambda = 1.0;
            for item in list.iter().rev() {
                lambda *= auto_conformal_factor(item, &cur)?;
                cur = apply_auto(item, &cur)?;
            }
            Ok(lambda)
        }
    }
}

/// Coordinate coefficients of the left-invariant horizontal frame at a
/// point. Row j (j = 0..4n) holds the R^{4n+3} components of Y_j: the
/// y-part is the j-th unit vector, the t_s part is 2 sum_k b^s_{kj} y_{4l+k}
/// within the quaternionic block l containing j.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalFrameCoeffs {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Horizontal frame coefficients at p.
pub fn frame_at(p: &HeisPoint) -> HorizontalFrameCoeffs {
    let n = p.n();
    let dim = 4 * n + 3;
    let mut rows = vec![vec![0.0; dim]; 4 * n];
    for l in 0..n {
        let yc = p.y[l].components();
        for j in 0..4 {
            let row = &mut rows[4 * l + j];
            row[4 * l + j] = 1.0;
            for s in 0..3 {
                let mut acc = 0.0;
                for (k, ycomp) in yc.iter().enumerate() {
                    acc += B[s][k][j] * ycomp;
                }
                row[4 * n + s] = 2.0 * acc;
            }
        }
    }
    HorizontalFrameCoeffs { n, rows }
}

/// The standard contact form triple evaluated on a coordinate tangent
/// vector v at p:
///
///   theta_s(v) = (1/2) (v_{t_s} - 2 sum_{l,j,k} b^s_{kj} y_{4l+k} v_{y_{4l+j}}).
///
/// It vanishes on the horizontal frame and pairs the Reeb directions to 1/2.
pub fn contact_form(p: &HeisPoint, v: &[f64]) -> [f64; 3] {
    let n = p.n();
    assert_eq!(v.len(), 4 * n + 3, "tangent vector length must be 4n+3");
    let mut out = [0.0; 3];
    for (s, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        for l in 0..n {
            let yc = p.y[l].components();
            for j in 0..4 {
                let mut coeff = 0.0;
                for (k, ycomp) in yc.iter().enumerate() {
                    coeff += B[s][k][j] * ycomp;
                }
                sum += coeff * v[4 * l + j];
            }
        }
        *slot = 0.5 * (v[4 * n + s] - 2.0 * sum);
    }
    out
}

/// Transition map of the connected-sum gluing: D_t . R . sigma . A applied
/// to points of the annulus t < ||p|| < 1. The gauge norm of the image is
/// t / ||p||, exchanging the two boundary spheres of the annulus.
pub fn glue_map(
    t: f64,
    sigma: Quaternion,
    a: &QuatMatrix,
    p: &HeisPoint,
) -> Result<HeisPoint, HeisError> {
    assert!(t > 0.0 && t < 1.0, "gluing parameter must lie in (0, 1)");
    let norm = h_norm(p);
    if !(norm > t && norm < 1.0) {
        return Err(HeisError::OutOfAnnulus { norm, t });
    }
    let composite = glue_auto(t, sigma, a);
    validate_auto(&composite)?;
    apply_auto(&composite, p)
}

/// The gluing transition as a reusable automorphism.
pub fn glue_auto(t: f64, sigma: Quaternion, a: &QuatMatrix) -> HeisAuto {
    HeisAuto::Composition(vec![
        HeisAuto::Dilation(t),
        HeisAuto::Inversion,
        HeisAuto::Sp1(sigma),
        HeisAuto::Rotation(a.clone()),
    ])
}

/// The s-th component of 2 Im(y . conj(y')) evaluated through the structure
/// matrices on real coordinates, used to cross-check the group law.
pub fn group_law_t_term(s: usize, y: &[Quaternion], yp: &[Quaternion]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in y.iter().zip(yp.iter()) {
        acc += im_bilinear(s, a.components(), b.components());
    }
    2.0 * acc
}

/// Random automorphism: a composition of `len` draws among dilations, left
/// translations, unitary rotations, Sp(1) twists, and the inversion.
pub fn random_auto<R: rand::Rng>(n: usize, len: usize, rng: &mut R) -> HeisAuto {
    let mut parts = Vec::with_capacity(len);
    for _ in 0..len {
        parts.push(match rng.gen_range(0..5) {
            0 => HeisAuto::Dilation(rng.gen_range(0.5..2.0)),
            1 => {
                let y = (0..n)
                    .map(|_| {
                        Quaternion::from_components(std::array::from_fn(|_| {
                            rng.gen_range(-1.0..1.0)
                        }))
                    })
                    .collect();
                let t = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                HeisAuto::LeftTranslation(HeisPoint::new(y, t))
            }
            2 => HeisAuto::Rotation(crate::algebra::random_unitary(n, rng)),
            3 => HeisAuto::Sp1(crate::algebra::random_unit_quaternion(rng)),
            _ => HeisAuto::Inversion,
        });
    }
    HeisAuto::Composition(parts)
}
