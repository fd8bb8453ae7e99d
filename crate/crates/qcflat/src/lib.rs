//! Numerics for conformal quaternionic contact geometry on the flat models.
//!
//! The library implements the computable side of the flat qc geometries: the
//! quaternionic Heisenberg group with its gauge norm, automorphism group and
//! horizontal calculus, the 4n+3 sphere with the action of the quaternionic
//! hyperbolic isometry group, Green functions of the conformal sublaplacian,
//! Schottky groups with Patterson-Sullivan measures on the sphere at infinity,
//! and the singular Yamabe-type metrics built from those measures together
//! with the sign of their scalar curvature.
//!
//! Conventions fixed once and used everywhere:
//!
//! * Quaternionic vector spaces are left modules: scalars multiply from the
//!   left and matrices act on row vectors from the right.
//! * The flat metric is normalized so the horizontal frame satisfies
//!   g0(Y_j, Y_k) = 2 delta_jk; consequently |grad f|^2 = (1/2) sum (Y_j f)^2
//!   and the sublaplacian is -(1/2) sum Y_j Y_j f.
//! * The homogeneous dimension is Q = 4n + 6.

pub mod algebra;
pub mod calculus;
pub mod fd;
pub mod green;
pub mod heisenberg;
pub mod kleinian;
pub mod nayatani;
pub mod report;
pub mod rng;
pub mod sphere;

/// Homogeneous dimension of the quaternionic Heisenberg group of dimension n.
pub fn homogeneous_dim(n: usize) -> f64 {
    (4 * n + 6) as f64
}

/// Critical Sobolev-type constant b_n = 4(Q+2)/(Q-2) in front of the
/// sublaplacian of the conformal operator.
pub fn yamabe_b(n: usize) -> f64 {
    let q = homogeneous_dim(n);
    4.0 * (q + 2.0) / (q - 2.0)
}
