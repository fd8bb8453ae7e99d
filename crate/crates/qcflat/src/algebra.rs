//! Quaternion arithmetic, quaternionic vectors and matrices, and the
//! structure matrices identifying Im H with R^3.
//!
//! A quaternion is written q = w + x1 i + x2 j + x3 k. All vector spaces over
//! H are left modules: scalars multiply from the left, matrices act on row
//! vectors from the right, (v g)_l = sum_m v_m g_{ml}. The hyperhermitian
//! form is <q, p> = sum_l q_l conj(p_l).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by quaternion arithmetic.
#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    /// Inverse of a quaternion whose norm is below the working tolerance.
    #[error("quaternion inverse of (near-)zero element, |a| = {norm:.3e}")]
    ZeroDivision { norm: f64 },
}

/// A quaternion w + x1 i + x2 j + x3 k with double-precision coefficients.
#[derive(Copy, Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Quaternion { w, x1, x2, x3 }
    }

    /// Builds w + x1 i + x2 j + x3 k from a real part and an Im H vector.
    pub fn from_re_im(re: f64, im: [f64; 3]) -> Self {
        Quaternion::new(re, im[0], im[1], im[2])
    }

    /// Purely imaginary quaternion t1 i + t2 j + t3 k.
    pub fn from_im(im: [f64; 3]) -> Self {
        Self::from_re_im(0.0, im)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x1, -self.x2, -self.x3)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn im(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn scale(self, c: f64) -> Self {
        Quaternion::new(c * self.w, c * self.x1, c * self.x2, c * self.x3)
    }

    /// Coefficients in the order (w, x1, x2, x3).
    pub fn components(self) -> [f64; 4] {
        [self.w, self.x1, self.x2, self.x3]
    }

    pub fn from_components(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w + rhs.w,
            self.x1 + rhs.x1,
            self.x2 + rhs.x2,
            self.x3 + rhs.x3,
        )
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w - rhs.w,
            self.x1 - rhs.x1,
            self.x2 - rhs.x2,
            self.x3 - rhs.x3,
        )
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x1, -self.x2, -self.x3)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        qmul(self, rhs)
    }
}

impl std::ops::Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

/// Hamilton product ab.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x1 * b.x1 - a.x2 * b.x2 - a.x3 * b.x3,
        a.w * b.x1 + a.x1 * b.w + a.x2 * b.x3 - a.x3 * b.x2,
        a.w * b.x2 - a.x1 * b.x3 + a.x2 * b.w + a.x3 * b.x1,
        a.w * b.x3 + a.x1 * b.x2 - a.x2 * b.x1 + a.x3 * b.w,
    )
}

/// Multiplicative inverse conj(a)/|a|^2.
pub fn qinv(a: Quaternion) -> Result<Quaternion, AlgebraError> {
    let n = a.norm();
    if n <= 1e-300 {
        return Err(AlgebraError::ZeroDivision { norm: n });
    }
    Ok(a.conj().scale(1.0 / a.norm_sq()))
}

/// Splits x into its real part and the Im H coefficient vector (x1, x2, x3).
pub fn im_decompose(x: Quaternion) -> (f64, [f64; 3]) {
    (x.w, [x.x1, x.x2, x.x3])
}

/// The three 4x4 structure matrices b^s, integer entries. `B_INT[s][k][j]`
/// is the (k, j) entry of b^s, so that the s-th component of Im(x conj(x'))
/// equals sum_{k,j} b^s_{kj} x_k x'_j for the real coefficient vectors of x
/// and x'.
pub const B_INT: [[[i64; 4]; 4]; 3] = [
    [
        [0, -1, 0, 0],
        [1, 0, 0, 0],
        [0, 0, 0, -1],
        [0, 0, 1, 0],
    ],
    [
        [0, 0, -1, 0],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
        [0, -1, 0, 0],
    ],
    [
        [0, 0, 0, -1],
        [0, 0, -1, 0],
        [0, 1, 0, 0],
        [1, 0, 0, 0],
    ],
];

/// Structure matrices as floating point, `B[s][k][j]`.
pub const B: [[[f64; 4]; 4]; 3] = {
    let mut out = [[[0.0; 4]; 4]; 3];
    let mut s = 0;
    while s < 3 {
        let mut k = 0;
        while k < 4 {
            let mut j = 0;
            while j < 4 {
                out[s][k][j] = B_INT[s][k][j] as f64;
                j += 1;
            }
            k += 1;
        }
        s += 1;
    }
    out
};

/// A vector with quaternion entries, understood as a row vector of a left
/// quaternionic module.
pub type QuatVector = Vec<Quaternion>;

/// Hyperhermitian inner product <q, p> = sum_l q_l conj(p_l).
pub fn hyperhermitian(q: &[Quaternion], p: &[Quaternion]) -> Quaternion {
    assert_eq!(q.len(), p.len(), "inner product of unequal lengths");
    let mut acc = Quaternion::ZERO;
    for (a, b) in q.iter().zip(p.iter()) {
        acc = acc + qmul(*a, b.conj());
    }
    acc
}

/// Squared Euclidean norm |q|^2 = Re<q, q> of a quaternionic vector.
pub fn qvec_norm_sq(q: &[Quaternion]) -> f64 {
    q.iter().map(|a| a.norm_sq()).sum()
}

/// A dense matrix with quaternion entries, stored row-major. It acts on row
/// vectors from the right: (v g)_l = sum_m v_m g_{ml}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Quaternion::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        QuatMatrix { rows: r, cols: c, data }
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Quaternion) {
        self.data[i * self.cols + j] = v;
    }

    /// Conjugate transpose.
    pub fn conj_t(&self) -> QuatMatrix {
        let mut out = QuatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Matrix product; entry order respects noncommutativity,
    /// (AB)_{il} = sum_m A_{im} B_{ml}.
    pub fn mat_mul(&self, rhs: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = QuatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..rhs.cols {
                let mut acc = Quaternion::ZERO;
                for m in 0..self.cols {
                    acc = acc + qmul(self.get(i, m), rhs.get(m, l));
                }
                out.set(i, l, acc);
            }
        }
        out
    }

    /// Frobenius distance max-entry norm to another matrix.
    pub fn max_entry_dist(&self, rhs: &QuatMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

/// Right action of a matrix on a row vector, (v g)_l = sum_m v_m g_{ml}.
pub fn vec_mat(v: &[Quaternion], g: &QuatMatrix) -> QuatVector {
    assert_eq!(v.len(), g.rows, "row vector length must match matrix rows");
    let mut out = vec![Quaternion::ZERO; g.cols];
    for (l, slot) in out.iter_mut().enumerate() {
        let mut acc = Quaternion::ZERO;
        for (m, vm) in v.iter().enumerate() {
            acc = acc + qmul(*vm, g.get(m, l));
        }
        *slot = acc;
    }
    out
}

/// The s-th component of Im(x conj(x')) written through the structure
/// matrices: sum_{k,j} b^s_{kj} x_k x'_j on real coefficient vectors.
pub fn im_bilinear(s: usize, x: [f64; 4], xp: [f64; 4]) -> f64 {
    let b = &B[s];
    let mut acc = 0.0;
    for k in 0..4 {
        for j in 0..4 {
            acc += b[k][j] * x[k] * xp[j];
        }
    }
    acc
}

/// Worst violation, over a triple of candidate structure matrices, of the
/// relations the b^s must satisfy: antisymmetry, (b^s)^2 = -id, the cyclic
/// products b^r b^s = b^u for (r, s, u) = (0, 1, 2), (1, 2, 0), (2, 0, 1),
/// and agreement of the bilinear form with Im(x conj(x')) on the standard
/// coefficient basis. Zero for the genuine triple; any corrupted entry shows
/// up as an O(1) residual.
pub fn structure_matrix_residual(b: &[[[f64; 4]; 4]; 3]) -> f64 {
    let mat_mul4 = |a: &[[f64; 4]; 4], c: &[[f64; 4]; 4]| {
        let mut out = [[0.0; 4]; 4];
        for k in 0..4 {
            for j in 0..4 {
                for m in 0..4 {
                    out[k][j] += a[k][m] * c[m][j];
                }
            }
        }
        out
    };
    let mut worst: f64 = 0.0;
    for s in 0..3 {
        let sq = mat_mul4(&b[s], &b[s]);
        for k in 0..4 {
            for j in 0..4 {
                worst = worst.max((b[s][k][j] + b[s][j][k]).abs());
                let target = if k == j { -1.0 } else { 0.0 };
                worst = worst.max((sq[k][j] - target).abs());
            }
        }
    }
    for (r, s, u) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let prod = mat_mul4(&b[r], &b[s]);
        for k in 0..4 {
            for j in 0..4 {
                worst = worst.max((prod[k][j] - b[u][k][j]).abs());
            }
        }
    }
    let units = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    for k in 0..4 {
        for j in 0..4 {
            let (_, im) = im_decompose(qmul(units[k], units[j].conj()));
            for s in 0..3 {
                let mut form = 0.0;
                for kk in 0..4 {
                    for jj in 0..4 {
                        form += b[s][kk][jj]
                            * units[k].components()[kk]
                            * units[j].components()[jj];
                    }
                }
                worst = worst.max((form - im[s]).abs());
            }
        }
    }
    worst
}

/// Random unit quaternion: four independent Gaussians normalized.
pub fn random_unit_quaternion<R: rand::Rng>(rng: &mut R) -> Quaternion {
    loop {
        let c: [f64; 4] =
            std::array::from_fn(|_| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let norm_sq: f64 = c.iter().map(|x| x * x).sum();
        if norm_sq > 1e-8 {
            let inv = norm_sq.sqrt().recip();
            return Quaternion::from_components(c.map(|x| x * inv));
        }
    }
}

/// Random symplectic-unitary matrix: independent unit quaternions on the
/// diagonal mixed by one real plane rotation. Spreads over the whole group
/// well enough for invariance sampling, with no exactness claim on the
/// distribution.
pub fn random_unitary<R: rand::Rng>(dim: usize, rng: &mut R) -> QuatMatrix {
    let mut u = QuatMatrix::identity(dim);
    for i in 0..dim {
        u.set(i, i, random_unit_quaternion(rng));
    }
    if dim >= 2 {
        let a = rng.gen_range(0..dim);
        let mut b = rng.gen_range(0..dim - 1);
        if b >= a {
            b += 1;
        }
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut plane = QuatMatrix::identity(dim);
        plane.set(a, a, Quaternion::new(theta.cos(), 0.0, 0.0, 0.0));
        plane.set(a, b, Quaternion::new(theta.sin(), 0.0, 0.0, 0.0));
        plane.set(b, a, Quaternion::new(-theta.sin(), 0.0, 0.0, 0.0));
        plane.set(b, b, Quaternion::new(theta.cos(), 0.0, 0.0, 0.0));
        u = u.mat_mul(&plane);
    }
    u
}
