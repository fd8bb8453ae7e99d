//! Central finite differences with one step of Richardson extrapolation.
//!
//! All validation paths in the crate use the same stencil: central
//! differences at steps h and h/2 combined to cancel the leading error term.
//! For the smooth rational and polynomial maps of the flat models this gives
//! derivatives accurate to roughly 1e-10 at the default step.

/// Default step for first-order stencils.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Derivative of g at 0 from values at +-h and +-h/2.
pub fn deriv1(mut g: impl FnMut(f64) -> f64, h: f64) -> f64 {
    (8.0 * (g(0.5 * h) - g(-0.5 * h)) - (g(h) - g(-h))) / (6.0 * h)
}

/// Second derivative of g at 0, Richardson-extrapolated central stencil.
pub fn deriv2(mut g: impl FnMut(f64) -> f64, h: f64) -> f64 {
    let g0 = g(0.0);
    let s_full = (g(h) - 2.0 * g0 + g(-h)) / (h * h);
    let s_half = (g(0.5 * h) - 2.0 * g0 + g(-0.5 * h)) / (0.25 * h * h);
    (4.0 * s_half - s_full) / 3.0
}

/// Euclidean gradient of f at x.
pub fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for (i, slot) in out.iter_mut().enumerate() {
        let xi = x[i];
        *slot = deriv1(
            |s| {
                xp[i] = xi + s;
                let v = f(&xp);
                xp[i] = xi;
                v
            },
            h,
        );
    }
    out
}

/// Euclidean Hessian of f at x, symmetric by construction.
pub fn hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut out = vec![vec![0.0; d]; d];
    let mut xp = x.to_vec();
    for i in 0..d {
        let xi = x[i];
        out[i][i] = deriv2(
            |s| {
                xp[i] = xi + s;
                let v = f(&xp);
                xp[i] = xi;
                v
            },
            h,
        );
    }
    let mixed = |xp: &mut Vec<f64>, i: usize, j: usize, hi: f64| {
        let (xi, xj) = (x[i], x[j]);
        let mut eval = |si: f64, sj: f64| {
            xp[i] = xi + si;
            xp[j] = xj + sj;
            let v = f(xp);
            xp[i] = xi;
            xp[j] = xj;
            v
        };
        (eval(hi, hi) - eval(hi, -hi) - eval(-hi, hi) + eval(-hi, -hi)) / (4.0 * hi * hi)
    };
    for i in 0..d {
        for j in (i + 1)..d {
            let full = mixed(&mut xp, i, j, h);
            let half = mixed(&mut xp, i, j, 0.5 * h);
            let v = (4.0 * half - full) / 3.0;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}
