//! Invariant conformal density built from an atomic boundary measure and
//! the sign of the scalar curvature of the metric it induces.
//!
//! Given atoms (zeta_i, w_i) on the sphere and an exponent delta, the
//! density is the kappa-average phi(xi) = (sum_i w_i G_S(xi, zeta_i)^
//! kappa)^{1/kappa} with kappa = 2 delta / (Q - 2). All curvature work
//! happens on the group side: atoms are transported through the Cayley
//! chart, each weight picks up the chart factor (2 |1 + zeta_{n+1}|^2)^
//! {-delta/2}, and the conformal exponent f = (1/delta) ln sum_i w~_i
//! phi_{eta_i}^{-delta} is assembled as a closed-form field, so both
//! curvature routes below are finite-difference free.
//!
//! The two routes: the covariance route evaluates 8 (n+2) (n+1-delta/2)
//! e^{-2f} Tr A with A the covariance matrix of the horizontal
//! log-derivatives of phi_eta under the tilted atomic weights nu_i
//! proportional to w~_i phi_{eta_i}^{-delta}; the conformal route feeds f
//! directly into the scalar curvature of e^{2f} g0. They are equal in
//! exact arithmetic, so their agreement measures only the numerical
//! conditioning of the assembly.

use crate::calculus::{
    conformal_scalar_curvature_exp, horizontal_derivatives, horizontal_from_gradient,
    sublaplacian, AffineMap, AffinePullback, GaugeFourth, LogOfField, PowerOfShiftedGauge,
    ScalarField, ScaledField, SumField,
};
use crate::heisenberg::{left_diff, h_norm, HeisError, HeisPoint};
use crate::kleinian::{
    enumerate_orbit, estimate_delta, ps_measure, AtomicMeasure, KleinError, MeasureProvenance,
    SchottkyGroup,
};
use crate::rng::substream;
use crate::sphere::{
    act, cayley, conformal_factor, gauge_distance, random_sphere_point, rotation_elem,
    sphere_green_with, BallPoint, SpElement, SphereError, SpherePoint,
};
use crate::{algebra::Quaternion, homogeneous_dim};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write as IoWrite;
use thiserror::Error;

/// Evaluation points closer than this gauge distance to an atom are
/// rejected; the density has a pole on the atom support.
pub const ATOM_CUTOFF: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum NayataniError {
    #[error("evaluation point within gauge distance {gap:.3e} of an atom")]
    AtomProximity { gap: f64 },
    #[error("measure carries no atoms")]
    EmptyMeasure,
    #[error("exponent delta must be positive, got {delta}")]
    NonPositiveDelta { delta: f64 },
    #[error("no admissible sample point found in {attempts} draws")]
    SampleExhausted { attempts: usize },
    #[error("atom support reaches the chart pole even after rotation, factor {factor:.3e}")]
    ChartPole { factor: f64 },
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Heis(#[from] HeisError),
    #[error(transparent)]
    Klein(#[from] KleinError),
    #[error("report export failed: {msg}")]
    ExportIo { msg: String },
}

/// Sphere-side density data: the measure, the exponent delta, and the
/// averaging power kappa = 2 delta / (Q - 2).
pub struct NayataniField {
    pub measure: AtomicMeasure,
    pub delta: f64,
    pub kappa: f64,
    pub n: usize,
    pub q: f64,
    pub c_q: f64,
}

impl NayataniField {
    pub fn new(measure: AtomicMeasure, delta: f64, c_q: f64) -> Result<Self, NayataniError> {
        if delta <= 0.0 {
            return Err(NayataniError::NonPositiveDelta { delta });
        }
        if measure.atoms.is_empty() {
            return Err(NayataniError::EmptyMeasure);
        }
        let n = measure.n;
        let q = homogeneous_dim(n);
        Ok(NayataniField {
            kappa: 2.0 * delta / (q - 2.0),
            n,
            q,
            measure,
            delta,
            c_q,
        })
    }

    fn proximity(&self, xi: &SpherePoint) -> Result<(), NayataniError> {
        let mut gap = f64::INFINITY;
        for (z, _) in &self.measure.atoms {
            gap = gap.min(gauge_distance(xi, z));
        }
        if gap < ATOM_CUTOFF {
            return Err(NayataniError::AtomProximity { gap });
        }
        Ok(())
    }

    /// The density (sum_i w_i G_S(xi, zeta_i)^kappa)^{1/kappa}.
    pub fn phi_gamma(&self, xi: &SpherePoint) -> Result<f64, NayataniError> {
        self.proximity(xi)?;
        let mut acc = 0.0;
        for (z, w) in &self.measure.atoms {
            acc += w * sphere_green_with(self.c_q, self.n, xi, z)?.powf(self.kappa);
        }
        Ok(acc.powf(1.0 / self.kappa))
    }

    /// Defect of the transformation law phi(gamma xi) = |gamma'(xi)|^
    /// {-(Q-2)/2} phi(xi), relative to phi(gamma xi). Zero for an exactly
    /// invariant measure; for a truncated orbit measure it shrinks as the
    /// word length grows.
    pub fn equivariance_residual(
        &self,
        gamma: &SpElement,
        xi: &SpherePoint,
    ) -> Result<f64, NayataniError> {
        let gxi = act(gamma, xi)?;
        let lhs = self.phi_gamma(&gxi)?;
        let lam = conformal_factor(gamma, xi)?;
        let rhs = lam.powf(-(self.q - 2.0) / 2.0) * self.phi_gamma(xi)?;
        Ok((lhs - rhs).abs() / lhs)
    }

    /// Transports the measure through the Cayley chart and assembles the
    /// closed-form conformal exponent on the group side.
    pub fn pulled_to_heis(&self) -> Result<HeisNayatani, NayataniError> {
        let n = self.n;
        let mut atoms = Vec::with_capacity(self.measure.atoms.len());
        for (zeta, w) in &self.measure.atoms {
            let last = zeta.coords()[n];
            let shift_sq = (Quaternion::ONE + last).norm_sq();
            let eta = cayley(zeta)?;
            atoms.push((eta, w * (2.0 * shift_sq).powf(-self.delta / 2.0)));
        }
        HeisNayatani::new(n, self.delta, self.c_q, atoms)
    }

    /// Defect between the sphere-side density and its chart transport:
    /// u(F(zeta)) against (2 |1 + zeta_{n+1}|^2)^{(Q-2)/4} phi(zeta),
    /// relative to the latter.
    pub fn pullback_consistency_residual(
        &self,
        pulled: &HeisNayatani,
        zeta: &SpherePoint,
    ) -> Result<f64, NayataniError> {
        let phi = self.phi_gamma(zeta)?;
        let last = zeta.coords()[self.n];
        let chart = (2.0 * (Quaternion::ONE + last).norm_sq()).powf((self.q - 2.0) / 4.0);
        let u = pulled.conformal_density(&cayley(zeta)?)?;
        Ok((u - chart * phi).abs() / (chart * phi))
    }
}

/// Group-side data after chart transport: atoms eta_i with adjusted
/// weights, and f = (1/delta) ln sum_i w~_i c_Q^kappa N_i^{-delta/2} as a
/// closed-form field (N_i the gauge quartic of xi^{-1} eta_i).
pub struct HeisNayatani {
    pub n: usize,
    pub q: f64,
    pub delta: f64,
    pub kappa: f64,
    pub c_q: f64,
    pub atoms: Vec<(HeisPoint, f64)>,
    f_field: LogOfField<SumField>,
    gauge_terms: Vec<AffinePullback<GaugeFourth>>,
}

impl HeisNayatani {
    pub fn new(
        n: usize,
        delta: f64,
        c_q: f64,
        atoms: Vec<(HeisPoint, f64)>,
    ) -> Result<Self, NayataniError> {
        if delta <= 0.0 {
            return Err(NayataniError::NonPositiveDelta { delta });
        }
        if atoms.is_empty() {
            return Err(NayataniError::EmptyMeasure);
        }
        let q = homogeneous_dim(n);
        let kappa = 2.0 * delta / (q - 2.0);
        let front = c_q.powf(kappa);
        let mut terms: Vec<Box<dyn ScalarField>> = Vec::with_capacity(atoms.len());
        let mut gauge_terms = Vec::with_capacity(atoms.len());
        for (eta, w) in &atoms {
            terms.push(Box::new(ScaledField {
                c: w * front,
                inner: AffinePullback {
                    inner: PowerOfShiftedGauge::new(n, 0.0, -delta / 2.0),
                    map: AffineMap::left_diff_in_first(eta),
                },
            }));
            gauge_terms.push(AffinePullback {
                inner: GaugeFourth { n },
                map: AffineMap::left_diff_in_first(eta),
            });
        }
        Ok(HeisNayatani {
            n,
            q,
            delta,
            kappa,
            c_q,
            atoms,
            f_field: LogOfField {
                inner: SumField { n, terms },
                coeff: 1.0 / delta,
            },
            gauge_terms,
        })
    }

    fn proximity(&self, xi: &HeisPoint) -> Result<(), NayataniError> {
        let mut gap = f64::INFINITY;
        for (eta, _) in &self.atoms {
            gap = gap.min(h_norm(&left_diff(xi, eta)?));
        }
        if gap < ATOM_CUTOFF {
            return Err(NayataniError::AtomProximity { gap });
        }
        Ok(())
    }

    /// The conformal exponent f at xi.
    pub fn f(&self, xi: &HeisPoint) -> Result<f64, NayataniError> {
        self.proximity(xi)?;
        Ok(self.f_field.eval(xi))
    }

    /// The exponent as a field, for derivative consumers.
    pub fn f_as_field(&self) -> &dyn ScalarField {
        &self.f_field
    }

    /// The conformal density u = e^{(Q-2) f / 2}; it matches the chart
    /// transport of the sphere-side density.
    pub fn conformal_density(&self, xi: &HeisPoint) -> Result<f64, NayataniError> {
        Ok(((self.q - 2.0) * self.f(xi)? / 2.0).exp())
    }

    /// Covariance matrix of the horizontal log-derivatives d_j^{(i)} =
    /// Y_j N_i / (2 N_i) under the tilted weights nu_i ~ w~_i N_i^
    /// {-delta/2}.
    pub fn a_matrix(&self, xi: &HeisPoint) -> Result<AMatrix, NayataniError> {
        self.proximity(xi)?;
        let dim = 4 * self.n;
        let mut total = 0.0;
        let mut mean = vec![0.0; dim];
        let mut second = vec![vec![0.0; dim]; dim];
        for ((_, w), term) in self.atoms.iter().zip(&self.gauge_terms) {
            let ni = term.eval(xi);
            let grad = term.euclidean_gradient(xi);
            let yj = horizontal_from_gradient(&grad, xi);
            let dlog: Vec<f64> = yj.iter().map(|v| 0.5 * v / ni).collect();
            let nu = w * ni.powf(-self.delta / 2.0);
            total += nu;
            for j in 0..dim {
                mean[j] += nu * dlog[j];
                for k in j..dim {
                    second[j][k] += nu * dlog[j] * dlog[k];
                }
            }
        }
        let mut entries = vec![vec![0.0; dim]; dim];
        for j in 0..dim {
            for k in j..dim {
                let v = second[j][k] / total - (mean[j] / total) * (mean[k] / total);
                entries[j][k] = v;
                entries[k][j] = v;
            }
        }
        Ok(AMatrix { n: self.n, entries })
    }

    /// Scalar curvature of the induced metric by the covariance route,
    /// 8 (n+2) (n+1-delta/2) e^{-2f} Tr A.
    pub fn scalar(&self, xi: &HeisPoint) -> Result<f64, NayataniError> {
        let a = self.a_matrix(xi)?;
        let fv = self.f_field.eval(xi);
        Ok(self.prefactor() * (-2.0 * fv).exp() * a.trace())
    }

    fn prefactor(&self) -> f64 {
        let nf = self.n as f64;
        8.0 * (nf + 2.0) * (nf + 1.0 - self.delta / 2.0)
    }

    /// Both curvature routes at xi together with their relative gap. When
    /// both values sit at the roundoff floor of the assembly (the zero
    /// branch), the gap is taken relative to the term scale of the
    /// conformal route instead.
    pub fn scalar_crosscheck(&self, xi: &HeisPoint) -> Result<ScalarCrossCheck, NayataniError> {
        let covariance_route = self.scalar(xi)?;
        let conformal_route = conformal_scalar_curvature_exp(&self.f_field, xi);
        let fv = self.f_field.eval(xi);
        let lap = sublaplacian(&self.f_field, xi);
        let raw_grad_sq: f64 = horizontal_derivatives(&self.f_field, xi)
            .iter()
            .map(|v| v * v)
            .sum();
        let scale = (-2.0 * fv).exp()
            * (2.0 * (self.q + 2.0) * lap.abs()
                + (self.q + 2.0) * (self.q - 2.0) / 2.0 * raw_grad_sq);
        let denom = covariance_route.abs().max(conformal_route.abs());
        let gap = (covariance_route - conformal_route).abs();
        let residual = if denom > 1e-10 * scale {
            gap / denom
        } else {
            gap / scale.max(f64::MIN_POSITIVE)
        };
        Ok(ScalarCrossCheck {
            covariance_route,
            conformal_route,
            residual,
            scale,
        })
    }
}

/// Covariance-route and conformal-route curvature values at one point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarCrossCheck {
    pub covariance_route: f64,
    pub conformal_route: f64,
    pub residual: f64,
    pub scale: f64,
}

/// Symmetric matrix of horizontal log-derivative covariances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AMatrix {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl AMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.entries.len()).map(|j| self.entries[j][j]).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.entries)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let dim = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _ in 0..60 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..dim {
            diag += a[i][i] * a[i][i];
            for j in (i + 1)..dim {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..dim {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[p][k] = a[k][p];
                    a[k][q] = s * akp + c * akq;
                    a[q][k] = a[k][q];
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..dim).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Normalized atomic measure from explicit atoms, for synthetic
/// configurations and invariance surrogates.
pub fn measure_from_atoms(
    n: usize,
    atoms: Vec<(SpherePoint, f64)>,
) -> Result<AtomicMeasure, NayataniError> {
    if atoms.is_empty() {
        return Err(NayataniError::EmptyMeasure);
    }
    let raw_total: f64 = atoms.iter().map(|(_, w)| w).sum();
    let atoms = atoms
        .into_iter()
        .map(|(z, w)| (z, w / raw_total))
        .collect();
    Ok(AtomicMeasure {
        n,
        atoms,
        raw_total,
        provenance: MeasureProvenance {
            s: 0.0,
            word_len: 0,
            basepoint: BallPoint::origin(n)
                .coords()
                .iter()
                .map(|q| q.components())
                .collect(),
            a_gamma_modified: false,
        },
        flags: vec!["synthetic-measure".to_string()],
    })
}

/// Equal-weight orbit of a base point under the cyclic group of a
/// rotation; the resulting measure is exactly invariant under it.
pub fn rotation_invariant_measure(
    base: &SpherePoint,
    rot: &SpElement,
    order: usize,
) -> Result<AtomicMeasure, NayataniError> {
    assert!(order >= 1, "orbit order must be positive");
    let mut atoms = Vec::with_capacity(order);
    let mut z = base.clone();
    for _ in 0..order {
        atoms.push((z.clone(), 1.0));
        z = act(rot, &z)?;
    }
    measure_from_atoms(base.n(), atoms)
}

/// One evaluated sample in a curvature sign report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignSample {
    pub zeta: Vec<[f64; 4]>,
    pub heis: Vec<f64>,
    pub scalar: f64,
    pub sign: i8,
    pub crosscheck_residual: f64,
    pub trace_a: f64,
    pub min_eigenvalue: f64,
}

/// Full-pipeline curvature summary for one group: exponent estimate, the
/// branch it selects, and per-point signs with the two-route residual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureSignReport {
    pub n: usize,
    pub rank: usize,
    pub translation_length: f64,
    pub witness_verified: bool,
    pub delta_hat: Option<f64>,
    pub delta_used: f64,
    pub threshold: f64,
    pub branch: String,
    pub word_len: usize,
    pub atom_count: usize,
    pub samples: Vec<SignSample>,
    pub notes: Vec<String>,
    pub flags: Vec<String>,
}

fn branch_label(delta: f64, threshold: f64) -> String {
    if (delta - threshold).abs() <= 1e-12 {
        "zero".to_string()
    } else if delta < threshold {
        "positive".to_string()
    } else {
        "negative".to_string()
    }
}

/// Draws sphere points clear of the chart pole, the witness balls around
/// the fixed points, and the atom support.
pub fn sample_domain_points(
    group: &SchottkyGroup,
    measure: &AtomicMeasure,
    count: usize,
    seed: u64,
) -> Result<Vec<SpherePoint>, NayataniError> {
    let n = group.n;
    let mut rng = substream(seed, 7);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let max_attempts = 200_000 * count.max(1);
    let alphabet = group.alphabet();
    while out.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(NayataniError::SampleExhausted { attempts });
        }
        let v: Vec<Quaternion> = (0..n + 1)
            .map(|_| {
                Quaternion::from_components([
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ])
            })
            .collect();
        let z = match SpherePoint::new(v) {
            Ok(z) => z,
            Err(_) => continue,
        };
        let last = z.coords()[n];
        if (Quaternion::ONE + last).norm_sq() < 0.2 {
            continue;
        }
        let mut clear = true;
        for (idx, e) in alphabet.iter().enumerate() {
            let excl = group
                .witness
                .ball_radius
                .get(idx)
                .map(|r| 1.35 * r)
                .unwrap_or(0.3);
            if gauge_distance(&z, group.attracting_point(*e)) < excl {
                clear = false;
                break;
            }
        }
        if !clear {
            continue;
        }
        if measure
            .atoms
            .iter()
            .any(|(a, _)| gauge_distance(&z, a) < 1e-3)
        {
            continue;
        }
        out.push(z);
    }
    Ok(out)
}

/// The fixed isometry used to keep orbit measures clear of the chart
/// pole: every coordinate slot is multiplied by the unit quaternion
/// (1 + i + j + k)/2, which moves each cluster at a signed coordinate
/// axis a unit distance away from the pole while changing no distance,
/// weight, or curvature value.
pub fn chart_clearing_rotation(n: usize) -> SpElement {
    let u = Quaternion::from_components([0.5, 0.5, 0.5, 0.5]);
    let mut m = crate::algebra::QuatMatrix::identity(n + 1);
    for i in 0..n + 1 {
        m.set(i, i, u);
    }
    rotation_elem(&m).expect("diagonal unit-quaternion block is an isometry")
}

/// Applies an isometry to every atom, keeping weights and provenance.
pub fn rotate_measure(
    measure: &AtomicMeasure,
    rho: &SpElement,
) -> Result<AtomicMeasure, NayataniError> {
    let mut atoms = Vec::with_capacity(measure.atoms.len());
    for (z, w) in &measure.atoms {
        atoms.push((act(rho, z)?, *w));
    }
    let mut flags = measure.flags.clone();
    flags.push("chart-rotated".to_string());
    Ok(AtomicMeasure {
        n: measure.n,
        atoms,
        raw_total: measure.raw_total,
        provenance: measure.provenance.clone(),
        flags,
    })
}

fn min_chart_factor(measure: &AtomicMeasure) -> f64 {
    let n = measure.n;
    measure
        .atoms
        .iter()
        .map(|(z, _)| (Quaternion::ONE + z.coords()[n]).norm_sq())
        .fold(f64::INFINITY, f64::min)
}

/// Runs the whole pipeline for one group: orbit, exponent estimate,
/// orbit measure, chart transport, and per-point curvature signs with
/// the two-route residual.
pub fn curvature_sign_report(
    group: &SchottkyGroup,
    word_len: usize,
    sample_count: usize,
    seed: u64,
    delta_override: Option<f64>,
    c_q: f64,
    budget: u64,
) -> Result<CurvatureSignReport, NayataniError> {
    let n = group.n;
    let threshold = 2.0 * n as f64 + 2.0;
    let orbit = enumerate_orbit(group, word_len, &BallPoint::origin(n), budget)?;
    let delta_hat = estimate_delta(&orbit).ok().map(|e| e.delta_hat);
    let delta_used = match delta_override {
        Some(d) => d,
        None => delta_hat.ok_or(KleinError::InsufficientData { annuli: 0 })?,
    };
    let measure = ps_measure(group, delta_used, word_len, &BallPoint::origin(n), budget)?;
    let rho = chart_clearing_rotation(n);
    let rotated = rotate_measure(&measure, &rho)?;
    let factor = min_chart_factor(&rotated);
    if factor < 0.02 {
        return Err(NayataniError::ChartPole { factor });
    }
    let field = NayataniField::new(rotated, delta_used, c_q)?;
    let pulled = field.pulled_to_heis()?;
    let raw_points = sample_domain_points(group, &measure, 2 * sample_count, seed)?;
    let points: Vec<SpherePoint> = raw_points
        .into_iter()
        .filter_map(|z| {
            let rz = act(&rho, &z).ok()?;
            if (Quaternion::ONE + rz.coords()[n]).norm_sq() < 0.2 {
                None
            } else {
                Some((z, rz))
            }
        })
        .take(sample_count)
        .map(|(z, _)| z)
        .collect();
    if points.len() < sample_count {
        return Err(NayataniError::SampleExhausted {
            attempts: 2 * sample_count,
        });
    }

    let mut samples = Vec::with_capacity(points.len());
    for zeta in &points {
        let xi = cayley(&act(&rho, zeta)?)?;
        let check = pulled.scalar_crosscheck(&xi)?;
        let a = pulled.a_matrix(&xi)?;
        let s = check.covariance_route;
        let sign = if s == 0.0 {
            0
        } else if s > 0.0 {
            1
        } else {
            -1
        };
        samples.push(SignSample {
            zeta: zeta.coords().iter().map(|c| c.components()).collect(),
            heis: xi.coords(),
            scalar: s,
            sign,
            crosscheck_residual: check.residual,
            trace_a: a.trace(),
            min_eigenvalue: a.min_eigenvalue(),
        });
    }

    let mut notes = Vec::new();
    notes.push(
        "atoms and evaluation points pass through a fixed isometry before chart transport, \
         keeping the support clear of the chart pole"
            .to_string(),
    );
    if group.rank == 1 {
        notes.push(
            "limit set is a two-point set, so the single-point exclusion does not apply"
                .to_string(),
        );
    }
    if delta_override.is_some() {
        notes.push(format!(
            "exponent prescribed at {delta_used}, orbit estimate kept for reference"
        ));
    }
    Ok(CurvatureSignReport {
        n,
        rank: group.rank,
        translation_length: group.translation_length,
        witness_verified: group.witness.verified,
        delta_hat,
        delta_used,
        threshold,
        branch: branch_label(delta_used, threshold),
        word_len,
        atom_count: field.measure.atoms.len(),
        samples,
        notes,
        flags: field.measure.flags.clone(),
    })
}

/// Sign report for a prescribed exponent on a synthetic equal-weight
/// measure: atoms drawn clear of the chart pole and of each other,
/// curvature evaluated exactly as in [`curvature_sign_report`] but with no
/// group behind the measure.
pub fn synthetic_sign_report(
    n: usize,
    delta: f64,
    atom_count: usize,
    sample_count: usize,
    seed: u64,
    c_q: f64,
) -> Result<CurvatureSignReport, NayataniError> {
    assert!(atom_count >= 1, "need at least one atom");
    let threshold = 2.0 * n as f64 + 2.0;
    let mut rng = substream(seed, 11);
    let mut atoms: Vec<(SpherePoint, f64)> = Vec::with_capacity(atom_count);
    let mut attempts = 0usize;
    while atoms.len() < atom_count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(NayataniError::SampleExhausted { attempts });
        }
        let z = random_sphere_point(n, &mut rng);
        if (Quaternion::ONE + z.coords()[n]).norm_sq() < 0.5 {
            continue;
        }
        if atoms.iter().any(|(a, _)| gauge_distance(a, &z) < 0.3) {
            continue;
        }
        atoms.push((z, 1.0));
    }
    let measure = measure_from_atoms(n, atoms)?;
    let field = NayataniField::new(measure, delta, c_q)?;
    let pulled = field.pulled_to_heis()?;

    let mut samples = Vec::with_capacity(sample_count);
    let mut attempts = 0usize;
    while samples.len() < sample_count {
        attempts += 1;
        if attempts > 200_000 * sample_count.max(1) {
            return Err(NayataniError::SampleExhausted { attempts });
        }
        let z = random_sphere_point(n, &mut rng);
        if (Quaternion::ONE + z.coords()[n]).norm_sq() < 0.2 {
            continue;
        }
        if field
            .measure
            .atoms
            .iter()
            .any(|(a, _)| gauge_distance(a, &z) < 1e-3)
        {
            continue;
        }
        let xi = cayley(&z)?;
        let check = pulled.scalar_crosscheck(&xi)?;
        let a = pulled.a_matrix(&xi)?;
        let s = check.covariance_route;
        let sign = if s == 0.0 {
            0
        } else if s > 0.0 {
            1
        } else {
            -1
        };
        samples.push(SignSample {
            zeta: z.coords().iter().map(|c| c.components()).collect(),
            heis: xi.coords(),
            scalar: s,
            sign,
            crosscheck_residual: check.residual,
            trace_a: a.trace(),
            min_eigenvalue: a.min_eigenvalue(),
        });
    }

    Ok(CurvatureSignReport {
        n,
        rank: 0,
        translation_length: 0.0,
        witness_verified: true,
        delta_hat: None,
        delta_used: delta,
        threshold,
        branch: branch_label(delta, threshold),
        word_len: 0,
        atom_count: field.measure.atoms.len(),
        samples,
        notes: vec![
            "measure is synthetic with a prescribed exponent, no group behind it".to_string(),
        ],
        flags: field.measure.flags.clone(),
    })
}

impl CurvatureSignReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization is infallible")
    }

    /// CSV with one row per sample: scalar value, sign, and residual.
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> Result<(), NayataniError> {
        let io = |e: std::io::Error| NayataniError::ExportIo { msg: e.to_string() };
        writeln!(w, "scalar,sign,crosscheck_residual,trace_a,min_eigenvalue").map_err(io)?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.17e},{},{:.17e},{:.17e},{:.17e}",
                s.scalar, s.sign, s.crosscheck_residual, s.trace_a, s.min_eigenvalue
            )
            .map_err(io)?;
        }
        Ok(())
    }
}
