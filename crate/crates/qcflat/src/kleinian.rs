//! Schottky subgroups of the sphere isometry group, orbit enumeration,
//! critical-exponent estimation, and atomic boundary measures.
//!
//! Generators are boosts of a common translation length T conjugated by
//! unitary rotations, one per axis. Reduced words are walked depth-first
//! in a fixed letter order, so every table and measure is deterministic.
//! Long products drift off the isometry constraint g J conj(g)^t = J;
//! every eighth letter the product is pulled back by one Newton-Schulz
//! step X <- X (3 I - X^# X) / 2 with X^# = J conj(X)^t J, which is
//! inversion-free and quadratically accurate near the constraint set.
//!
//! The critical exponent is estimated from cumulative orbit counts
//! N(R) over distance annuli of width T/2: the least-squares slope h of
//! ln N(R) against R gives delta_hat = 2h, the 2 matching the exponent
//! convention in the defining series sum_gamma e^{-(1/2) s d(p, gamma q)}.
//! Atomic measures place weight e^{-(1/2) s d(0, gamma q)} at the radial
//! sphere projection of each orbit point; the divergence-forcing
//! coefficient modification is omitted (recorded in provenance), since at
//! finite word length it is invisible.

use crate::algebra::{hyperhermitian, qvec_norm_sq, QuatMatrix, Quaternion};
use crate::rng::substream;
use crate::sphere::{
    act, act_raw, boost, conformal_factor, dist_origin_act, dist_pair_act, gauge_distance,
    rotation_elem, sp_check, BallPoint, SpElement, SphereError, SpherePoint,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Errors raised by group construction and orbit analysis.
#[derive(Debug, Error)]
pub enum KleinError {
    #[error("two axes share fixed points up to gauge distance {gap:.3e}")]
    AxisCollision { gap: f64 },
    #[error("word budget exceeded: {words} reduced words, budget {budget}")]
    BudgetExceeded { words: u64, budget: u64 },
    #[error("only {annuli} populated distance annuli, need at least 3")]
    InsufficientData { annuli: usize },
    #[error("no usable atoms: every orbit point projected within {radius:.1e} of the origin")]
    EmptyMeasure { radius: f64 },
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error("export failed: {msg}")]
    ExportIo { msg: String },
}

pub const DEFAULT_WITNESS_SAMPLES: usize = 512;
pub const DEFAULT_WORD_BUDGET: u64 = 1 << 21;

/// Sampled free-group certificate: per signed letter e, a ball around its
/// attracting fixed point of gauge radius `ball_radius`; the letter must
/// map every sample taken outside the repelling ball into its attracting
/// ball. Radii are one third of the smallest fixed-point separation, so
/// the balls are pairwise disjoint by construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PingPongWitness {
    pub verified: bool,
    pub samples: usize,
    /// Prescribed ball radius per signed letter (order +1, -1, +2, -2, ...).
    pub ball_radius: Vec<f64>,
    /// Largest observed image distance from the attracting point.
    pub image_radius: Vec<f64>,
    /// min(ball_radius - image_radius); nonnegative iff verified.
    pub margin: f64,
}

/// A rank-k free group of conjugated boosts.
#[derive(Clone, Debug)]
pub struct SchottkyGroup {
    pub n: usize,
    pub rank: usize,
    pub translation_length: f64,
    generators: Vec<SpElement>,
    inverses: Vec<SpElement>,
    /// (attracting, repelling) boundary fixed points of generator i.
    pub axis_endpoints: Vec<(SpherePoint, SpherePoint)>,
    pub witness: PingPongWitness,
}

impl SchottkyGroup {
    /// The element for signed letter e: +i is generator i (1-based), -i
    /// its inverse.
    pub fn letter(&self, e: i32) -> &SpElement {
        let i = (e.unsigned_abs() as usize) - 1;
        if e > 0 {
            &self.generators[i]
        } else {
            &self.inverses[i]
        }
    }

    /// Attracting fixed point of signed letter e.
    pub fn attracting_point(&self, e: i32) -> &SpherePoint {
        let i = (e.unsigned_abs() as usize) - 1;
        if e > 0 {
            &self.axis_endpoints[i].0
        } else {
            &self.axis_endpoints[i].1
        }
    }

    pub fn generators(&self) -> &[SpElement] {
        &self.generators
    }

    /// Signed letters in enumeration order: +1, -1, +2, -2, ...
    pub fn alphabet(&self) -> Vec<i32> {
        (1..=self.rank as i32).flat_map(|i| [i, -i]).collect()
    }
}

/// Rotations sending the first coordinate axis to k pairwise orthogonal
/// axes: the identity, then the swap of slot 0 with slot i. Requires
/// k <= n+1.
pub fn orthogonal_axis_rotations(n: usize, k: usize) -> Vec<QuatMatrix> {
    assert!(
        k <= n + 1,
        "only {} pairwise orthogonal axes exist, requested {}",
        n + 1,
        k
    );
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut u = QuatMatrix::identity(n + 1);
        if i > 0 {
            u.set(0, 0, Quaternion::ZERO);
            u.set(i, i, Quaternion::ZERO);
            u.set(0, i, Quaternion::ONE);
            u.set(i, 0, Quaternion::ONE);
        }
        out.push(u);
    }
    out
}

/// Builds the rank-k group with generators R_i^{-1} boost(T) R_i, checks
/// axis separation, and runs the sampled ping-pong witness. A failed
/// witness does not error; the group is returned flagged non-verified.
pub fn build_schottky(
    n: usize,
    t: f64,
    axis_rotations: &[QuatMatrix],
    witness_samples: usize,
    seed: u64,
) -> Result<SchottkyGroup, KleinError> {
    assert!(t > 0.0, "translation length must be positive");
    let k = axis_rotations.len();
    assert!(k >= 1, "need at least one axis");
    let b = boost(n, t);

    let mut generators = Vec::with_capacity(k);
    let mut inverses = Vec::with_capacity(k);
    let mut endpoints = Vec::with_capacity(k);
    for u in axis_rotations {
        let r = rotation_elem(u)?;
        let g = r.inverse().then(&b).then(&r);
        // boost fixed points are +-e_1 on the boundary; conjugation moves
        // them to the rotated axis
        let mut plus = vec![Quaternion::ZERO; n + 1];
        plus[0] = Quaternion::ONE;
        let mut minus = vec![Quaternion::ZERO; n + 1];
        minus[0] = -Quaternion::ONE;
        let att = SpherePoint::new(act_raw(&r, &plus)?)?;
        let rep = SpherePoint::new(act_raw(&r, &minus)?)?;
        inverses.push(g.inverse());
        generators.push(g);
        endpoints.push((att, rep));
    }

    let mut min_gap = f64::INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            for a in [&endpoints[i].0, &endpoints[i].1] {
                for bpt in [&endpoints[j].0, &endpoints[j].1] {
                    min_gap = min_gap.min(gauge_distance(a, bpt));
                }
            }
        }
    }
    if k > 1 && min_gap < 1e-6 {
        return Err(KleinError::AxisCollision { gap: min_gap });
    }

    let mut group = SchottkyGroup {
        n,
        rank: k,
        translation_length: t,
        generators,
        inverses,
        axis_endpoints: endpoints,
        witness: PingPongWitness {
            verified: true,
            samples: 0,
            ball_radius: vec![],
            image_radius: vec![],
            margin: f64::INFINITY,
        },
    };
    group.witness = ping_pong_witness(&group, witness_samples, seed)?;
    Ok(group)
}

fn ping_pong_witness(
    g: &SchottkyGroup,
    samples: usize,
    seed: u64,
) -> Result<PingPongWitness, KleinError> {
    let letters = g.alphabet();
    // rank 1 has no second axis to collide with; the free-group property
    // is automatic for a single loxodromic generator
    if g.rank == 1 {
        return Ok(PingPongWitness {
            verified: true,
            samples: 0,
            ball_radius: vec![],
            image_radius: vec![],
            margin: f64::INFINITY,
        });
    }

    let fixed: Vec<&SpherePoint> = letters.iter().map(|&e| g.attracting_point(e)).collect();
    let mut radius = vec![f64::INFINITY; letters.len()];
    for (i, fi) in fixed.iter().enumerate() {
        for (j, fj) in fixed.iter().enumerate() {
            if i != j {
                radius[i] = radius[i].min(gauge_distance(fi, fj) / 3.0);
            }
        }
    }

    let dim = 4 * (g.n + 1);
    let mut image_radius = vec![0.0f64; letters.len()];
    for (idx, &e) in letters.iter().enumerate() {
        let rep_idx = letters.iter().position(|&f| f == -e).unwrap();
        let rep_point = fixed[rep_idx];
        let rep_radius = radius[rep_idx];
        let mut rng = substream(seed, idx as u64);
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < samples && attempts < 20 * samples {
            attempts += 1;
            let mut c = vec![0.0f64; dim];
            for x in c.iter_mut() {
                *x = sample_standard_normal(&mut rng);
            }
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            let zeta: Vec<Quaternion> = c
                .chunks(4)
                .map(|ch| Quaternion::from_components([ch[0], ch[1], ch[2], ch[3]]))
                .collect();
            let point = SpherePoint::new(zeta)?;
            if gauge_distance(&point, rep_point) <= rep_radius {
                continue;
            }
            accepted += 1;
            let image = act(g.letter(e), &point)?;
            image_radius[idx] = image_radius[idx].max(gauge_distance(&image, fixed[idx]));
        }
    }

    let margin = radius
        .iter()
        .zip(image_radius.iter())
        .map(|(r, ir)| r - ir)
        .fold(f64::INFINITY, f64::min);
    Ok(PingPongWitness {
        verified: margin >= 0.0,
        samples,
        ball_radius: radius,
        image_radius,
        margin,
    })
}

fn sample_standard_normal(rng: &mut impl Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// One Newton-Schulz step toward the isometry constraint:
/// X <- X (3 I - X^# X) / 2 with X^# = J conj(X)^t J. The step contracts
/// only while the defect ||X^# X - I|| is below 1; products of large
/// translation length have a defect at the noise floor (entry scale)^2 *
/// machine epsilon, which can exceed 1 in absolute terms, and the step is
/// skipped there (such matrices are already as close to the constraint as
/// f64 representation permits).
pub fn reorthogonalize(x: &QuatMatrix) -> QuatMatrix {
    let m = x.rows;
    let j = crate::sphere::signature_matrix(m);
    let sharp = j.mat_mul(&x.conj_t()).mat_mul(&j);
    let s = sharp.mat_mul(x);
    let mut defect = 0.0f64;
    for r in 0..m {
        for c in 0..m {
            let mut e = s.get(r, c);
            if r == c {
                e = e - Quaternion::ONE;
            }
            defect = defect.max(e.norm());
        }
    }
    if defect > 0.25 {
        return x.clone();
    }
    let mut corr = QuatMatrix::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            let mut e = -s.get(r, c);
            if r == c {
                e = e + Quaternion::from_re_im(3.0, [0.0; 3]);
            }
            corr.set(r, c, e.scale(0.5));
        }
    }
    x.mat_mul(&corr)
}

/// Form-constraint residual ||g J conj(g)^t - J|| divided by the squared
/// entry scale of g. Products of long words have entries of size
/// e^{d/2}, so the absolute residual floor grows like (entry scale)^2 *
/// machine epsilon; the relative residual is the scale-free drift
/// measure.
pub fn relative_sp_residual(m: &QuatMatrix) -> f64 {
    let (_, abs) = sp_check(m);
    let mut scale = 1.0f64;
    for r in 0..m.rows {
        for c in 0..m.cols {
            scale = scale.max(m.get(r, c).norm());
        }
    }
    abs / (scale * scale)
}

/// One reduced-word orbit sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitRow {
    /// Signed letters, first-applied first.
    pub word: Vec<i32>,
    /// Raw projective image coordinates of the basepoint (kept raw: deep
    /// orbit points round onto the boundary and would not re-validate as
    /// interior points).
    pub point: Vec<[f64; 4]>,
    /// d(basepoint, point), evaluated from matrix data.
    pub distance: f64,
    /// d(0, point), the reference distance the measure weights use.
    pub distance_from_origin: f64,
}

/// All reduced words up to a length, with orbit points and distances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitTable {
    pub n: usize,
    pub rank: usize,
    pub translation_length: f64,
    pub basepoint: Vec<[f64; 4]>,
    pub max_word_len: usize,
    pub rows: Vec<OrbitRow>,
    /// Largest scale-relative isometry-constraint residual over all
    /// enumerated products (see [`relative_sp_residual`]).
    pub max_sp_residual: f64,
}

/// Number of reduced words of length 1..=L in a rank-k free group.
pub fn reduced_word_count(k: usize, l: usize) -> u64 {
    let mut total = 0u64;
    let mut level = 2 * k as u64;
    for _ in 1..=l {
        total += level;
        level *= (2 * k - 1) as u64;
    }
    total
}

/// Depth-first enumeration of all reduced words up to length `l_max`,
/// in letter order +1, -1, +2, -2, ... The walk is deterministic, so the
/// table is independent of any parallel scheduling.
pub fn enumerate_orbit(
    g: &SchottkyGroup,
    l_max: usize,
    basepoint: &BallPoint,
    budget: u64,
) -> Result<OrbitTable, KleinError> {
    assert!(l_max >= 1, "need words of length at least 1");
    let expected = reduced_word_count(g.rank, l_max);
    if expected > budget {
        return Err(KleinError::BudgetExceeded {
            words: expected,
            budget,
        });
    }
    let mut rows = Vec::with_capacity(expected as usize);
    let mut max_res = 0.0f64;
    let letters = g.alphabet();
    let mut word: Vec<i32> = Vec::with_capacity(l_max);

    fn rec(
        g: &SchottkyGroup,
        letters: &[i32],
        word: &mut Vec<i32>,
        mat: &SpElement,
        basepoint: &BallPoint,
        l_max: usize,
        rows: &mut Vec<OrbitRow>,
        max_res: &mut f64,
    ) -> Result<(), KleinError> {
        for &e in letters {
            if let Some(&last) = word.last() {
                if last == -e {
                    continue;
                }
            }
            word.push(e);
            let mut m = mat.then(g.letter(e));
            if word.len() % 8 == 0 {
                m = SpElement::new_unchecked(reorthogonalize(m.matrix()));
            }
            let res = relative_sp_residual(m.matrix());
            *max_res = max_res.max(res);
            let raw = act_raw(&m, basepoint.coords())?;
            let distance = dist_pair_act(&m, basepoint)?;
            let distance_from_origin = dist_origin_act(&m, basepoint)?;
            rows.push(OrbitRow {
                word: word.clone(),
                point: raw.iter().map(|q| q.components()).collect(),
                distance,
                distance_from_origin,
            });
            if word.len() < l_max {
                rec(g, letters, word, &m, basepoint, l_max, rows, max_res)?;
            }
            word.pop();
        }
        Ok(())
    }

    rec(
        g,
        &letters,
        &mut word,
        &SpElement::identity(g.n),
        basepoint,
        l_max,
        &mut rows,
        &mut max_res,
    )?;
    Ok(OrbitTable {
        n: g.n,
        rank: g.rank,
        translation_length: g.translation_length,
        basepoint: basepoint.coords().iter().map(|q| q.components()).collect(),
        max_word_len: l_max,
        rows,
        max_sp_residual: max_res,
    })
}

impl OrbitTable {
    /// CSV rows {word, distance, point coordinates}.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), KleinError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["word".to_string(), "distance".to_string()];
        for l in 0..self.n + 1 {
            for c in ["w", "x1", "x2", "x3"] {
                header.push(format!("z{}_{}", l, c));
            }
        }
        w.write_record(&header)
            .map_err(|e| KleinError::ExportIo { msg: e.to_string() })?;
        for row in &self.rows {
            let mut rec = vec![word_string(&row.word), format!("{:.17e}", row.distance)];
            for q in &row.point {
                for c in q {
                    rec.push(format!("{:.17e}", c));
                }
            }
            w.write_record(&rec)
                .map_err(|e| KleinError::ExportIo { msg: e.to_string() })?;
        }
        w.flush().map_err(|e| KleinError::ExportIo { msg: e.to_string() })?;
        Ok(())
    }
}

/// Renders a signed-letter word like [1, -2, 1] as "1.-2.1".
pub fn word_string(word: &[i32]) -> String {
    if word.is_empty() {
        return "e".to_string();
    }
    word.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// Critical-exponent estimate with regression diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    /// ln N(R) slope before the factor 2.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// (outer edge R, cumulative count N(R)) pairs used in the fit.
    pub annuli: Vec<(f64, u64)>,
}

/// Least-squares slope of ln N(R) against R over annuli of width T/2,
/// first annulus discarded; delta_hat is twice the slope.
///
/// Two classes of annuli are excluded before the fit, both quantization
/// or truncation artifacts rather than orbit growth:
/// empty annuli (no new word falls inside; they repeat the previous
/// cumulative count and double-weight older data), and annuli whose
/// outer edge exceeds the certified-complete radius, i.e. the shortest
/// maximal-length distance plus one observed per-letter increment: counts
/// beyond that radius miss words the length cutoff excluded, which
/// flattens the tail of ln N(R).
pub fn estimate_delta(orbit: &OrbitTable) -> Result<DeltaEstimate, KleinError> {
    let width = orbit.translation_length / 2.0;
    let mut dists: Vec<f64> = orbit.rows.iter().map(|r| r.distance).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max_d = *dists.last().expect("orbit table is nonempty");
    let min_at = |len: usize| {
        orbit
            .rows
            .iter()
            .filter(|r| r.word.len() == len)
            .map(|r| r.distance)
            .fold(f64::INFINITY, f64::min)
    };
    let min_last = min_at(orbit.max_word_len);
    let complete_r = if orbit.max_word_len >= 2 {
        min_last + (min_last - min_at(orbit.max_word_len - 1)).max(0.0)
    } else {
        min_last
    };

    let mut pts: Vec<(f64, u64)> = Vec::new();
    let mut edge = width;
    let mut prev = 0u64;
    while edge <= max_d + width {
        if edge > complete_r {
            break;
        }
        let cnt = dists.partition_point(|&d| d <= edge) as u64;
        if cnt > prev {
            pts.push((edge, cnt));
        }
        prev = cnt;
        edge += width;
    }
    if pts.len() < 4 {
        // one annulus is discarded; three must remain
        return Err(KleinError::InsufficientData { annuli: pts.len() });
    }
    let used = &pts[1..];

    let m = used.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, cnt) in used {
        let y = (cnt as f64).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let mean_y = sy / m;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(x, cnt) in used {
        let y = (cnt as f64).ln();
        let yhat = slope * x + intercept;
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(DeltaEstimate {
        delta_hat: 2.0 * slope,
        slope,
        intercept,
        r_squared,
        annuli: used.to_vec(),
    })
}

/// Provenance of an atomic boundary measure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureProvenance {
    pub s: f64,
    pub word_len: usize,
    pub basepoint: Vec<[f64; 4]>,
    /// Always false: the divergence-forcing coefficient modification of
    /// the defining series is omitted.
    pub a_gamma_modified: bool,
}

/// Finitely supported boundary measure with normalized weights.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    pub n: usize,
    pub atoms: Vec<(SpherePoint, f64)>,
    /// Weight total before normalization (the truncated defining series).
    pub raw_total: f64,
    pub provenance: MeasureProvenance,
    pub flags: Vec<String>,
}

/// Truncated boundary measure: one atom per reduced word of length
/// 0..=l at the radial projection of the orbit point, weight
/// e^{-(1/2) s d(basepoint, orbit point)}, normalized. Orbit points
/// within 1e-12 of the origin have no radial projection and are skipped.
pub fn ps_measure(
    g: &SchottkyGroup,
    s: f64,
    l: usize,
    basepoint: &BallPoint,
    budget: u64,
) -> Result<AtomicMeasure, KleinError> {
    let mut flags = Vec::new();
    if !g.witness.verified {
        flags.push("group-not-verified".to_string());
    }

    let mut raw_atoms: Vec<(Vec<Quaternion>, f64)> = Vec::new();
    // the empty word contributes the basepoint itself
    raw_atoms.push((
        basepoint.coords().to_vec(),
        crate::sphere::hyp_distance(&BallPoint::origin(g.n), basepoint)
            .unwrap_or(0.0),
    ));
    if l >= 1 {
        let orbit = enumerate_orbit(g, l, basepoint, budget)?;
        if let Ok(est) = estimate_delta(&orbit) {
            if s <= est.delta_hat {
                flags.push(format!(
                    "s-not-above-delta-hat: s = {:.4}, delta_hat = {:.4}",
                    s, est.delta_hat
                ));
            }
        }
        for row in &orbit.rows {
            let pt: Vec<Quaternion> = row
                .point
                .iter()
                .map(|c| Quaternion::from_components(*c))
                .collect();
            raw_atoms.push((pt, row.distance_from_origin));
        }
    }

    let mut atoms = Vec::new();
    let mut raw_total = 0.0;
    for (pt, d) in raw_atoms {
        if qvec_norm_sq(&pt).sqrt() < 1e-12 {
            continue;
        }
        let zeta = SpherePoint::new(pt)?;
        let w = (-0.5 * s * d).exp();
        raw_total += w;
        atoms.push((zeta, w));
    }
    if atoms.is_empty() {
        return Err(KleinError::EmptyMeasure { radius: 1e-12 });
    }
    for a in atoms.iter_mut() {
        a.1 /= raw_total;
    }
    Ok(AtomicMeasure {
        n: g.n,
        atoms,
        raw_total,
        provenance: MeasureProvenance {
            s,
            word_len: l,
            basepoint: basepoint.coords().iter().map(|q| q.components()).collect(),
            a_gamma_modified: false,
        },
        flags,
    })
}

impl AtomicMeasure {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// JSON export {atoms: [{zeta, w}], s, L, basepoint, flags}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "atoms": self.atoms.iter().map(|(z, w)| serde_json::json!({
                "zeta": z.coords().iter().map(|q| q.components()).collect::<Vec<_>>(),
                "w": w,
            })).collect::<Vec<_>>(),
            "s": self.provenance.s,
            "L": self.provenance.word_len,
            "basepoint": self.provenance.basepoint,
            "flags": self.flags,
        })
    }
}

/// Smooth boundary test function e^{-lambda |1 - <z, c>|} with sup norm 1.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub centre: SpherePoint,
    pub lambda: f64,
}

impl TestFunction {
    pub fn eval(&self, z: &SpherePoint) -> f64 {
        let gap = (Quaternion::ONE - hyperhermitian(z.coords(), self.centre.coords())).norm();
        (-self.lambda * gap).exp()
    }
}

/// Deterministic battery of boundary test functions: random centres on
/// the sphere, decay rates in (1, 3).
pub fn default_test_battery(n: usize, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut c = vec![0.0f64; 4 * (n + 1)];
        for x in c.iter_mut() {
            *x = sample_standard_normal(&mut rng);
        }
        let zeta: Vec<Quaternion> = c
            .chunks(4)
            .map(|ch| Quaternion::from_components([ch[0], ch[1], ch[2], ch[3]]))
            .collect();
        if let Ok(centre) = SpherePoint::new(zeta) {
            let lambda = 1.0 + 2.0 * rng.gen::<f64>();
            out.push(TestFunction { centre, lambda });
        }
    }
    out
}

/// Residual of the conformal-density transformation rule: compares the
/// pushforward of mu under gamma^{-1} against the |gamma'|^delta tilt,
/// maximized over the battery (all sup norms 1):
///
///   max_f | sum_i w_i f(gamma^{-1} zeta_i)
///          - sum_i w_i |gamma'(zeta_i)|^delta f(zeta_i) |.
pub fn quasi_invariance_residual(
    mu: &AtomicMeasure,
    gamma: &SpElement,
    delta: f64,
    battery: &[TestFunction],
) -> Result<f64, KleinError> {
    let ginv = gamma.inverse();
    let mut moved = Vec::with_capacity(mu.atoms.len());
    let mut tilt = Vec::with_capacity(mu.atoms.len());
    for (zeta, _) in &mu.atoms {
        moved.push(act(&ginv, zeta)?);
        tilt.push(conformal_factor(gamma, zeta)?.powf(delta));
    }
    let mut worst = 0.0f64;
    for f in battery {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (i, (zeta, w)) in mu.atoms.iter().enumerate() {
            lhs += w * f.eval(&moved[i]);
            rhs += w * tilt[i] * f.eval(zeta);
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Greedy cluster count: points join the first existing cluster centre
/// within `radius` in gauge distance, else found a new cluster.
pub fn cluster_count(points: &[SpherePoint], radius: f64) -> usize {
    let mut centres: Vec<&SpherePoint> = Vec::new();
    for p in points {
        if !centres.iter().any(|c| gauge_distance(c, p) <= radius) {
            centres.push(p);
        }
    }
    centres.len()
}
