//! Subcommand implementations.
//!
//! Each command resolves its parameters from the optional config file and
//! the flags (flags win), runs the underlying library calls, prints its
//! report, and maps the outcome onto the exit-code contract: 0 pass,
//! 1 verification failure, 2 numerical disagreement, 3 unverified group,
//! 64 usage, 70 runtime failure.

use crate::config::RunConfig;
use clap::Args;
use qcflat::algebra::{qmul, structure_matrix_residual, Quaternion, B};
use qcflat::calculus::{identity_suite, sublaplacian, PowerOfShiftedGauge, SampleBox};
use qcflat::green::{
    closed_form_cq, compute_cq, compute_cq_cached, cq_cache_file_name, delta_mass,
    green_transform_check, CqMethod, GreenKernel,
};
use qcflat::heisenberg::{
    apply_auto, h_norm, left_diff, random_auto, HeisAuto, HeisPoint,
};
use qcflat::kleinian::{
    build_schottky, enumerate_orbit, estimate_delta, orthogonal_axis_rotations, SchottkyGroup,
    DEFAULT_WORD_BUDGET,
};
use qcflat::nayatani::{curvature_sign_report, synthetic_sign_report};
use qcflat::report;
use qcflat::rng::substream;
use qcflat::sphere::{
    act, act_ball, cayley, cayley_inv, cayley_metric_factor, conformal_factor, hyp_distance,
    q_form_residual, random_sp_element, random_sphere_point, BallPoint, SpherePoint,
};
use qcflat::{homogeneous_dim, yamabe_b};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

pub enum CmdError {
    Usage(String),
    Runtime(String),
}

macro_rules! runtime_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CmdError {
            fn from(e: $ty) -> Self {
                CmdError::Runtime(e.to_string())
            }
        })*
    };
}

runtime_from!(
    qcflat::green::GreenError,
    qcflat::kleinian::KleinError,
    qcflat::nayatani::NayataniError,
    qcflat::sphere::SphereError,
    qcflat::heisenberg::HeisError,
    std::io::Error,
    serde_json::Error
);

const EXIT_OK: u8 = 0;
const EXIT_VERIFY: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_GROUP: u8 = 3;

/// Relative agreement demanded between the two quadrature routes.
const CQ_GAP_TOL: f64 = 1e-4;
/// Relative agreement demanded between the two curvature routes.
const CROSSCHECK_TOL: f64 = 1e-4;

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, CmdError> {
    match path {
        Some(p) => RunConfig::load(p).map_err(CmdError::Usage),
        None => Ok(RunConfig::default()),
    }
}

fn require_seed(flag: Option<u64>, cfg: &RunConfig) -> Result<u64, CmdError> {
    flag.or(cfg.seed).ok_or_else(|| {
        CmdError::Usage("this command is stochastic; pass --seed or set \"seed\" in the config".into())
    })
}

fn resolve_budget(flag: Option<f64>, cfg: &RunConfig, default: f64) -> Result<u64, CmdError> {
    let b = flag.or(cfg.quadrature.budget).unwrap_or(default);
    if !b.is_finite() || b < 1.0 || b > 1e12 {
        return Err(CmdError::Usage(format!("budget {b} out of range [1, 1e12]")));
    }
    Ok(b as u64)
}

fn print_report(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn persist(out: &Option<PathBuf>, stem: &str, value: &Value) -> Result<(), CmdError> {
    if let Some(dir) = out {
        report::write_json(dir, stem, value)?;
    }
    Ok(())
}

/// Normalization constant for kernel evaluation: the closed form where one
/// is known, otherwise the product-radial quadrature.
fn kernel_constant(n: usize, budget: u64, seed: u64) -> (f64, &'static str) {
    match closed_form_cq(n) {
        Some(c) => (c, "closed-form"),
        None => (
            compute_cq(n, CqMethod::ProductRadial, budget, seed).value,
            "product-radial",
        ),
    }
}

// ---------------------------------------------------------------- constants

#[derive(Args)]
pub struct ConstantsArgs {
    /// Quaternionic dimension of the group model
    #[arg(long)]
    n: Option<usize>,
    /// Base seed for the Monte Carlo route
    #[arg(long)]
    seed: Option<u64>,
    /// Node/sample budget, scientific notation accepted
    #[arg(long)]
    budget: Option<f64>,
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report and the quadrature cache
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cmd_constants(args: ConstantsArgs) -> Result<u8, CmdError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(1);
    let seed = require_seed(args.seed, &cfg)?;
    let budget = resolve_budget(args.budget, &cfg, 1e7)?;

    let mut cache_status = json!("disabled");
    let (radial, mc) = match &args.out {
        Some(dir) => {
            let cache = dir.join("cache");
            std::fs::create_dir_all(&cache)?;
            let status = |m: CqMethod| {
                if cache.join(cq_cache_file_name(n, m, budget, seed)).exists() {
                    "hit"
                } else {
                    "miss"
                }
            };
            cache_status = json!({
                "product_radial": status(CqMethod::ProductRadial),
                "monte_carlo": status(CqMethod::MonteCarlo),
            });
            (
                compute_cq_cached(n, CqMethod::ProductRadial, budget, seed, &cache)?,
                compute_cq_cached(n, CqMethod::MonteCarlo, budget, seed, &cache)?,
            )
        }
        None => (
            compute_cq(n, CqMethod::ProductRadial, budget, seed),
            compute_cq(n, CqMethod::MonteCarlo, budget, seed),
        ),
    };

    let rel_gap = (radial.value - mc.value).abs() / radial.value.abs();
    let agree = rel_gap < CQ_GAP_TOL;
    let config = json!({
        "command": "constants",
        "n": n,
        "seed": seed,
        "budget": budget,
    });
    let body = json!({
        "n": n,
        "homogeneous_dim": homogeneous_dim(n),
        "yamabe_b": yamabe_b(n),
        "product_radial": serde_json::to_value(&radial)?,
        "monte_carlo": serde_json::to_value(&mc)?,
        "rel_gap": rel_gap,
        "tolerance": CQ_GAP_TOL,
        "agree": agree,
        "closed_form": closed_form_cq(n),
        "cache": cache_status,
    });
    let rep = report::envelope("constants", &config, body);
    print_report(&rep);
    persist(&args.out, "constants", &rep)?;
    if !agree {
        eprintln!(
            "quadrature routes disagree: radial {:.6e} vs monte-carlo {:.6e} (rel gap {rel_gap:.3e})",
            radial.value, mc.value
        );
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

// ------------------------------------------------------------------- verify

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count per randomized check
    #[arg(long)]
    samples: Option<usize>,
    /// Suite to run (repeatable): algebra, identities, green, sphere, cayley
    #[arg(long)]
    suite: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature budget for the checks that need the constant
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Serialize)]
struct CheckLine {
    suite: &'static str,
    check: String,
    residual: f64,
    tolerance: f64,
    samples: usize,
    pass: bool,
}

fn push_check(
    lines: &mut Vec<CheckLine>,
    suite: &'static str,
    check: impl Into<String>,
    residual: f64,
    tolerance: f64,
    samples: usize,
) {
    let check = check.into();
    let pass = residual.is_finite() && residual < tolerance;
    lines.push(CheckLine {
        suite,
        check,
        residual,
        tolerance,
        samples,
        pass,
    });
}

const ALL_SUITES: [&str; 5] = ["algebra", "identities", "green", "sphere", "cayley"];

pub fn cmd_verify(args: VerifyArgs) -> Result<u8, CmdError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(1);
    let seed = require_seed(args.seed, &cfg)?;
    let samples = args.samples.or(cfg.verify.samples).unwrap_or(300);
    let budget = resolve_budget(args.budget, &cfg, 1e6)?;
    let suites: Vec<String> = if !args.suite.is_empty() {
        args.suite.clone()
    } else if let Some(s) = &cfg.verify.suites {
        s.clone()
    } else {
        ALL_SUITES.iter().map(|s| s.to_string()).collect()
    };
    for s in &suites {
        if !ALL_SUITES.contains(&s.as_str()) {
            return Err(CmdError::Usage(format!(
                "unknown suite {s:?}; available: {}",
                ALL_SUITES.join(", ")
            )));
        }
    }
    let want = |s: &str| suites.iter().any(|x| x == s);

    let mut lines = Vec::new();

    if want("algebra") {
        run_algebra_suite(&mut lines, &cfg, samples, seed);
    }
    if want("identities") {
        for r in identity_suite(n, samples, seed) {
            let tol = if r.identity.ends_with("-fd") { 1e-5 } else { 1e-10 };
            push_check(&mut lines, "identities", r.identity, r.max_rel, tol, r.samples);
        }
    }
    if want("green") {
        run_green_suite(&mut lines, n, samples, seed, budget);
    }
    if want("sphere") {
        run_sphere_suite(&mut lines, n, samples, seed);
    }
    if want("cayley") {
        run_cayley_suite(&mut lines, n, samples, seed, budget);
    }

    let mut all_pass = true;
    for l in &lines {
        all_pass &= l.pass;
        println!(
            "[{}] {:<46} residual {:>12.3e}  tol {:>8.1e}  ({} samples)",
            if l.pass { "PASS" } else { "FAIL" },
            format!("{}/{}", l.suite, l.check),
            l.residual,
            l.tolerance,
            l.samples
        );
    }
    println!(
        "{}: {} of {} checks passed",
        if all_pass { "OK" } else { "FAILED" },
        lines.iter().filter(|l| l.pass).count(),
        lines.len()
    );

    let config = json!({
        "command": "verify",
        "n": n,
        "seed": seed,
        "samples": samples,
        "suites": suites,
        "budget": budget,
    });
    let body = json!({
        "checks": serde_json::to_value(&lines)?,
        "all_pass": all_pass,
    });
    persist(&args.out, "verify", &report::envelope("verify", &config, body))?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY })
}

fn run_algebra_suite(lines: &mut Vec<CheckLine>, cfg: &RunConfig, samples: usize, seed: u64) {
    let matrices = cfg.verify.structure_matrices.unwrap_or(B);
    push_check(
        lines,
        "algebra",
        "structure-matrix-relations",
        structure_matrix_residual(&matrices),
        1e-12,
        1,
    );

    let mut rng = substream(seed, 20);
    let mut assoc: f64 = 0.0;
    let mut herm: f64 = 0.0;
    for _ in 0..samples {
        let q: [Quaternion; 3] = std::array::from_fn(|_| {
            Quaternion::from_components(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
        });
        assoc = assoc.max((qmul(qmul(q[0], q[1]), q[2]) - qmul(q[0], qmul(q[1], q[2]))).norm());
        let lhs = qmul(q[0], q[1].conj());
        let rhs = qmul(q[1], q[0].conj()).conj();
        herm = herm.max((lhs - rhs).norm());
    }
    push_check(lines, "algebra", "product-associativity", assoc, 1e-12, samples);
    push_check(lines, "algebra", "pairing-conjugate-symmetry", herm, 1e-12, samples);
}

fn run_green_suite(lines: &mut Vec<CheckLine>, n: usize, samples: usize, seed: u64, budget: u64) {
    let (c_q, _) = kernel_constant(n, budget, seed);
    let kernel = GreenKernel::with_constant(n, c_q);
    let q = homogeneous_dim(n);
    let mut rng = substream(seed, 21);
    let box_ = SampleBox::centered(n, 1.0);

    let harmonicity_pts = samples.min(100);
    let gfield = kernel.green_field_in_eta(&HeisPoint::origin(n));
    let mut harm: f64 = 0.0;
    let mut done = 0;
    while done < harmonicity_pts {
        let p = box_.sample(&mut rng);
        if h_norm(&p) < 1e-3 {
            continue;
        }
        let r = (rng.gen_range(1e-2f64.ln()..10f64.ln())).exp();
        let unit = apply_auto(&HeisAuto::Dilation(1.0 / h_norm(&p)), &p).expect("norm checked");
        let eta = apply_auto(&HeisAuto::Dilation(r), &unit).expect("dilation is total");
        harm = harm.max(sublaplacian(&gfield, &eta).abs() * h_norm(&eta).powf(q + 2.0) / c_q);
        done += 1;
    }
    push_check(lines, "green", "kernel-harmonicity", harm, 1e-8, harmonicity_pts);

    let transform_pts = samples.min(200);
    let mut trans: f64 = 0.0;
    let mut done = 0;
    let mut attempts = 0;
    while done < transform_pts && attempts < 100 * transform_pts {
        attempts += 1;
        let f = random_auto(n, rng.gen_range(1..=4), &mut rng);
        let xi = box_.sample(&mut rng);
        let eta = box_.sample(&mut rng);
        if let Ok(d) = left_diff(&xi, &eta) {
            if h_norm(&d) < 0.1 {
                continue;
            }
        }
        match green_transform_check(&f, &xi, &eta) {
            Ok(r) => {
                trans = trans.max(r);
                done += 1;
            }
            Err(_) => continue,
        }
    }
    push_check(lines, "green", "transform-law", trans, 1e-9, done);

    for eps in [0.5, 1.0] {
        let mass = delta_mass(n, c_q, eps, 160);
        push_check(
            lines,
            "green",
            format!("delta-mass-eps{eps}"),
            (mass - 1.0).abs(),
            1e-3,
            1,
        );
    }

    let chart = PowerOfShiftedGauge::new(n, 1.0, 0.0);
    let planted = 0.5f64.powf(q - 2.0);
    let oracle = move |a: &HeisPoint, b: &HeisPoint| {
        let m = left_diff(a, b).expect("probe points are distinct");
        c_q * m.gauge4().powf(-(q - 2.0) / 4.0) + planted
    };
    let xi = HeisPoint::origin(n);
    let radii = qcflat::green::default_radii_schedule();
    match kernel.regular_part_limit(&oracle, &chart, &xi, &radii) {
        Ok(rep) => push_check(
            lines,
            "green",
            "regular-part-recovery",
            (rep.value - 0.5).abs(),
            1e-6,
            radii.len(),
        ),
        Err(e) => {
            push_check(lines, "green", format!("regular-part-recovery ({e})"), f64::INFINITY, 1e-6, radii.len());
        }
    }
}

fn run_sphere_suite(lines: &mut Vec<CheckLine>, n: usize, samples: usize, seed: u64) {
    let mut rng = substream(seed, 22);
    let count = samples.min(100);
    let mut dist: f64 = 0.0;
    let mut cocycle: f64 = 0.0;
    let mut qform: f64 = 0.0;
    let mut done = 0;
    while done < count {
        let g = random_sp_element(n, &mut rng);
        let h = random_sp_element(n, &mut rng);
        let scale_point = |z: &SpherePoint, rho: f64| {
            BallPoint::new(z.coords().iter().map(|q| q.scale(rho)).collect())
                .expect("scaled inside the ball")
        };
        let za = random_sphere_point(n, &mut rng);
        let zb = random_sphere_point(n, &mut rng);
        let p = scale_point(&za, rng.gen_range(0.1..0.9));
        let pq = scale_point(&zb, rng.gen_range(0.1..0.9));
        let ok = (|| -> Result<(), qcflat::sphere::SphereError> {
            dist = dist.max(
                (hyp_distance(&act_ball(&g, &p)?, &act_ball(&g, &pq)?)? - hyp_distance(&p, &pq)?)
                    .abs(),
            );
            let gh = g.then(&h);
            let lhs = conformal_factor(&gh, &za)?;
            let rhs = conformal_factor(&g, &za)? * conformal_factor(&h, &act(&g, &za)?)?;
            cocycle = cocycle.max((lhs - rhs).abs() / rhs);
            qform = qform.max(q_form_residual(&g, za.coords(), zb.coords()));
            Ok(())
        })()
        .is_ok();
        if ok {
            done += 1;
        }
    }
    push_check(lines, "sphere", "hyperbolic-distance-invariance", dist, 1e-9, done);
    push_check(lines, "sphere", "conformal-factor-cocycle", cocycle, 1e-12, done);
    push_check(lines, "sphere", "signature-form-identity", qform, 1e-10, done);
}

fn run_cayley_suite(lines: &mut Vec<CheckLine>, n: usize, samples: usize, seed: u64, budget: u64) {
    let (c_q, _) = kernel_constant(n, budget, seed);
    let kernel = GreenKernel::with_constant(n, c_q);
    let q = homogeneous_dim(n);
    let mut rng = substream(seed, 23);
    let count = samples.min(200);

    let chart_clear = |z: &SpherePoint| (Quaternion::ONE + z.coords()[n]).norm_sq() > 0.1;
    let mut metric_fd: f64 = 0.0;
    let mut covariance: f64 = 0.0;
    let mut consistency: f64 = 0.0;
    let mut done = 0;
    while done < count {
        let a = random_sphere_point(n, &mut rng);
        let mut bv = a.coords().to_vec();
        for c in bv.iter_mut() {
            let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1e-3..1e-3));
            *c = *c + Quaternion::from_components(d);
        }
        let b = match SpherePoint::new(bv) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let far = random_sphere_point(n, &mut rng);
        if !chart_clear(&a) || !chart_clear(&b) || !chart_clear(&far) {
            continue;
        }
        let g = random_sp_element(n, &mut rng);
        let ok = (|| -> Result<(), CmdError> {
            let pair = |x: &SpherePoint, y: &SpherePoint| {
                (Quaternion::ONE - qcflat::algebra::hyperhermitian(x.coords(), y.coords())).norm()
            };
            let m = left_diff(&cayley(&a)?, &cayley(&b)?)?;
            let ratio = h_norm(&m).powi(2) / pair(&a, &b);
            let target = 4.0 * (cayley_metric_factor(&a)? * cayley_metric_factor(&b)?).sqrt();
            metric_fd = metric_fd.max((ratio - target).abs() / target);

            let ga = act(&g, &a)?;
            let gfar = act(&g, &far)?;
            let lam = conformal_factor(&g, &a)? * conformal_factor(&g, &far)?;
            let lhs = kernel.sphere_green(&ga, &gfar)? * lam.powf((q - 2.0) / 2.0);
            let rhs = kernel.sphere_green(&a, &far)?;
            covariance = covariance.max((lhs - rhs).abs() / rhs);

            let gh = kernel.heis_green(&cayley(&a)?, &cayley(&far)?)?;
            let lamc = cayley_metric_factor(&a)? * cayley_metric_factor(&far)?;
            let lhs2 = gh * lamc.powf((q - 2.0) / 4.0);
            let rhs2 = kernel.sphere_green(&a, &far)?;
            consistency = consistency.max((lhs2 - rhs2).abs() / rhs2);
            Ok(())
        })()
        .is_ok();
        if ok {
            done += 1;
        }
    }
    push_check(lines, "cayley", "metric-factor-small-separation", metric_fd, 1e-6, done);
    push_check(lines, "cayley", "sphere-green-covariance", covariance, 1e-9, done);
    push_check(lines, "cayley", "cayley-green-consistency", consistency, 1e-9, done);
}

// ----------------------------------------------------------------- schottky

#[derive(Args)]
pub struct SchottkyArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of generators
    #[arg(long)]
    rank: Option<usize>,
    /// Translation length of each generator
    #[arg(long)]
    translation: Option<f64>,
    /// Maximum reduced word length
    #[arg(long)]
    word_len: Option<usize>,
    /// Fail with exit 3 when the ping-pong witness does not verify
    #[arg(long)]
    require_verified: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Resolves the group block and builds the group.
fn build_group(
    n: usize,
    rank: Option<usize>,
    translation: Option<f64>,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(SchottkyGroup, usize, f64), CmdError> {
    let k = rank.or(cfg.schottky.k).unwrap_or(2);
    let t = translation.or(cfg.schottky.t).unwrap_or(6.0);
    let axes = cfg.schottky.axes.unwrap_or(k);
    if k < 1 || axes < k {
        return Err(CmdError::Usage(format!(
            "need 1 <= k <= axes, got k = {k}, axes = {axes}"
        )));
    }
    if axes > n + 1 {
        return Err(CmdError::Usage(format!(
            "only n+1 = {} coordinate axes exist, got axes = {axes}",
            n + 1
        )));
    }
    if !(t > 0.0) {
        return Err(CmdError::Usage(format!("translation length must be positive, got {t}")));
    }
    let rotations = orthogonal_axis_rotations(n, axes);
    let group = build_schottky(n, t, &rotations[..k], 500, seed)?;
    Ok((group, k, t))
}

pub fn cmd_schottky(args: SchottkyArgs) -> Result<u8, CmdError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(1);
    let seed = require_seed(args.seed, &cfg)?;
    let word_len = args.word_len.or(cfg.schottky.l).unwrap_or(6);
    let (group, k, t) = build_group(n, args.rank, args.translation, &cfg, seed)?;

    let orbit = enumerate_orbit(&group, word_len, &BallPoint::origin(n), DEFAULT_WORD_BUDGET)?;
    let delta = estimate_delta(&orbit);

    let config = json!({
        "command": "schottky",
        "n": n,
        "seed": seed,
        "schottky": {"k": k, "T": t, "L": word_len},
    });
    let body = json!({
        "group": {
            "n": n,
            "rank": group.rank,
            "translation_length": group.translation_length,
            "witness": serde_json::to_value(&group.witness)?,
        },
        "orbit": {
            "word_len": word_len,
            "words": orbit.rows.len(),
            "max_sp_residual": orbit.max_sp_residual,
        },
        "delta": match &delta {
            Ok(d) => serde_json::to_value(d)?,
            Err(e) => json!({"error": e.to_string()}),
        },
    });
    let rep = report::envelope("schottky", &config, body);
    print_report(&rep);
    persist(&args.out, "schottky", &rep)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let file = std::fs::File::create(dir.join("orbit.csv"))?;
        orbit.write_csv(std::io::BufWriter::new(file))?;
    }

    if !group.witness.verified {
        eprintln!(
            "ping-pong witness failed: margin {:.3e} at T = {t}",
            group.witness.margin
        );
        if args.require_verified {
            return Ok(EXIT_GROUP);
        }
    }
    Ok(EXIT_OK)
}

// ----------------------------------------------------------------- nayatani

#[derive(Args)]
pub struct NayataniArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of generators
    #[arg(long)]
    rank: Option<usize>,
    /// Translation length of each generator
    #[arg(long)]
    translation: Option<f64>,
    /// Word length for the orbit and the measure
    #[arg(long)]
    word_len: Option<usize>,
    /// Evaluation points
    #[arg(long)]
    samples: Option<usize>,
    /// Prescribed exponent overriding the orbit estimate
    #[arg(long)]
    delta: Option<f64>,
    /// Replace the group measure by this many synthetic equal-weight atoms;
    /// requires --delta
    #[arg(long)]
    synthetic_atoms: Option<usize>,
    /// Fail with exit 3 when the ping-pong witness does not verify
    #[arg(long)]
    require_verified: bool,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cmd_nayatani(args: NayataniArgs) -> Result<u8, CmdError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(1);
    let seed = require_seed(args.seed, &cfg)?;
    let samples = args.samples.unwrap_or(50);
    let delta = args.delta.or(cfg.measure.s);
    let budget = resolve_budget(args.budget, &cfg, 1e6)?;
    let (c_q, c_q_source) = kernel_constant(n, budget, seed);

    let (rep_body, config) = if let Some(atoms) = args.synthetic_atoms {
        let delta = delta.ok_or_else(|| {
            CmdError::Usage("--synthetic-atoms needs a prescribed --delta".into())
        })?;
        let report = synthetic_sign_report(n, delta, atoms, samples, seed, c_q)?;
        let config = json!({
            "command": "nayatani",
            "n": n,
            "seed": seed,
            "samples": samples,
            "synthetic_atoms": atoms,
            "delta": delta,
            "c_q_source": c_q_source,
        });
        (report, config)
    } else {
        let word_len = args
            .word_len
            .or(cfg.measure.l)
            .or(cfg.schottky.l)
            .unwrap_or(6);
        let (group, k, t) = build_group(n, args.rank, args.translation, &cfg, seed)?;
        if !group.witness.verified && args.require_verified {
            eprintln!(
                "ping-pong witness failed: margin {:.3e} at T = {t}",
                group.witness.margin
            );
            return Ok(EXIT_GROUP);
        }
        let report =
            curvature_sign_report(&group, word_len, samples, seed, delta, c_q, DEFAULT_WORD_BUDGET)?;
        let config = json!({
            "command": "nayatani",
            "n": n,
            "seed": seed,
            "samples": samples,
            "schottky": {"k": k, "T": t, "L": word_len},
            "delta": delta,
            "c_q_source": c_q_source,
        });
        (report, config)
    };

    let worst = rep_body
        .samples
        .iter()
        .map(|s| s.crosscheck_residual)
        .fold(0.0f64, f64::max);
    let rep = report::envelope("nayatani", &config, rep_body.to_json());
    print_report(&rep);
    persist(&args.out, "nayatani", &rep)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join("nayatani.csv"))?);
        rep_body.write_csv(&mut file)?;
    }

    eprintln!(
        "branch {}: {} points, signs {:+} .. {:+}, worst crosscheck residual {:.3e}",
        rep_body.branch,
        rep_body.samples.len(),
        rep_body.samples.iter().map(|s| s.sign).min().unwrap_or(0),
        rep_body.samples.iter().map(|s| s.sign).max().unwrap_or(0),
        worst
    );
    if worst > CROSSCHECK_TOL {
        eprintln!("curvature routes disagree beyond {CROSSCHECK_TOL:.1e}");
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- green-eval

#[derive(Args)]
pub struct GreenEvalArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Seed for the quadrature fallback when no closed form exists
    #[arg(long)]
    seed: Option<u64>,
    /// Gauge radius to evaluate at (repeatable); default ladder otherwise
    #[arg(long)]
    radius: Vec<f64>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn cmd_green_eval(args: GreenEvalArgs) -> Result<u8, CmdError> {
    let cfg = load_config(&args.config)?;
    let n = args.n.or(cfg.n).unwrap_or(1);
    let budget = resolve_budget(args.budget, &cfg, 1e6)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let (c_q, c_q_source) = kernel_constant(n, budget, seed);
    let kernel = GreenKernel::with_constant(n, c_q);
    let q = homogeneous_dim(n);

    let radii = if args.radius.is_empty() {
        vec![0.1, 0.5, 1.0, 2.0, 5.0]
    } else {
        args.radius.clone()
    };
    for &r in &radii {
        if !(r > 1e-6) || !r.is_finite() {
            return Err(CmdError::Usage(format!("radius {r} must be positive")));
        }
    }

    let origin = HeisPoint::origin(n);
    let pole = cayley_inv(&origin);
    let mut points = Vec::new();
    for &r in &radii {
        for (kind, eta) in [
            ("horizontal", {
                let mut p = HeisPoint::origin(n);
                p.y[0] = Quaternion::new(r, 0.0, 0.0, 0.0);
                p
            }),
            ("vertical", HeisPoint::new(vec![Quaternion::ZERO; n], [r * r, 0.0, 0.0])),
        ] {
            let gh = kernel.heis_green(&origin, &eta)?;
            let zeta = cayley_inv(&eta);
            let gs = kernel.sphere_green(&zeta, &pole)?;
            let lamc = cayley_metric_factor(&zeta)? * cayley_metric_factor(&pole)?;
            let residual = (gh * lamc.powf((q - 2.0) / 4.0) - gs).abs() / gs;
            points.push(json!({
                "radius": r,
                "kind": kind,
                "heis_green": gh,
                "sphere_green": gs,
                "consistency_residual": residual,
            }));
        }
    }

    let config = json!({
        "command": "green-eval",
        "n": n,
        "radii": radii,
        "budget": budget,
        "seed": seed,
    });
    let body = json!({
        "n": n,
        "homogeneous_dim": q,
        "c_q": c_q,
        "c_q_source": c_q_source,
        "points": points,
    });
    let rep = report::envelope("green-eval", &config, body);
    print_report(&rep);
    persist(&args.out, "green-eval", &rep)?;
    Ok(EXIT_OK)
}
