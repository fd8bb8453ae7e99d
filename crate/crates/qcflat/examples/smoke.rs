use qcflat::algebra::{Quaternion, QuatMatrix};
use qcflat::kleinian::{build_schottky, orthogonal_axis_rotations, ps_measure};
use qcflat::nayatani::{
    curvature_sign_report, measure_from_atoms, rotation_invariant_measure, NayataniField,
};
use qcflat::sphere::{cayley, rotation_elem, BallPoint, SpherePoint};
use std::f64::consts::PI;
use std::time::Instant;

fn sp(v: Vec<[f64; 4]>) -> SpherePoint {
    SpherePoint::new(v.into_iter().map(Quaternion::from_components).collect()).unwrap()
}

fn main() {
    let c_q = 1.0 / (12.0 * PI.powi(4));
    let n = 1usize;

    // trivial kappa-power collapses
    let a0 = sp(vec![[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]);
    let a1 = sp(vec![[-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]);
    let xi = sp(vec![[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]);
    let single = NayataniField::new(
        measure_from_atoms(n, vec![(a0.clone(), 1.0)]).unwrap(),
        0.8,
        c_q,
    )
    .unwrap();
    let gs = qcflat::sphere::sphere_green_with(c_q, n, &xi, &a0).unwrap();
    println!(
        "single-atom collapse rel: {:.3e}",
        (single.phi_gamma(&xi).unwrap() - gs).abs() / gs
    );
    let double = NayataniField::new(
        measure_from_atoms(n, vec![(a0.clone(), 1.0), (a1.clone(), 1.0)]).unwrap(),
        0.8,
        c_q,
    )
    .unwrap();
    // equidistant: both atoms at gauge distance 1 from xi; weights 1/2 each
    let expect = (0.5f64 * gs.powf(double.kappa) * 2.0).powf(1.0 / double.kappa);
    println!(
        "two-atom equidistant rel: {:.3e}  kappa {:.4}",
        (double.phi_gamma(&xi).unwrap() - expect).abs() / expect,
        double.kappa
    );

    // rotation-invariant surrogate
    let mut u = QuatMatrix::identity(2);
    u.set(0, 0, Quaternion::from_components([0.0, 1.0, 0.0, 0.0]));
    u.set(1, 1, Quaternion::from_components([0.0, 0.0, 1.0, 0.0]));
    let rot = rotation_elem(&u).unwrap();
    let base = sp(vec![[0.6, 0.3, -0.2, 0.1], [0.5, -0.1, 0.4, 0.2]]);
    let inv_measure = rotation_invariant_measure(&base, &rot, 4).unwrap();
    let inv_field = NayataniField::new(inv_measure, 1.3, c_q).unwrap();
    let probe = sp(vec![[0.2, -0.5, 0.3, 0.4], [0.7, 0.2, -0.1, 0.3]]);
    println!(
        "rotation surrogate equivariance: {:.3e}",
        inv_field.equivariance_residual(&rot, &probe).unwrap()
    );

    // pullback consistency + crosscheck on a synthetic 3-atom measure
    let a2 = sp(vec![[0.3, 0.7, -0.2, 0.4], [0.2, 0.4, 0.1, -0.3]]);
    let m3 = measure_from_atoms(
        n,
        vec![(a0.clone(), 0.5), (a1.clone(), 0.3), (a2.clone(), 0.2)],
    )
    .unwrap();
    for delta in [1.0f64, 4.0, 5.0] {
        let field = NayataniField::new(m3.clone(), delta, c_q).unwrap();
        let pulled = field.pulled_to_heis().unwrap();
        let pc = field
            .pullback_consistency_residual(&pulled, &probe)
            .unwrap();
        let xi_h = cayley(&probe).unwrap();
        let chk = pulled.scalar_crosscheck(&xi_h).unwrap();
        let am = pulled.a_matrix(&xi_h).unwrap();
        println!(
            "delta {:.1}: pullback {:.3e} scalar {:+.6e} route-b {:+.6e} residual {:.3e} trA {:.3e} minEig {:+.3e}",
            delta, pc, chk.covariance_route, chk.conformal_route, chk.residual,
            am.trace(), am.min_eigenvalue()
        );
    }

    // single atom: TrA exactly zero
    let sp1 = single.pulled_to_heis().unwrap();
    let xi_h = cayley(&probe).unwrap();
    println!(
        "single-atom trA: {:.3e}  scalar {:.3e}",
        sp1.a_matrix(&xi_h).unwrap().trace(),
        sp1.scalar(&xi_h).unwrap()
    );

    // full pipeline, rank 2, T = 6
    let t0 = Instant::now();
    let rots = orthogonal_axis_rotations(n, 2);
    let group = build_schottky(n, 6.0, &rots, 512, 11).unwrap();
    let report = curvature_sign_report(&group, 6, 50, 17, None, c_q, 1 << 21).unwrap();
    let npos = report.samples.iter().filter(|s| s.sign == 1).count();
    let maxres = report
        .samples
        .iter()
        .map(|s| s.crosscheck_residual)
        .fold(0.0f64, f64::max);
    let min_scalar = report
        .samples
        .iter()
        .map(|s| s.scalar)
        .fold(f64::INFINITY, f64::min);
    let min_eig = report
        .samples
        .iter()
        .map(|s| s.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    println!(
        "rank-2 report: branch {} delta_hat {:?} used {:.4} atoms {} positive {}/{} min_scalar {:.3e} max residual {:.3e} min eig {:+.3e}  [{:?}]",
        report.branch, report.delta_hat, report.delta_used, report.atom_count,
        npos, report.samples.len(), min_scalar, maxres, min_eig, t0.elapsed()
    );

    // synthetic zero and negative branches through the report path
    let zero = curvature_sign_report(&group, 4, 10, 17, Some(4.0), c_q, 1 << 21).unwrap();
    let maxabs = zero
        .samples
        .iter()
        .map(|s| s.scalar.abs())
        .fold(0.0f64, f64::max);
    println!(
        "zero branch: {} max|scalar| {:.3e} signs {:?}",
        zero.branch,
        maxabs,
        zero.samples.iter().map(|s| s.sign).collect::<Vec<_>>()
    );
    let neg = curvature_sign_report(&group, 4, 10, 17, Some(5.0), c_q, 1 << 21).unwrap();
    let nneg = neg.samples.iter().filter(|s| s.sign == -1).count();
    println!(
        "negative branch: {} negatives {}/{} max residual {:.3e}",
        neg.branch,
        nneg,
        neg.samples.len(),
        neg.samples
            .iter()
            .map(|s| s.crosscheck_residual)
            .fold(0.0f64, f64::max)
    );

    // equivariance for the truncated orbit measure, near-boundary basepoint
    let t1 = Instant::now();
    let r = 0.9999 / 2.0f64.sqrt();
    let q0 = BallPoint::new(vec![
        Quaternion::from_components([r, 0.0, 0.0, 0.0]),
        Quaternion::from_components([r, 0.0, 0.0, 0.0]),
    ])
    .unwrap();
    for s in [0.8f64, 1.0, 1.3] {
        let mut line = format!("equivariance q0-boundary s={:.4}:", s);
        for l in [6usize, 9] {
            let m = ps_measure(&group, s, l, &q0, 1 << 21).unwrap();
            let f = NayataniField::new(m, s, c_q).unwrap();
            let points = qcflat::nayatani::sample_domain_points(&group, &f.measure, 20, 23).unwrap();
            let mut worst = 0.0f64;
            for p in &points {
                for g in group.generators() {
                    worst = worst.max(f.equivariance_residual(g, p).unwrap());
                }
            }
            line.push_str(&format!("  L={} -> {:.4e}", l, worst));
        }
        println!("{}", line);
    }
    println!("sweep took {:?}", t1.elapsed());

    // cyclic group report
    let rots1 = orthogonal_axis_rotations(n, 1);
    let cyc = build_schottky(n, 6.0, &rots1, 512, 11).unwrap();
    let creport = curvature_sign_report(&cyc, 40, 10, 29, None, c_q, 1 << 21).unwrap();
    let cpos = creport.samples.iter().filter(|s| s.sign == 1).count();
    println!(
        "cyclic report: branch {} delta_hat {:?} positive {}/{} notes {:?}",
        creport.branch,
        creport.delta_hat,
        cpos,
        creport.samples.len(),
        creport.notes
    );
}
