use qcflat::kleinian::*;
use qcflat::sphere::*;

fn main() {
    let axes = orthogonal_axis_rotations(1, 2);
    let g = build_schottky(1, 6.0, &axes, 64, 11).unwrap();
    let base = BallPoint::origin(1);
    for l in [8usize, 9] {
        let orbit = enumerate_orbit(&g, l, &base, DEFAULT_WORD_BUDGET).unwrap();
        let mut dists: Vec<f64> = orbit.rows.iter().map(|r| r.distance).collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_d = *dists.last().unwrap();
        println!("L={} rows={} max_d={:.2}", l, orbit.rows.len(), max_d);
        let mut edge = 3.0;
        while edge <= max_d + 3.0 {
            let cnt = dists.partition_point(|&d| d <= edge);
            if cnt > 0 {
                println!("  edge {:5.1}  N {:8}  lnN {:.4}", edge, cnt, (cnt as f64).ln());
            }
            edge += 3.0;
        }
        let est = estimate_delta(&orbit).unwrap();
        println!("  certified estimator: delta_hat {:.4} R2 {:.5} ({} annuli)", est.delta_hat, est.r_squared, est.annuli.len());
    }
}
