use qcflat::kleinian::*;
use qcflat::sphere::BallPoint;

fn main() {
    let rot = orthogonal_axis_rotations(1, 2);
    let g = build_schottky(1, 6.0, &rot, 500, 7).unwrap();
    let orbit9 = enumerate_orbit(&g, 9, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
    let s = estimate_delta(&orbit9).unwrap().delta_hat;
    for (count, bseed) in [(12usize, 3u64), (16, 11), (8, 5)] {
        let battery = default_test_battery(1, count, bseed);
        let mut line = format!("battery({count},{bseed}):");
        for l in [6usize, 9] {
            let mu = ps_measure(&g, s, l, &BallPoint::origin(1), DEFAULT_WORD_BUDGET).unwrap();
            let mut worst = 0.0f64;
            for e in g.alphabet() {
                worst = worst.max(quasi_invariance_residual(&mu, g.letter(e), s, &battery).unwrap());
            }
            line.push_str(&format!("  L={l}: {worst:.6}"));
        }
        println!("{line}");
    }
}
