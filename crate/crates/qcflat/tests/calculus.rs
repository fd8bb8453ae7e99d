use qcflat::calculus::{
    conformal_scalar_curvature_exp, horizontal_derivatives, horizontal_gradient_sq,
    identity_suite, sublaplacian, AffineMap, AffinePullback, FnField, GaugeFourth, LogOfField,
    PowerOfShiftedGauge, SampleBox, ScalarField, ScaledField, SumField,
};
use qcflat::heisenberg::{h_mul, left_diff, HeisPoint};
use qcflat::rng::seeded;
use qcflat::homogeneous_dim;

#[test]
fn identity_suite_closed_form_and_fd() {
    for n in [1usize, 2] {
        for r in identity_suite(n, 300, 17) {
            let tol = if r.identity.ends_with("-fd") { 1e-5 } else { 1e-10 };
            assert!(
                r.max_rel < tol,
                "{} at n = {n}: max_rel {:.3e} over tol {tol:.1e}",
                r.identity,
                r.max_rel
            );
        }
    }
}

#[test]
fn constant_exponent_has_zero_curvature() {
    let constant = FnField::new(1, |_: &HeisPoint| 0.75);
    let mut rng = seeded(5);
    let box_ = SampleBox::centered(1, 2.0);
    for _ in 0..20 {
        let p = box_.sample(&mut rng);
        assert!(conformal_scalar_curvature_exp(&constant, &p).abs() < 1e-8);
    }
}

#[test]
fn affine_pullback_matches_direct_composition() {
    let n = 1;
    let eta = HeisPoint::from_coords(n, &[0.4, -0.2, 0.7, 0.1, 0.3, -0.5, 0.2]);
    let gauge_of_diff = AffinePullback {
        inner: GaugeFourth { n },
        map: AffineMap::left_diff_in_first(&eta),
    };
    let direct = FnField::new(n, move |p: &HeisPoint| {
        left_diff(p, &eta).unwrap().gauge4()
    });
    let mut rng = seeded(6);
    let box_ = SampleBox::centered(n, 1.5);
    for _ in 0..30 {
        let p = box_.sample(&mut rng);
        assert!((gauge_of_diff.eval(&p) - direct.eval(&p)).abs() < 1e-12);
        let ga = horizontal_derivatives(&gauge_of_diff, &p);
        let gb = horizontal_derivatives(&direct, &p);
        for (a, b) in ga.iter().zip(gb.iter()) {
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
        }
        assert!(
            (sublaplacian(&gauge_of_diff, &p) - sublaplacian(&direct, &p)).abs()
                < 1e-4 * (1.0 + sublaplacian(&gauge_of_diff, &p).abs())
        );
    }
}

#[test]
fn translation_pullback_shifts_the_pole() {
    let n = 1;
    let eta = HeisPoint::from_coords(n, &[0.4, -0.2, 0.7, 0.1, 0.3, -0.5, 0.2]);
    let field = AffinePullback {
        inner: GaugeFourth { n },
        map: AffineMap::left_diff_in_first(&eta),
    };
    assert!(field.eval(&eta).abs() < 1e-14);
    let step = HeisPoint::from_coords(n, &[0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let moved = h_mul(&eta, &step).unwrap();
    assert!((field.eval(&moved) - left_diff(&moved, &eta).unwrap().gauge4()).abs() < 1e-13);
}

#[test]
fn scaled_and_sum_fields_are_linear() {
    let n = 1;
    let a = ScaledField {
        c: 2.5,
        inner: GaugeFourth { n },
    };
    let b = ScaledField {
        c: -0.5,
        inner: PowerOfShiftedGauge::new(n, 1.0, 0.5),
    };
    let sum = SumField {
        n,
        terms: vec![
            Box::new(a) as Box<dyn ScalarField>,
            Box::new(b) as Box<dyn ScalarField>,
        ],
    };
    let mut rng = seeded(7);
    let box_ = SampleBox::centered(n, 2.0);
    for _ in 0..20 {
        let p = box_.sample(&mut rng);
        let direct = 2.5 * p.gauge4() - 0.5 * (p.gauge4() + 1.0).powf(0.5);
        assert!((sum.eval(&p) - direct).abs() < 1e-12);
        let lap_direct = 2.5 * sublaplacian(&GaugeFourth { n }, &p)
            - 0.5 * sublaplacian(&PowerOfShiftedGauge::new(n, 1.0, 0.5), &p);
        assert!((sublaplacian(&sum, &p) - lap_direct).abs() < 1e-10);
    }
}

#[test]
fn log_field_gradient_identity() {
    let n = 1;
    let log_gauge = LogOfField {
        inner: GaugeFourth { n },
        coeff: 0.25,
    };
    let mut rng = seeded(8);
    let box_ = SampleBox::centered(n, 2.0);
    for _ in 0..20 {
        let p = box_.sample(&mut rng);
        if p.gauge4() < 0.1 {
            continue;
        }
        let direct = 0.25 * p.gauge4().ln();
        assert!((log_gauge.eval(&p) - direct).abs() < 1e-12);
        let grad_log: Vec<f64> = horizontal_derivatives(&log_gauge, &p);
        let grad_gauge = horizontal_derivatives(&GaugeFourth { n }, &p);
        for (gl, gg) in grad_log.iter().zip(grad_gauge.iter()) {
            assert!((gl - 0.25 * gg / p.gauge4()).abs() < 1e-11);
        }
    }
}

#[test]
fn gradient_square_uses_half_frame_normalization() {
    let n = 1;
    let gauge = GaugeFourth { n };
    let mut rng = seeded(9);
    let box_ = SampleBox::centered(n, 2.0);
    for _ in 0..20 {
        let p = box_.sample(&mut rng);
        let yd = horizontal_derivatives(&gauge, &p);
        let direct: f64 = 0.5 * yd.iter().map(|d| d * d).sum::<f64>();
        assert!((horizontal_gradient_sq(&gauge, &p) - direct).abs() < 1e-11);
    }
}

#[test]
fn cylinder_curvature_scales_like_inverse_gauge() {
    let n = 1;
    let q = homogeneous_dim(n);
    let cyl = LogOfField {
        inner: GaugeFourth { n },
        coeff: -0.25,
    };
    let p = HeisPoint::from_coords(n, &[0.9, -0.3, 0.2, 0.4, 0.6, -0.2, 0.1]);
    let expected = (q - 2.0) * (q + 2.0) / 2.0 * p.y_norm_sq() / p.gauge4().sqrt();
    let got = conformal_scalar_curvature_exp(&cyl, &p);
    assert!((got - expected).abs() < 1e-10 * expected.abs());
}
