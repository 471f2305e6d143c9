use num_complex::Complex64 as C;
use proptest::prelude::*;

use pidspace_core::analyzer::closed_loop_charpoly;
use pidspace_core::boundary::{self, GainPlane};
use pidspace_core::tf::Gain;
use pidspace_core::{GainScaling, PidGains, Polynomial, Structure, TransferFunction};

fn horner(c: &[f64], z: C) -> C {
    c.iter().fold(C::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn poly_from_real_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a * r;
        }
        c = next;
    }
    c
}

fn structure() -> impl Strategy<Value = Structure> {
    prop_oneof![Just(Structure::P), Just(Structure::PI), Just(Structure::PD), Just(Structure::PID)]
}

fn gains_for(s: Structure, k: [f64; 3]) -> PidGains {
    let mut g = PidGains::new(0.0, 0.0, 0.0, s).unwrap();
    for (gain, v) in Gain::ALL.into_iter().zip(k) {
        if s.has(gain) {
            g.set(gain, v);
        }
    }
    g
}

/// `den Dc + num Dc C` at `z` from the controller written as a sum of
/// fractions, independently of the crate's basis polynomials.
fn direct_charpoly(num: &[f64], den: &[f64], g: &PidGains, z: C) -> C {
    let dc = match g.structure {
        Structure::P => C::new(1.0, 0.0),
        Structure::PI => z - 1.0,
        Structure::PD => z,
        Structure::PID => z * (z - 1.0),
    };
    let c = g.kp + g.ki * z / (z - 1.0) + g.kd * (z - 1.0) / z;
    horner(den, z) * dc + horner(num, z) * dc * c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zoh_maps_poles_and_keeps_dc_gain(
        poles in prop::collection::vec(-20.0f64..-0.1, 1..4),
        num in prop::collection::vec(-5.0f64..5.0, 1..3),
        t in 0.001f64..0.2,
    ) {
        let mut sorted = poles.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
        prop_assume!(num.len() <= poles.len());
        let dc_num = *num.last().unwrap();
        prop_assume!(dc_num.abs() > 0.1);
        let den = poly_from_real_roots(&poles);
        let g = TransferFunction::continuous(&num, &den).unwrap();
        let d = g.c2d_zoh(t).unwrap();
        let zp = d.poles().unwrap();
        for p in &poles {
            let target = (p * t).exp();
            let best = zp.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-6, "pole {p} -> {target}, nearest miss {best}");
        }
        let gs0 = dc_num / den.last().unwrap();
        let gz1 = d.num().eval_real(1.0) / d.den().eval_real(1.0);
        prop_assert!((gs0 - gz1).abs() <= 1e-7 * gs0.abs().max(1.0));
    }

    #[test]
    fn roots_round_trip(
        reals in prop::collection::vec(-2.0f64..2.0, 0..4),
        pairs in prop::collection::vec((-1.5f64..1.5, 0.1f64..1.5), 0..3),
    ) {
        let mut roots: Vec<C> = reals.iter().map(|r| C::new(*r, 0.0)).collect();
        for (re, im) in &pairs {
            roots.push(C::new(*re, *im));
            roots.push(C::new(*re, -*im));
        }
        prop_assume!(!roots.is_empty());
        let sep = roots.iter().enumerate()
            .flat_map(|(i, a)| roots[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(sep > 0.05);
        let p = Polynomial::from_roots(&roots);
        let found = p.roots().unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for r in &roots {
            let best = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-7, "root {r} missed by {best}");
        }
    }

    #[test]
    fn regrouped_rows_equal_direct_evaluation(
        num in prop::collection::vec(-3.0f64..3.0, 1..4),
        den_tail in prop::collection::vec(-3.0f64..3.0, 3..5),
        k in [-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0],
        s in structure(),
        theta in 0.01f64..3.13,
    ) {
        let mut den = vec![1.0];
        den.extend(&den_tail);
        let plant = TransferFunction::discrete(&num, &den, 0.1).unwrap();
        let g = gains_for(s, k);
        let rows = boundary::characteristic_rows(&plant, s, theta);
        let r = rows.residual(&g);
        let z = C::from_polar(1.0, theta);
        let direct = direct_charpoly(&num, &den, &g, z);
        let scale = 1.0 + horner(&den, z).norm() * 2.0 + horner(&num, z).norm() * 20.0;
        prop_assert!((r[0] - direct.re).abs() <= 1e-12 * scale);
        prop_assert!((r[1] - direct.im).abs() <= 1e-12 * scale);
        let p = closed_loop_charpoly(&plant, &g).unwrap();
        prop_assert!((p.eval(z) - direct).norm() <= 1e-12 * scale);
    }

    #[test]
    fn rows_are_conjugate_symmetric(
        num in prop::collection::vec(-3.0f64..3.0, 1..3),
        den_tail in prop::collection::vec(-3.0f64..3.0, 2..4),
        s in structure(),
        theta in 0.01f64..3.13,
    ) {
        let mut den = vec![1.0];
        den.extend(&den_tail);
        let plant = TransferFunction::discrete(&num, &den, 1.0).unwrap();
        let a = boundary::characteristic_rows(&plant, s, theta);
        let b = boundary::characteristic_rows(&plant, s, -theta);
        for g in 0..3 {
            prop_assert!((a.a[0][g] - b.a[0][g]).abs() < 1e-12);
            prop_assert!((a.a[1][g] + b.a[1][g]).abs() < 1e-12);
        }
        prop_assert!((a.b[0] - b.b[0]).abs() < 1e-12 && (a.b[1] + b.b[1]).abs() < 1e-12);
    }

    #[test]
    fn crb_points_put_a_root_on_the_circle(
        num in prop::collection::vec(0.2f64..2.0, 1..3),
        den_tail in prop::collection::vec(-1.0f64..1.0, 2..4),
    ) {
        let mut den = vec![1.0];
        den.extend(&den_tail);
        let plant = TransferFunction::discrete(&num, &den, 1.0).unwrap();
        let plane = GainPlane::pd(GainScaling::Standard);
        let grid = pidspace_core::grid::open_half_circle(64);
        let crb = boundary::stability_crb(&plant, &plane, &grid).unwrap();
        for p in crb.points.iter().step_by(7) {
            let g = plane.gains_at(p.x, p.y);
            let cp = closed_loop_charpoly(&plant, &g).unwrap();
            let z = C::from_polar(1.0, p.theta);
            let scale = cp.coeffs().iter().map(|c| c.abs()).sum::<f64>();
            prop_assert!(cp.eval(z).norm() <= 1e-9 * scale);
        }
    }
}
