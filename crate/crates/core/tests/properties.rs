use proptest::prelude::*;
use svplan::minco::{construct, Boundary, Trajectory};
use svplan::pipeline::splice;
use svplan::sequence::{extract_subproblems, MotionSequence, MotionState, Risk, SubKind};
use svplan::sweep::{pose_at, swept_sdf, SweepParams};
use svplan::{Point, Scalar, Shape, Traj};

fn star(radii: &[f64], jitter: &[f64]) -> Vec<Point> {
    let n = radii.len();
    (0..n)
        .map(|k| {
            let a = (k as f64 + jitter[k]) * std::f64::consts::TAU / n as f64;
            Point::new(radii[k] * a.cos(), radii[k] * a.sin())
        })
        .collect()
}

fn boundary(v: &[f64]) -> Boundary<f64> {
    Boundary {
        pos: v[0..2].to_vec(),
        vel: v[2..4].to_vec(),
        acc: v[4..6].to_vec(),
    }
}

proptest! {
    #[test]
    fn spline_interpolates_and_is_c4(
        b0 in prop::collection::vec(-1.0f64..1.0, 6),
        b1 in prop::collection::vec(-1.0f64..1.0, 6),
        wps in prop::collection::vec(-2.0f64..2.0, 6),
        times in prop::collection::vec(0.3f64..2.0, 4),
    ) {
        let (s, e) = (boundary(&b0), boundary(&b1));
        let t = construct(&s, &e, &wps, &times).unwrap();
        for (order, (want_a, want_z)) in [(&s.pos, &e.pos), (&s.vel, &e.vel), (&s.acc, &e.acc)].into_iter().enumerate() {
            let a = t.eval(0.0, order).unwrap();
            let z = t.eval(t.total_duration(), order).unwrap();
            for d in 0..2 {
                prop_assert!((a[d] - want_a[d]).abs() < 1e-9);
                prop_assert!((z[d] - want_z[d]).abs() < 1e-8);
            }
        }
        for i in 0..3 {
            let end = t.piece_eval(i, times[i], 0);
            prop_assert!((end[0] - wps[2 * i]).abs() < 1e-9 && (end[1] - wps[2 * i + 1]).abs() < 1e-9);
            for order in 0..=4 {
                let l = t.piece_eval(i, times[i], order);
                let r = t.piece_eval(i + 1, 0.0, order);
                let scale = 1.0 + l[0].abs().max(l[1].abs());
                prop_assert!((l[0] - r[0]).abs() < 1e-8 * scale && (l[1] - r[1]).abs() < 1e-8 * scale);
            }
        }
        prop_assert!(t.control_effort() >= 0.0);
    }

    #[test]
    fn trajectory_text_round_trip(
        coeffs in prop::collection::vec(-1e3f64..1e3, 36),
        times in prop::collection::vec(1e-3f64..10.0, 2),
    ) {
        let t = Trajectory::from_parts(3, times, coeffs).unwrap();
        prop_assert_eq!(Traj::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn body_sdf_sign_and_lipschitz(
        radii in prop::collection::vec(0.1f64..1.0, 5..10),
        jitter in prop::collection::vec(0.1f64..0.9, 10),
        px in -1.5f64..1.5, py in -1.5f64..1.5, qx in -1.5f64..1.5, qy in -1.5f64..1.5,
    ) {
        let poly = star(&radii, &jitter);
        let shape = Shape::new(poly.clone(), Some(Point::zero())).unwrap();
        let (p, q) = (Point::new(px, py), Point::new(qx, qy));
        let (sp, sq) = (shape.body_sdf(p), shape.body_sdf(q));
        prop_assert!((sp - sq).abs() <= p.distance(q) + 1e-12);
        let nearest_vertex = poly.iter().map(|v| v.distance(p)).fold(f64::INFINITY, f64::min);
        prop_assert!(sp.abs() <= nearest_vertex + 1e-12);
        prop_assert!(shape.body_sdf(Point::zero()) < 0.0);
        let (_, g) = shape.body_sdf_with_gradient(p);
        if sp.abs() > 1e-6 {
            prop_assert!((g.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn swept_value_bounds_every_sample(
        a in prop::collection::vec(-0.5f64..0.5, 3),
        b in prop::collection::vec(-0.5f64..0.5, 3),
        xs in prop::collection::vec(-1.2f64..1.2, 2),
        ks in prop::collection::vec(0usize..=200, 5),
    ) {
        let shape = Shape::rectangle(0.6, 0.2).unwrap();
        let traj = construct(&Boundary::rest(a), &Boundary::rest(b), &[], &[1.0]).unwrap();
        let x = Point::new(xs[0], xs[1]);
        let r = swept_sdf(&traj, &shape, x, (0.0, 1.0), SweepParams::for_resolution(0.1));
        for k in ks {
            let t = k as f64 / 200.0;
            prop_assert!(r.value <= shape.world_sdf(x, &pose_at(&traj, t)) + 1e-12);
        }
        prop_assert!((shape.world_sdf(x, &pose_at(&traj, r.t_star)) - r.value).abs() < 1e-9);
    }

    #[test]
    fn splice_is_c2_and_keeps_positions(
        pts in prop::collection::vec(-2.0f64..2.0, 8),
        times in prop::collection::vec(0.5f64..1.5, 3),
        rates in prop::collection::vec(-0.5f64..0.5, 8),
    ) {
        // Three single-piece parts meeting at shared positions with
        // mismatched junction velocities and accelerations.
        let p = |k: usize| vec![pts[2 * k], pts[2 * k + 1]];
        let b = |k: usize, r: usize| Boundary {
            pos: p(k),
            vel: vec![rates[r], rates[r + 1]],
            acc: vec![rates[r + 2] * 0.5, rates[r + 3] * 0.5],
        };
        let parts: Vec<Traj> = (0..3)
            .map(|i| {
                let s = if i == 0 { Boundary::rest(p(0)) } else { b(i, 0) };
                let e = if i == 2 { Boundary::rest(p(3)) } else { b(i + 1, 4) };
                construct(&s, &e, &[], &[times[i]]).unwrap()
            })
            .collect();
        let whole = splice(&parts).unwrap();
        prop_assert_eq!(whole.num_pieces(), 3);
        for i in 0..2 {
            for order in 0..3 {
                let l = whole.piece_eval(i, whole.durations()[i], order);
                let r = whole.piece_eval(i + 1, 0.0, order);
                prop_assert!((l[0] - r[0]).abs() < 1e-8 && (l[1] - r[1]).abs() < 1e-8);
            }
            let j = whole.piece_eval(i + 1, 0.0, 0);
            prop_assert!((j[0] - p(i + 1)[0]).abs() < 1e-9 && (j[1] - p(i + 1)[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn subproblems_cover_and_share_junctions(
        risks in prop::collection::vec(prop::bool::weighted(0.15), 1..60),
        pad in 0usize..7,
    ) {
        let seq = MotionSequence {
            states: risks
                .iter()
                .enumerate()
                .map(|(i, &h)| MotionState {
                    position: Point::new(i as f64 * 0.1, 0.0),
                    orientation: 0,
                    risk: if h { Risk::High } else { Risk::Low },
                })
                .collect(),
            path_id: 0,
        };
        let subs = extract_subproblems(&seq, pad);
        prop_assert_eq!(subs[0].offset, 0);
        let last = subs.last().unwrap();
        prop_assert_eq!(last.offset + last.states.len(), risks.len());
        for w in subs.windows(2) {
            prop_assert!(w[0].kind != w[1].kind);
            prop_assert_eq!(w[0].offset + w[0].states.len() - 1, w[1].offset);
        }
        for s in &subs {
            if s.kind == SubKind::R2 {
                prop_assert!(s.states.iter().all(|m| m.risk == Risk::Low));
            }
        }
        let high_in_se2 = subs
            .iter()
            .filter(|s| s.kind == SubKind::Se2)
            .map(|s| s.states.iter().filter(|m| m.risk == Risk::High).count())
            .sum::<usize>();
        prop_assert_eq!(high_in_se2, seq.high_risk_count());
    }

    #[test]
    fn wrapped_angles_stay_in_range(a in -1e3f64..1e3) {
        let w = a.wrap_angle();
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let k = ((a - w) / std::f64::consts::TAU).round();
        prop_assert!((a - w - k * std::f64::consts::TAU).abs() < 1e-9);
    }
}
