use proptest::prelude::*;
use tbtsp_core::costs::{build_tbtsp_costs_serial, cache_roundtrip};
use tbtsp_core::model::{config_velocity, heading_to_standard};
use tbtsp_core::trajectory::planar_time_optimal;
use tbtsp_core::{build_ddtsp_costs, build_tbtsp_costs, DiscretizationScheme, Instance, KinematicLimits, Waypoint};
use tbtsp_oracles::axis::integrate_phases;
use tbtsp_oracles::dubins::shortest_length;
use tbtsp_oracles::sync::earliest_common;

fn instance(points: &[(f64, f64)], v_max: f64, a_max: f64, h: usize, fractions: &[f64]) -> Instance {
    let limits = KinematicLimits::new(v_max, a_max).unwrap();
    let scheme = DiscretizationScheme::equidistant(h, fractions, &limits).unwrap();
    let waypoints = points.iter().enumerate().map(|(k, &(x, y))| Waypoint { id: k + 1, x, y }).collect();
    Instance::new(waypoints, limits, scheme).unwrap()
}

fn random_instance() -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 3..5),
        0.5f64..3.0,
        0.2f64..1.0,
        2usize..5,
        prop_oneof![Just(vec![1.0]), Just(vec![0.5, 1.0]), Just(vec![0.25, 0.75])],
    )
        .prop_map(|(pts, v, a, h, f)| instance(&pts, v, a, h, &f))
}

fn nodes(inst: &Instance) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    let n = inst.len();
    let c = inst.scheme().configs_per_waypoint();
    (0..n).flat_map(move |i| (0..c).flat_map(move |ci| (0..n).flat_map(move |j| (0..c).map(move |cj| (i, ci, j, cj)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_entry_beats_the_straight_line_at_top_speed(inst in random_instance()) {
        let t = build_tbtsp_costs(&inst).unwrap();
        let d = build_ddtsp_costs(&inst);
        let v = inst.limits().v_max();
        for (i, ci, j, cj) in nodes(&inst) {
            let (a, b) = (inst.waypoints()[i], inst.waypoints()[j]);
            let bound = (b.x - a.x).hypot(b.y - a.y) / v;
            if i == j {
                prop_assert!(t.cost(i, ci, j, cj).is_infinite());
                continue;
            }
            prop_assert!(t.cost(i, ci, j, cj) >= bound - 1e-9);
            let (hi, hj) = (ci / inst.scheme().speed_count(), cj / inst.scheme().speed_count());
            prop_assert!(d.cost(i, hi, j, hj) >= bound - 1e-9);
        }
    }

    #[test]
    fn every_entry_is_a_realizable_trajectory(inst in random_instance()) {
        let t = build_tbtsp_costs(&inst).unwrap();
        let scheme = inst.scheme();
        let ax = inst.limits().axis_limits();
        for (i, ci, j, cj) in nodes(&inst).filter(|e| e.0 != e.2) {
            let (a, b) = (inst.waypoints()[i], inst.waypoints()[j]);
            let vs = config_velocity(&scheme.config_at(i + 1, ci), scheme);
            let ve = config_velocity(&scheme.config_at(j + 1, cj), scheme);
            let p = planar_time_optimal((a.x, a.y), vs, (b.x, b.y), ve, inst.limits()).unwrap();
            prop_assert_eq!(p.duration, t.cost(i, ci, j, cj));
            for (axis, start, end) in [(&p.x_axis, a.x, b.x), (&p.y_axis, a.y, b.y)] {
                let phases = [(axis.a0, axis.t1), (axis.a1, axis.t2), (axis.a2, axis.t3)];
                let (pos, vel) = integrate_phases(start, axis.boundary.v_s, &phases, 400);
                prop_assert!((pos - end).abs() < 1e-6 && (vel - axis.boundary.v_e).abs() < 1e-6);
                prop_assert!(phases.iter().all(|&(acc, dt)| acc.abs() <= ax.a_axis + 1e-12 && dt >= 0.0));
                prop_assert!((axis.duration() - p.duration).abs() < 1e-9 * p.duration.max(1.0));
            }
        }
    }

    #[test]
    fn dubins_entries_match_tangent_construction(inst in random_instance()) {
        let d = build_ddtsp_costs(&inst);
        let lim = inst.limits();
        let r = lim.v_max() * lim.v_max() / lim.a_max();
        let h = inst.scheme().headings();
        for (i, ci, j, cj) in nodes(&inst).filter(|e| e.0 != e.2 && e.1 < h.len() && e.3 < h.len()) {
            let (a, b) = (inst.waypoints()[i], inst.waypoints()[j]);
            let pa = (a.x, a.y, heading_to_standard(h[ci]));
            let pb = (b.x, b.y, heading_to_standard(h[cj]));
            let expected = shortest_length(pa, pb, r) / lim.v_max();
            prop_assert!((d.cost(i, ci, j, cj) - expected).abs() < 1e-6 * (1.0 + expected));
        }
    }

    #[test]
    fn scaling_space_and_limits_keeps_times(inst in random_instance(), k in 0.25f64..4.0) {
        let pts: Vec<(f64, f64)> = inst.waypoints().iter().map(|w| (w.x * k, w.y * k)).collect();
        let lim = inst.limits();
        let scaled = instance(&pts, lim.v_max() * k, lim.a_max() * k, inst.scheme().heading_count(), inst.scheme().fractions());
        let (a, b) = (build_tbtsp_costs(&inst).unwrap(), build_tbtsp_costs(&scaled).unwrap());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!(x == y || (x - y).abs() < 1e-6 * (1.0 + x), "{} vs {}", x, y);
        }
    }

    #[test]
    fn single_precision_agrees(inst in random_instance()) {
        let pts: Vec<(f32, f32)> = inst.waypoints().iter().map(|w| (w.x as f32, w.y as f32)).collect();
        let lim = inst.limits();
        let limits = KinematicLimits::new(lim.v_max() as f32, lim.a_max() as f32).unwrap();
        let fractions: Vec<f32> = inst.scheme().fractions().iter().map(|&f| f as f32).collect();
        let scheme = DiscretizationScheme::equidistant(inst.scheme().heading_count(), &fractions, &limits).unwrap();
        let wps = pts.iter().enumerate().map(|(k, &(x, y))| Waypoint { id: k + 1, x, y }).collect();
        let single = Instance::new(wps, limits, scheme).unwrap();
        let (a, b) = (build_tbtsp_costs(&inst).unwrap(), build_tbtsp_costs(&single).unwrap());
        for (x, &y) in a.as_slice().iter().zip(b.as_slice()) {
            if x.is_finite() {
                prop_assert!((x - y as f64).abs() < 1e-3 * (1.0 + x), "{} vs {}", x, y);
            }
        }
    }
}

#[test]
fn parallel_and_serial_builds_are_identical() {
    let inst = instance(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (5.0, 3.0)], 2.0, 0.5, 8, &[0.1, 0.55, 1.0]);
    let a = build_tbtsp_costs(&inst).unwrap();
    let b = build_tbtsp_costs_serial(&inst).unwrap();
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cache_roundtrip(&a, &dir.path().join("t.bin")).unwrap(), a);
}

#[test]
fn sampled_entries_are_the_earliest_common_time() {
    let inst = instance(&[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)], 1.5, 0.5, 4, &[1.0]);
    let t = build_tbtsp_costs(&inst).unwrap();
    let scheme = inst.scheme();
    let ax = inst.limits().axis_limits();
    for (i, ci, j, cj) in nodes(&inst).filter(|e| e.0 != e.2).step_by(7) {
        let (a, b) = (inst.waypoints()[i], inst.waypoints()[j]);
        let vs = config_velocity(&scheme.config_at(i + 1, ci), scheme);
        let ve = config_velocity(&scheme.config_at(j + 1, cj), scheme);
        let oracle = earliest_common((b.x - a.x, vs.0, ve.0), (b.y - a.y, vs.1, ve.1), 0.0, ax.v_axis, ax.a_axis, 0.05, 1e-5);
        let cost = t.cost(i, ci, j, cj);
        assert!((cost - oracle).abs() < 1e-3, "{i} {ci} -> {j} {cj}: {cost} vs {oracle}");
    }
}
