use std::f64::consts::PI;
use std::sync::OnceLock;

use sewn_core::metric::{sample_sphere3_with_curve, FiniteMetricSpace};
use sewn_core::sewing::{
    build_sewn, center_parameters, default_schedule, place_balls, sewn_volume_report,
    SewingOptions, SewnSpace,
};
use sewn_core::Error;

const N: usize = 3000;
// Longer edges than the default keep the graph error under 3% at this size.
const RHO: f64 = 0.6;

fn base() -> &'static FiniteMetricSpace {
    static X: OnceLock<FiniteMetricSpace> = OnceLock::new();
    X.get_or_init(|| sample_sphere3_with_curve(N, 1.0, 21, 512).unwrap())
}

fn sew(n: usize, delta: f64) -> SewnSpace {
    let plan = place_balls(base(), n, delta, &SewingOptions::default()).unwrap();
    build_sewn(base(), &plan, RHO).unwrap()
}

#[test]
fn one_tunnel_centers_sit_at_delta_from_the_seam() {
    let p = center_parameters(1, 0.3, 2.0 * PI);
    assert!((p[0] - 0.3).abs() < 1e-15);
    assert!((p[1] - (2.0 * PI - 0.3)).abs() < 1e-15);
}

#[test]
fn eight_centers_alternate_gaps() {
    let delta = 0.05;
    let p = center_parameters(4, delta, 2.0 * PI);
    assert_eq!(p.len(), 8);
    for (i, w) in p.windows(2).enumerate() {
        let gap = w[1] - w[0];
        let expected = if i % 2 == 0 { 2.0 * PI / 4.0 - 2.0 * delta } else { 2.0 * delta };
        assert!((gap - expected).abs() < 1e-12, "gap {i}: {gap}");
    }
}

#[test]
fn overlapping_balls_are_rejected() {
    let err = place_balls(base(), 4, 0.5, &SewingOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { .. }), "{err}");
}

#[test]
fn no_tunnels_reproduces_sphere_distances() {
    let s = sew(0, 0.1);
    assert_eq!(s.n(), base().n());
    assert!(s.fidelity.ok, "{:?}", s.fidelity);
    assert!(s.fidelity.mean_rel_error <= 0.03);
    // A graph path is never shorter than the geodesic it follows.
    for a in (0..s.n()).step_by(97) {
        for b in (0..s.n()).step_by(89) {
            assert!(s.space.d(a, b) >= s.base_distance(a, b) - 1e-12);
        }
    }
    let vol = sewn_volume_report(&s, 0.05);
    assert_eq!(vol.epsilon_measured, 0.0);
    assert!((vol.vol_sampled - 2.0 * PI * PI).abs() < 1e-9);
}

#[test]
fn edited_region_obeys_diameter_bound() {
    let s = sew(8, 0.1);
    assert!(s.edited_diameter() <= s.plan.diam_bound, "{} > {}", s.edited_diameter(), s.plan.diam_bound);
    assert!(s.fidelity.ok, "{:?}", s.fidelity);
    let vol = sewn_volume_report(&s, 0.05);
    assert!(vol.ok && vol.epsilon_measured <= 0.05, "{vol:?}");
    assert!(s.space.check_metric(1e-12, 3).ok());
}

#[test]
fn tunnel_shortcut_is_used_and_far_pairs_are_untouched() {
    let s = sew(3, 0.2);
    let (delta, w, h) = (s.plan.delta, s.plan.shell_width, s.plan.h_delta);
    let centers = &s.plan.centers;
    let center_dist = |a: usize, c: usize| {
        let cx = base().coords.as_ref().unwrap();
        sewn_core::metric::unit_angle(&s.space.coords.as_ref().unwrap()[a], &cx[c])
    };
    // A node just outside each mouth of tunnel 0.
    let outside = |c: usize| {
        (0..s.n())
            .filter(|&a| {
                let d = center_dist(a, c);
                d > delta / 2.0 + w && d < delta
            })
            .min_by(|&a, &b| center_dist(a, c).total_cmp(&center_dist(b, c)))
            .expect("a node near the mouth")
    };
    let (a, b) = (outside(centers[0]), outside(centers[1]));
    let sewn = s.space.d(a, b);
    assert!(sewn <= h + 2.0 * (delta + w), "{sewn} > {}", h + 2.0 * (delta + w));
    assert!(sewn < s.base_distance(a, b));

    // Pairs far from every tunnel keep their sphere distance.
    let f = &s.fidelity;
    assert!(f.pairs > 0);
    assert!(f.ok && f.mean_rel_error <= 0.03, "{f:?}");
    assert!(f.max_rel_shortening <= 1e-12, "{f:?}");
}

#[test]
fn volume_defect_and_neck_shrink_along_schedule() {
    let mut eps = Vec::new();
    let mut neck = Vec::new();
    for (delta, n) in default_schedule(4) {
        let s = sew(n, delta);
        let vol = sewn_volume_report(&s, 0.05);
        assert!(vol.ok, "{vol:?}");
        assert!(s.plan.neck_area <= 4.0 * PI * s.plan.delta0.powi(2));
        eps.push(vol.epsilon_measured);
        neck.push(s.plan.neck_area);
    }
    assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
    assert!(neck.windows(2).all(|w| w[1] < w[0]), "{neck:?}");
}

#[test]
fn disconnected_graph_is_reported() {
    let plan = place_balls(base(), 1, 0.2, &SewingOptions::default()).unwrap();
    let err = build_sewn(base(), &plan, 0.02).unwrap_err();
    assert!(matches!(err, Error::Disconnected { .. }), "{err}");
}
