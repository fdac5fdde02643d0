use boxfem::geometry::{
    quadrature_rule, reference_cube, reference_element, GeometryError, GeometryMap, GeometryType,
    Point, MAX_QUADRATURE_ORDER,
};
use proptest::prelude::*;

/// Oracle: exact integral of the monomial `prod x_a^{e_a}` over the unit
/// cube.
fn monomial_integral(exps: &[usize]) -> f64 {
    exps.iter().map(|&e| 1.0 / (e as f64 + 1.0)).product()
}

fn monomial(p: &Point, exps: &[usize]) -> f64 {
    exps.iter().enumerate().map(|(a, &e)| p[a].powi(e as i32)).product()
}

#[test]
fn subentity_counts_match_binomial_formula() {
    // counts for d = 3: 1 element, 6 facets, 12 edges, 8 vertices
    let re3 = reference_cube(3);
    assert_eq!(re3.size(0), 1);
    assert_eq!(re3.size(1), 6);
    assert_eq!(re3.size(2), 12);
    assert_eq!(re3.size(3), 8);
    // d = 4: 8 facets, 24 codim-2 faces, 32 edges, 16 vertices
    let re4 = reference_cube(4);
    assert_eq!(re4.size(1), 8);
    assert_eq!(re4.size(2), 24);
    assert_eq!(re4.size(3), 32);
    assert_eq!(re4.size(4), 16);
}

#[test]
fn facet_zero_of_cube3_contains_even_vertices() {
    let re = reference_cube(3);
    assert_eq!(re.sub_entities(0, 1, 3), &[0, 2, 4, 6]);
    // every facet of the 3-cube has 4 vertices and 4 edges
    for f in 0..6 {
        assert_eq!(re.sub_entities(f, 1, 3).len(), 4);
        assert_eq!(re.sub_entities(f, 1, 2).len(), 4);
    }
    // self containment
    assert_eq!(re.sub_entities(3, 1, 1), &[3]);
}

#[test]
fn simplex_topology_is_representable_but_rejected() {
    let gt = GeometryType::simplex(2);
    assert!(gt.is_simplex());
    assert!(!gt.is_cube());
    assert!(matches!(
        reference_element(gt),
        Err(GeometryError::UnsupportedTopology(_))
    ));
    assert!(matches!(
        quadrature_rule(gt, 2),
        Err(GeometryError::UnsupportedTopology(_))
    ));
    // equality is (dimension, topology) equality
    assert_ne!(GeometryType::cube(2), GeometryType::simplex(2));
    assert_ne!(GeometryType::cube(2), GeometryType::cube(3));
    assert_eq!(GeometryType::vertex(), GeometryType::cube(0));
}

#[test]
fn gauss_rules_integrate_monomials_exactly() {
    for dim in 1..=3usize {
        for order in 0..=9usize {
            let rule = quadrature_rule(GeometryType::cube(dim), order).unwrap();
            // worst case: full order in every axis
            let exps = vec![order; dim];
            let got: f64 = rule
                .points()
                .iter()
                .map(|qp| qp.weight * monomial(&qp.position, &exps))
                .sum();
            let want = monomial_integral(&exps);
            assert!(
                (got - want).abs() <= 1e-13,
                "dim {dim} order {order}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn order_zero_rule_is_the_midpoint_rule() {
    let rule = quadrature_rule(GeometryType::cube(2), 0).unwrap();
    assert_eq!(rule.len(), 1);
    let qp = &rule.points()[0];
    assert_eq!(qp.position.as_slice(), &[0.5, 0.5]);
    assert!((qp.weight - 1.0).abs() < 1e-15);
}

#[test]
fn two_point_gauss_nodes_are_symmetric() {
    let rule = quadrature_rule(GeometryType::cube(1), 3).unwrap();
    assert_eq!(rule.len(), 2);
    let shift = 0.5 / 3.0_f64.sqrt();
    assert!((rule.points()[0].position[0] - (0.5 - shift)).abs() < 1e-15);
    assert!((rule.points()[1].position[0] - (0.5 + shift)).abs() < 1e-15);
    assert!((rule.points()[0].weight - 0.5).abs() < 1e-15);
    assert!((rule.points()[1].weight - 0.5).abs() < 1e-15);
}

#[test]
fn zero_dimensional_rule_is_a_unit_point_mass() {
    let rule = quadrature_rule(GeometryType::cube(0), 7).unwrap();
    assert_eq!(rule.len(), 1);
    assert_eq!(rule.points()[0].weight, 1.0);
}

#[test]
fn excessive_order_is_an_error() {
    let r = quadrature_rule(GeometryType::cube(2), MAX_QUADRATURE_ORDER + 1);
    assert!(matches!(r, Err(GeometryError::UnsupportedOrder { .. })));
    assert!(quadrature_rule(GeometryType::cube(2), MAX_QUADRATURE_ORDER).is_ok());
}

#[test]
fn axis_box_map_basics() {
    let g = GeometryMap::axis_box(
        Point::from_slice(&[1.0, 2.0]),
        Point::from_slice(&[3.0, 6.0]),
    );
    assert_eq!(g.global(&Point::from_slice(&[0.5, 0.25])).as_slice(), &[2.0, 3.0]);
    assert_eq!(
        g.local(&Point::from_slice(&[2.0, 3.0])).unwrap().as_slice(),
        &[0.5, 0.25]
    );
    assert_eq!(g.volume(), 8.0);
    assert_eq!(g.center().as_slice(), &[2.0, 4.0]);
    assert_eq!(g.integration_element(&Point::splat(2, 0.3)), 8.0);
    let j = g.jacobian(&Point::splat(2, 0.3));
    assert_eq!(j[(0, 0)], 2.0);
    assert_eq!(j[(1, 1)], 4.0);
    assert_eq!(j[(0, 1)], 0.0);
    // corners follow binary counting
    assert_eq!(g.corner(0).as_slice(), &[1.0, 2.0]);
    assert_eq!(g.corner(1).as_slice(), &[3.0, 2.0]);
    assert_eq!(g.corner(2).as_slice(), &[1.0, 6.0]);
    assert_eq!(g.corner(3).as_slice(), &[3.0, 6.0]);
}

#[test]
fn embedded_facet_has_area_integration_element() {
    // rectangle {0} x [0,2] x [0,3] embedded in 3-d
    let corners = vec![
        Point::from_slice(&[0.0, 0.0, 0.0]),
        Point::from_slice(&[0.0, 2.0, 0.0]),
        Point::from_slice(&[0.0, 0.0, 3.0]),
        Point::from_slice(&[0.0, 2.0, 3.0]),
    ];
    let g = GeometryMap::multilinear(2, corners);
    assert_eq!(g.my_dimension(), 2);
    assert_eq!(g.world_dimension(), 3);
    assert!((g.integration_element(&Point::splat(2, 0.5)) - 6.0).abs() < 1e-14);
    assert!((g.volume() - 6.0).abs() < 1e-13);
}

#[test]
fn degenerate_multilinear_map_reports_singular_jacobian() {
    let corners = vec![Point::from_slice(&[1.0, 1.0]); 4];
    let g = GeometryMap::multilinear(2, corners);
    assert!(matches!(
        g.local(&Point::from_slice(&[0.5, 0.5])),
        Err(GeometryError::SingularJacobian)
    ));
}

/// Quarter annulus chart `(r, t) -> ((1+r) cos(pi t/2), (1+r) sin(pi t/2))`.
fn annulus(p: &Point) -> Point {
    let (r, t) = (p[0], p[1]);
    let phi = std::f64::consts::FRAC_PI_2 * t;
    Point::from_slice(&[(1.0 + r) * phi.cos(), (1.0 + r) * phi.sin()])
}

#[test]
fn annulus_patch_matches_analytic_map_at_corners() {
    // one small parameter patch, multilinearly interpolated from its mapped
    // corners: exact at corners, O(h^2) inside
    let h = 1.0 / 64.0;
    let (r0, t0) = (17.0 * h, 40.0 * h);
    let corners: Vec<Point> = (0..4)
        .map(|k| {
            annulus(&Point::from_slice(&[
                r0 + h * (k & 1) as f64,
                t0 + h * (k >> 1) as f64,
            ]))
        })
        .collect();
    let g = GeometryMap::multilinear(2, corners);
    for k in 0..4 {
        let xhat = Point::from_slice(&[(k & 1) as f64, (k >> 1) as f64]);
        let analytic = annulus(&Point::from_slice(&[r0 + h * xhat[0], t0 + h * xhat[1]]));
        assert!(g.global(&xhat).dist(&analytic) < 1e-12);
    }
    // analytic integration element of the chart is (1+r) * pi/2; the patch
    // sees it scaled by the patch area h^2, up to O(h^2) interpolation error
    let mid = Point::splat(2, 0.5);
    let analytic_ie = (1.0 + r0 + h / 2.0) * std::f64::consts::FRAC_PI_2 * h * h;
    let rel = (g.integration_element(&mid) - analytic_ie).abs() / analytic_ie;
    assert!(rel < 1e-3, "relative deviation {rel}");
}

proptest! {
    #[test]
    fn multilinear_local_inverts_global(
        jitter in prop::collection::vec(-0.2f64..0.2, 8),
        x in 0.05f64..0.95,
        y in 0.05f64..0.95,
    ) {
        // a convex-ish perturbed unit quad
        let corners: Vec<Point> = (0..4)
            .map(|k| {
                Point::from_slice(&[
                    (k & 1) as f64 + jitter[2 * k],
                    (k >> 1) as f64 + jitter[2 * k + 1],
                ])
            })
            .collect();
        let g = GeometryMap::multilinear(2, corners);
        let xhat = Point::from_slice(&[x, y]);
        let world = g.global(&xhat);
        let back = g.local(&world).unwrap();
        prop_assert!(back.dist(&xhat) < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences(
        jitter in prop::collection::vec(-0.3f64..0.3, 8),
        x in 0.1f64..0.9,
        y in 0.1f64..0.9,
    ) {
        let corners: Vec<Point> = (0..4)
            .map(|k| {
                Point::from_slice(&[
                    (k & 1) as f64 + jitter[2 * k],
                    (k >> 1) as f64 + jitter[2 * k + 1],
                ])
            })
            .collect();
        let g = GeometryMap::multilinear(2, corners);
        let xhat = Point::from_slice(&[x, y]);
        let j = g.jacobian(&xhat);
        let h = 1e-6;
        for col in 0..2 {
            let mut up = xhat;
            let mut dn = xhat;
            up[col] += h;
            dn[col] -= h;
            let diff = (g.global(&up) - g.global(&dn)) * (1.0 / (2.0 * h));
            for row in 0..2 {
                prop_assert!((j[(row, col)] - diff[row]).abs() < 1e-8);
            }
        }
    }
}
