//! Grid suite: entity counts and geometry, index set and id semantics,
//! intersection tiling (checked through the divergence theorem), the
//! adaptation cycle with balance closure and coarsening veto, persistent
//! containers, deformed grids, and the export formats.

use std::collections::BTreeSet;

use boxfem::geometry::{quadrature_rule, GeometryType, Point};
use boxfem::grid::{
    write_cells_csv, write_vtk, Entity, GridView, HierarchicalGrid, Mapper, PersistentContainer,
};
use boxfem_testkit::rng;
use proptest::prelude::*;
use rand::Rng;

fn p2(x: f64, y: f64) -> Point {
    Point::from_slice(&[x, y])
}

/// Leaf facet neighbours may differ by at most one level.
fn assert_balanced(grid: &HierarchicalGrid) {
    let view = grid.leaf_view();
    for cell in view.cells() {
        for is in view.intersections(&cell) {
            if let Some(nb) = is.outside() {
                let diff = cell.level() as i64 - nb.level() as i64;
                assert!(diff.abs() <= 1, "balance violated: {} vs {}", cell.level(), nb.level());
            }
        }
    }
}

/// Index sets must be consecutive, zero-based and aligned with iteration
/// order in every codimension.
fn assert_index_sets(view: &GridView) {
    for c in 0..=view.dim() {
        let mut seen = vec![false; view.size(c)];
        for (k, e) in view.entities(c).enumerate() {
            assert_eq!(e.codim(), c);
            let i = view.index(&e);
            assert_eq!(i, k, "iteration order must match indices");
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s), "index range has holes in codim {c}");
    }
}

/// Surface integral of `x . n` over all leaf intersections of all cells;
/// interior pieces cancel, so the result is the boundary integral,
/// i.e. `d * |domain|` by the divergence theorem.
fn divergence_sum(grid: &HierarchicalGrid) -> f64 {
    let d = grid.dim();
    let rule = quadrature_rule(GeometryType::cube(d - 1), 3).unwrap();
    let view = grid.leaf_view();
    let mut total = 0.0;
    for cell in view.cells() {
        for is in view.intersections(&cell) {
            let geo = is.geometry();
            let normal = is.center_unit_outer_normal();
            for q in rule.points() {
                let x = geo.global(&q.position);
                total += q.weight * geo.integration_element(&q.position) * x.dot(&normal);
            }
        }
    }
    total
}

// --------------------------------------------------------------- structure

#[test]
fn macro_grid_entity_counts() {
    let g1 = HierarchicalGrid::unit(1, 5);
    let v1 = g1.leaf_view();
    assert_eq!(v1.size(0), 5);
    assert_eq!(v1.size(1), 6);

    let g2 = HierarchicalGrid::unit(2, 4);
    let v2 = g2.leaf_view();
    assert_eq!(v2.size(0), 16);
    assert_eq!(v2.size(1), 2 * 4 * 5, "facets");
    assert_eq!(v2.size(2), 25, "vertices");

    let g3 = HierarchicalGrid::unit(3, 2);
    let v3 = g3.leaf_view();
    assert_eq!(v3.size(0), 8);
    assert_eq!(v3.size(1), 3 * 3 * 4, "faces");
    assert_eq!(v3.size(2), 3 * 9 * 2, "edges");
    assert_eq!(v3.size(3), 27, "vertices");

    let g4 = HierarchicalGrid::unit(4, 2);
    assert_eq!(g4.leaf_view().size(0), 16);
    assert_eq!(g4.leaf_view().size(4), 81);
}

#[test]
fn cell_geometries_partition_the_box() {
    let g = HierarchicalGrid::new(2, &[4, 2], p2(0.0, 0.0), p2(2.0, 1.0));
    let v = g.leaf_view();
    let mut vol = 0.0;
    for cell in v.cells() {
        let geo = g.geometry(&cell);
        assert_eq!(geo.volume(), 0.25);
        vol += geo.volume();
    }
    assert_eq!(vol, 2.0);
    // first cell in lexicographic order is the lower-left one
    let first = v.entities(0).next().unwrap();
    let c = g.geometry(&first).center();
    assert_eq!((c[0], c[1]), (0.25, 0.25));
}

#[test]
fn vertex_positions_match_cell_corners() {
    let g = HierarchicalGrid::unit(2, 2);
    let v = g.leaf_view();
    for cell in v.cells() {
        let geo = g.geometry(&cell);
        for k in 0..4 {
            let vert = cell.sub_entity(k, 2);
            let pos = g.geometry(&vert).center();
            assert!(pos.dist(&geo.corner(k)) < 1e-15);
        }
    }
}

#[test]
fn global_refine_multiplies_cells_and_keeps_volume() {
    let mut g = HierarchicalGrid::unit(2, 2);
    g.global_refine(2);
    assert_eq!(g.max_level(), 2);
    let v = g.leaf_view();
    assert_eq!(v.size(0), 4 * 16);
    assert!((v.volume() - 1.0).abs() < 1e-14);
    assert_eq!(g.level_view(1).size(0), 16);
    assert_eq!(g.level_view(0).size(0), 4);
    // the level views keep all cells, refined or not
    assert_eq!(g.level_view(0).size(2), 9);
}

#[test]
fn view_indices_are_consecutive_and_deterministic() {
    let mut g = HierarchicalGrid::unit(2, 3);
    g.global_refine(1);
    {
        let v = g.leaf_view();
        assert_index_sets(&v);
        let order1: Vec<Entity> = v.cells().collect();
        let v2 = g.leaf_view();
        let order2: Vec<Entity> = v2.cells().collect();
        assert_eq!(order1, order2, "rebuilt views enumerate identically");
    }
    for l in 0..=g.max_level() {
        assert_index_sets(&g.level_view(l));
    }
}

#[test]
fn leaf_ids_are_injective_per_codim() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let mark: Vec<Entity> = g.leaf_view().cells().take(1).collect();
    g.mark(1, &mark[0]);
    g.adapt();
    g.post_adapt();
    let v = g.leaf_view();
    for c in 0..=2 {
        let ids: BTreeSet<_> = v.entities(c).map(|e| e.id()).collect();
        assert_eq!(ids.len(), v.size(c), "codim {c} ids collide");
    }
    // 9 coarse vertices plus 5 strictly finer ones (4 hanging edge
    // midpoints and the refined cell's center)
    assert_eq!(v.size(2), 14);
}

#[test]
fn vertex_copies_share_their_id_across_levels() {
    let mut g = HierarchicalGrid::unit(2, 2);
    g.global_refine(1);
    // the level-0 vertex at (0.5, 0.5) is cell (0,0)'s corner 3; its copy
    // on level 1 is corner 3 of the level-1 cell with coords (1,1)
    let coarse = g.level_view(0);
    let fine = g.level_view(1);
    let c0 = coarse.entities(0).next().unwrap();
    let v0 = c0.sub_entity(3, 2);
    let c1 = fine.cells().find(|c| g.geometry(c).center().dist(&p2(0.375, 0.375)) < 1e-12).unwrap();
    let v1 = c1.sub_entity(3, 2);
    assert_eq!(g.geometry(&v0).center(), g.geometry(&v1).center());
    assert_ne!(v0.level(), v1.level());
    assert_eq!(v0.id(), v1.id(), "geometric copies share the id");
    // whereas the cell and its father do not
    let leaf = g.leaf_view().cells().next().unwrap();
    assert_ne!(leaf.id(), leaf.father().unwrap().id());
}

#[test]
fn ids_are_restored_by_refine_then_coarsen() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let before: BTreeSet<_> = g.leaf_view().cells().map(|c| c.id()).collect();
    let cells: Vec<Entity> = g.leaf_view().cells().collect();
    g.mark(1, &cells[0]);
    g.adapt();
    g.post_adapt();
    let children: Vec<Entity> = g.leaf_view().cells().filter(|c| c.level() == 1).collect();
    assert_eq!(children.len(), 4);
    for ch in &children {
        g.mark(-1, ch);
    }
    assert!(g.pre_adapt(), "coarsening must be announced");
    for ch in &children {
        assert!(g.might_vanish(ch));
    }
    g.adapt();
    g.post_adapt();
    let after: BTreeSet<_> = g.leaf_view().cells().map(|c| c.id()).collect();
    assert_eq!(before, after);
}

// ------------------------------------------------------------ intersections

#[test]
fn divergence_theorem_on_uniform_grids() {
    for dim in 1..=3 {
        let mut g = HierarchicalGrid::unit(dim, 2);
        g.global_refine(1);
        let total = divergence_sum(&g);
        assert!(
            (total - dim as f64).abs() < 1e-12,
            "dim {dim}: surface sum {total} vs {}",
            dim
        );
    }
    // non-unit box: d * |box|
    let g = HierarchicalGrid::new(2, &[4, 2], p2(-1.0, 0.5), p2(3.0, 1.5));
    assert!((divergence_sum(&g) - 2.0 * 4.0).abs() < 1e-12);
}

#[test]
fn divergence_theorem_on_adapted_grids_with_hanging_facets() {
    for dim in 2..=3usize {
        let mut g = HierarchicalGrid::unit(dim, 2);
        let cells: Vec<Entity> = g.leaf_view().cells().collect();
        g.mark(1, &cells[0]);
        g.mark(1, &cells[cells.len() - 1]);
        g.adapt();
        g.post_adapt();
        assert_balanced(&g);
        let total = divergence_sum(&g);
        assert!(
            (total - dim as f64).abs() < 1e-12,
            "dim {dim}: hanging-facet cancellation broken: {total}"
        );
    }
}

#[test]
fn intersection_maps_are_mutually_consistent() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let cells: Vec<Entity> = g.leaf_view().cells().collect();
    g.mark(1, &cells[3]);
    g.adapt();
    g.post_adapt();
    let view = g.leaf_view();
    let rule = quadrature_rule(GeometryType::cube(1), 3).unwrap();
    let mut interior = 0;
    for cell in view.cells() {
        let inside_geo = g.geometry(&cell);
        for is in view.intersections(&cell) {
            assert_eq!(is.inside(), cell);
            assert_eq!(is.boundary(), !is.neighbor(), "leaf views have no third state");
            let geo = is.geometry();
            let eta_in = is.geometry_in_inside();
            for q in rule.points() {
                // world map factors through the inside embedding
                let via_inside = inside_geo.global(&eta_in.global(&q.position));
                assert!(geo.global(&q.position).dist(&via_inside) < 1e-14);
            }
            let n = is.center_unit_outer_normal();
            assert!((n.two_norm() - 1.0).abs() < 1e-14);
            if let Some(nb) = is.outside() {
                interior += 1;
                let outside_geo = g.geometry(&nb);
                let eta_out = is.geometry_in_outside().unwrap();
                for q in rule.points() {
                    let via_outside = outside_geo.global(&eta_out.global(&q.position));
                    assert!(geo.global(&q.position).dist(&via_outside) < 1e-13);
                }
                // the normal points from inside to outside
                let dir = outside_geo.center() - inside_geo.center();
                assert!(dir.dot(&n) > 0.0);
                assert_eq!(is.index_in_outside().unwrap(), is.index_in_inside() ^ 1);
                // the mirror intersection exists and covers the same patch
                let mirror = view
                    .intersections(&nb)
                    .into_iter()
                    .find(|m| {
                        m.outside() == Some(cell)
                            && m.geometry().center().dist(&geo.center()) < 1e-13
                    })
                    .expect("mirror intersection missing");
                let mn = mirror.center_unit_outer_normal();
                assert!((mn + n).two_norm() < 1e-13, "mirror normal must be opposite");
            } else {
                // boundary patches lie on the domain boundary
                let c = geo.center();
                let on_boundary =
                    (0..2).any(|a| c[a].abs() < 1e-14 || (c[a] - 1.0).abs() < 1e-14);
                assert!(on_boundary);
            }
        }
    }
    assert!(interior > 0);
}

#[test]
fn facet_numbering_follows_axis_then_side() {
    let g = HierarchicalGrid::unit(3, 1);
    let view = g.leaf_view();
    let cell = view.cells().next().unwrap();
    let all = view.intersections(&cell);
    assert_eq!(all.len(), 6);
    for (k, is) in all.iter().enumerate() {
        assert_eq!(is.index_in_inside(), k);
        assert!(is.boundary());
        let n = is.center_unit_outer_normal();
        let axis = k / 2;
        let want = if k % 2 == 0 { -1.0 } else { 1.0 };
        assert_eq!(n[axis], want);
    }
}

#[test]
fn level_views_report_missing_neighbours_as_neither_boundary_nor_neighbour() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let cells: Vec<Entity> = g.leaf_view().cells().collect();
    g.mark(1, &cells[0]);
    g.adapt();
    g.post_adapt();
    let v1 = g.level_view(1);
    let border: Vec<_> = v1
        .cells()
        .flat_map(|c| v1.intersections(&c))
        .filter(|is| !is.boundary() && !is.neighbor())
        .collect();
    // the refined block has two facet runs towards unrefined territory,
    // two fine facets each
    assert_eq!(border.len(), 4);
    // while the level-0 view is complete and structured
    let v0 = g.level_view(0);
    for c in v0.cells() {
        for is in v0.intersections(&c) {
            assert!(is.boundary() || is.neighbor());
        }
    }
}

// --------------------------------------------------------------- adaptation

#[test]
fn marked_refinement_keeps_the_mesh_balanced() {
    let mut g = HierarchicalGrid::unit(2, 4);
    let cells: Vec<Entity> = g.leaf_view().cells().collect();
    g.mark(1, &cells[0]);
    assert!(g.adapt(), "refinement happened");
    g.post_adapt();
    assert_eq!(g.leaf_view().size(0), 16 - 1 + 4);
    assert_balanced(&g);

    // refining the finest corner cell repeatedly forces closure cascades
    for _ in 0..3 {
        let v = g.leaf_view();
        let finest = v
            .cells()
            .max_by_key(|c| (c.level(), std::cmp::Reverse(v.index(c))))
            .unwrap();
        let corner = v
            .cells()
            .filter(|c| c.level() == finest.level())
            .find(|c| g.geometry(c).center().two_norm() < 0.3)
            .unwrap_or(finest);
        g.mark(1, &corner);
        g.adapt();
        g.post_adapt();
        assert_balanced(&g);
        assert!((g.leaf_view().volume() - 1.0).abs() < 1e-12);
    }
    assert!(g.max_level() >= 3);
}

#[test]
fn closure_refines_coarse_neighbours_of_marked_cells() {
    // refine one cell twice in a 2x2 grid; marking a level-2 cell next to a
    // level-1 leaf forces that leaf to refine too
    let mut g = HierarchicalGrid::unit(2, 2);
    let c0: Entity = g.leaf_view().cells().next().unwrap();
    g.mark(1, &c0);
    g.adapt();
    g.post_adapt();
    let fine: Entity = g.leaf_view().cells().find(|c| c.level() == 1).unwrap();
    g.mark(1, &fine);
    g.adapt();
    g.post_adapt();
    assert_balanced(&g);
    // marking the level-2 cell that touches level-1 territory cascades
    let v = g.leaf_view();
    let target = v
        .cells()
        .filter(|c| c.level() == 2)
        .max_by(|a, b| {
            let (ca, cb) = (g.geometry(a).center(), g.geometry(b).center());
            ca.two_norm().partial_cmp(&cb.two_norm()).unwrap()
        })
        .unwrap();
    let before: Vec<usize> = (0..=2).map(|l| g.level_view(l).size(0)).collect();
    g.mark(1, &target);
    g.adapt();
    g.post_adapt();
    assert_balanced(&g);
    let after: Vec<usize> = (0..=2).map(|l| g.level_view(l).size(0)).collect();
    assert!(after[2] > before[2], "closure created additional level-2 cells");
}

#[test]
fn coarsening_needs_the_whole_sibling_group() {
    let mut g = HierarchicalGrid::unit(2, 2);
    g.global_refine(1);
    let children: Vec<Entity> =
        g.leaf_view().cells().filter(|c| g.geometry(c).center().inf_norm() < 0.5).collect();
    assert_eq!(children.len(), 4, "one sibling group");
    // marking only three of four siblings removes nothing
    for ch in children.iter().take(3) {
        g.mark(-1, ch);
    }
    assert!(!g.pre_adapt());
    g.adapt();
    g.post_adapt();
    assert_eq!(g.leaf_view().size(0), 16);
    // all four: the group is replaced by its father
    for ch in &children {
        g.mark(-1, ch);
    }
    assert!(g.pre_adapt());
    g.adapt();
    g.post_adapt();
    assert_eq!(g.leaf_view().size(0), 13);
    assert_eq!(g.max_level(), 1);
}

#[test]
fn coarsening_is_vetoed_when_it_would_break_balance() {
    let mut g = HierarchicalGrid::unit(2, 2);
    g.global_refine(1);
    // refine the neighbour block so the group's father would face
    // level-2 leaves after coarsening
    let vcells: Vec<Entity> = g.leaf_view().cells().collect();
    let neighbour = vcells
        .iter()
        .find(|c| {
            let p = g.geometry(c).center();
            (p[0] - 0.625).abs() < 1e-12 && (p[1] - 0.125).abs() < 1e-12
        })
        .unwrap();
    g.mark(1, neighbour);
    g.adapt();
    g.post_adapt();
    assert_balanced(&g);

    let group: Vec<Entity> = g
        .leaf_view()
        .cells()
        .filter(|c| c.level() == 1 && g.geometry(c).center().inf_norm() < 0.5)
        .collect();
    assert_eq!(group.len(), 4);
    for ch in &group {
        g.mark(-1, ch);
    }
    assert!(!g.pre_adapt(), "coarsening against finer neighbours must be vetoed");
    g.adapt();
    g.post_adapt();
    assert_balanced(&g);
    // the group is still there
    assert_eq!(
        g.leaf_view().cells().filter(|c| c.level() == 1 && g.geometry(c).center().inf_norm() < 0.5).count(),
        4
    );
}

#[test]
fn adaptation_flags_follow_the_cycle() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let c0: Entity = g.leaf_view().cells().next().unwrap();
    g.mark(1, &c0);
    assert_eq!(g.get_mark(&c0), 1);
    assert!(!g.pre_adapt(), "pure refinement announces no vanishing cells");
    assert!(g.adapt());
    assert_eq!(g.get_mark(&c0), 0, "marks are consumed");
    let new_cells: Vec<Entity> = g.leaf_view().cells().filter(|c| c.level() == 1).collect();
    assert_eq!(new_cells.len(), 4);
    for c in &new_cells {
        assert!(g.is_new(c));
    }
    g.post_adapt();
    for c in &new_cells {
        assert!(!g.is_new(c));
    }
    // nothing marked: adapt reports no refinement
    assert!(!g.adapt());
}

#[test]
fn children_cover_their_father_exactly() {
    let mut g = HierarchicalGrid::unit(2, 2);
    g.global_refine(2);
    for cell in g.leaf_view().cells() {
        let father = cell.father().unwrap();
        let fgeo = g.geometry(&father);
        let gif = g.geometry_in_father(&cell);
        let cgeo = g.geometry(&cell);
        // the embedding composed with the father geometry reproduces the
        // cell geometry
        for k in 0..4 {
            let via = fgeo.global(&gif.corner(k));
            assert!(via.dist(&cgeo.corner(k)) < 1e-15);
        }
        assert!((gif.volume() - 0.25).abs() < 1e-15);
    }
    // children listed by the grid partition the father volume
    let father = g.level_view(0).cells().next().unwrap();
    let kids = g.children(&father);
    assert_eq!(kids.len(), 4);
    let vol: f64 = kids.iter().map(|c| g.geometry(c).volume()).sum();
    assert!((vol - g.geometry(&father).volume()).abs() < 1e-15);
}

#[test]
fn persistent_container_survives_adaptation() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let mut store: PersistentContainer<f64> = PersistentContainer::new(0);
    let cells: Vec<Entity> = g.leaf_view().cells().collect();
    for (i, c) in cells.iter().enumerate() {
        store.insert(c, i as f64);
    }
    g.mark(1, &cells[0]);
    g.adapt();
    g.post_adapt();
    // surviving cells keep their data, the refined one is still reachable
    // through its id (it exists in the hierarchy as a non-leaf)
    for (i, c) in cells.iter().enumerate() {
        assert_eq!(store.get(c), Some(&(i as f64)));
    }
    store.compact(&g);
    assert_eq!(store.len(), 4, "all stored cells still exist in the hierarchy");

    // coarsening removes the children again; compaction drops their data
    let children: Vec<Entity> = g.leaf_view().cells().filter(|c| c.level() == 1).collect();
    for ch in &children {
        store.insert(ch, -1.0);
    }
    assert_eq!(store.len(), 8);
    for ch in &children {
        g.mark(-1, ch);
    }
    g.pre_adapt();
    g.adapt();
    g.post_adapt();
    store.compact(&g);
    assert_eq!(store.len(), 4, "vanished children were compacted away");
}

#[test]
fn vertex_data_transfers_by_id() {
    let mut g = HierarchicalGrid::unit(2, 2);
    let mut store: PersistentContainer<f64> = PersistentContainer::new(2);
    {
        let v = g.leaf_view();
        for vert in v.entities(2) {
            let p = g.geometry(&vert).center();
            store.insert(&vert, p[0] + 10.0 * p[1]);
        }
    }
    g.global_refine(1);
    // every coarse vertex position resurfaces on the fine grid with the
    // same id, so its data is found without any transfer code
    let v = g.leaf_view();
    let mut hits = 0;
    for vert in v.entities(2) {
        if let Some(&val) = store.get(&vert) {
            let p = g.geometry(&vert).center();
            assert_eq!(val, p[0] + 10.0 * p[1]);
            hits += 1;
        }
    }
    assert_eq!(hits, 9, "all nine coarse vertices are found again");
}

#[test]
fn mapper_concatenates_codimensions() {
    let g = HierarchicalGrid::unit(2, 2);
    let view = g.leaf_view();
    let m = Mapper::new(&view, &[0, 2]);
    assert_eq!(m.size(), 4 + 9);
    for c in view.cells() {
        assert!(m.index(&view, &c) < 4);
        for k in 0..4 {
            let i = m.sub_index(&view, &c, k, 2);
            assert!((4..13).contains(&i));
        }
    }
    let only_cells = Mapper::new(&view, &[0]);
    assert_eq!(only_cells.size(), 4);
}

// ----------------------------------------------------------- deformed grids

#[test]
fn identity_coordinate_map_is_exact() {
    let g = HierarchicalGrid::unit(2, 4).with_coordinate_map(|p| *p);
    let v = g.leaf_view();
    assert!((v.volume() - 1.0).abs() < 1e-14);
    for cell in v.cells() {
        assert!((g.geometry(&cell).volume() - 1.0 / 16.0).abs() < 1e-15);
        for is in v.intersections(&cell) {
            let n = is.center_unit_outer_normal();
            assert!((n.two_norm() - 1.0).abs() < 1e-14);
            let straight = n.as_slice().iter().filter(|x| x.abs() < 1e-14).count();
            assert_eq!(straight, 1, "axis normals survive the identity map");
        }
    }
    assert!((divergence_sum(&g) - 2.0).abs() < 1e-12);
}

#[test]
fn quarter_annulus_volume_converges_at_second_order() {
    let target = 3.0 * std::f64::consts::PI / 4.0;
    let mut errs = Vec::new();
    for refines in 0..4 {
        let mut g = HierarchicalGrid::new(2, &[2, 2], p2(1.0, 0.0), p2(2.0, 1.0))
            .with_coordinate_map(|p| {
                let (r, t) = (p[0], 0.5 * std::f64::consts::PI * p[1]);
                Point::from_slice(&[r * t.cos(), r * t.sin()])
            });
        g.global_refine(refines);
        errs.push((g.leaf_view().volume() - target).abs());
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "volume error ratio {ratio} not second order");
    }
}

// ---------------------------------------------------------------- export

#[test]
fn vtk_output_is_deterministic_and_complete() {
    let g = HierarchicalGrid::unit(2, 2);
    let view = g.leaf_view();
    let point_data: Vec<f64> = (0..9).map(|i| i as f64).collect();
    let cell_data = vec![0.0, 1.0, 2.0, 3.0];
    let mut buf = Vec::new();
    write_vtk(&view, "leaf mesh", &[("p", &point_data)], &[("u", &cell_data)], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let expected = "\
# vtk DataFile Version 3.0
leaf mesh
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 9 double
0 0 0
0.5 0 0
0 0.5 0
0.5 0.5 0
0 1 0
0.5 1 0
1 0 0
1 0.5 0
1 1 0
CELLS 4 20
4 0 1 2 3
4 2 3 4 5
4 1 6 3 7
4 3 7 5 8
CELL_TYPES 4
8
8
8
8
POINT_DATA 9
SCALARS p double 1
LOOKUP_TABLE default
0
1
2
3
4
5
6
7
8
CELL_DATA 4
SCALARS u double 1
LOOKUP_TABLE default
0
1
2
3
";
    assert_eq!(text, expected);
}

#[test]
fn vtk_cell_types_match_dimension_and_deformation() {
    let g3 = HierarchicalGrid::unit(3, 1);
    let mut buf = Vec::new();
    write_vtk(&g3.leaf_view(), "t", &[], &[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("CELL_TYPES 1\n11\n"), "axis-aligned 3D cells are voxels");
    assert!(text.contains("8 0 1 2 3 4 5 6 7"), "voxel corners use the binary numbering");

    let g3w = HierarchicalGrid::unit(3, 1).with_coordinate_map(|p| *p);
    let mut buf = Vec::new();
    write_vtk(&g3w.leaf_view(), "t", &[], &[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("CELL_TYPES 1\n12\n"), "deformed 3D cells are hexahedra");
    assert!(text.contains("8 0 1 3 2 4 5 7 6"), "hexahedron corner order is cyclic");
}

#[test]
fn csv_export_lists_cell_centers_and_fields() {
    let g = HierarchicalGrid::unit(1, 2);
    let view = g.leaf_view();
    let mut buf = Vec::new();
    write_cells_csv(&view, &[("u", &[10.0, 20.0])], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "x0,u\n0.25,10\n0.75,20\n");

    let g4 = HierarchicalGrid::unit(4, 1);
    let mut buf = Vec::new();
    write_cells_csv(&g4.leaf_view(), &[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "x0,x1,x2,x3\n0.5,0.5,0.5,0.5\n");
}

// -------------------------------------------------------------- properties

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Randomized mark/adapt cycles keep every advertised invariant: the
    /// leaf mesh tiles the domain, stays 2:1 balanced, index sets stay
    /// consecutive, ids stay injective, and children sit inside their
    /// fathers.
    #[test]
    fn prop_random_adaptation_preserves_invariants(seed in 0u64..500) {
        let mut r = rng(seed);
        let mut g = HierarchicalGrid::unit(2, 3);
        for _ in 0..6 {
            let cells: Vec<Entity> = g.leaf_view().cells().collect();
            for c in &cells {
                let roll: f64 = r.random_range(0.0..1.0);
                if roll < 0.2 && cells.len() < 600 {
                    g.mark(1, c);
                } else if roll < 0.6 {
                    g.mark(-1, c);
                }
            }
            g.pre_adapt();
            g.adapt();
            g.post_adapt();

            assert_balanced(&g);
            let view = g.leaf_view();
            prop_assert!((view.volume() - 1.0).abs() < 1e-12);
            assert_index_sets(&view);
            let ids: BTreeSet<_> = view.cells().map(|c| c.id()).collect();
            prop_assert_eq!(ids.len(), view.size(0));
            for cell in view.cells() {
                if let Some(f) = cell.father() {
                    let fg = g.geometry(&f);
                    let center = g.geometry(&cell).center();
                    let local = fg.local(&center).unwrap();
                    for a in 0..2 {
                        prop_assert!(local[a] > 0.0 && local[a] < 1.0);
                    }
                }
            }
        }
    }
}
