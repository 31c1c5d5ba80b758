mod common;

use std::collections::BTreeSet;

use common::{projected, random_projected, rng};
use gstg_core::bounds::{self, aabb_of, obb_of, Boundary, Footprint};
use gstg_core::TileLayout;

fn methods() -> [std::sync::Arc<dyn Boundary>; 3] {
    [bounds::aabb(), bounds::obb(), bounds::ellipse()]
}

fn tile_set(fp: &Footprint, layout: &TileLayout, m: &dyn Boundary) -> BTreeSet<u32> {
    bounds::identify_tiles(fp, layout, m).cells.into_iter().collect()
}

#[test]
fn tightness_chain_and_sampling_soundness() {
    let mut r = rng(11);
    let layout = TileLayout::new(128, 96, 16, 64).unwrap();
    for i in 0..1000 {
        let g = random_projected(&mut r, i, 128.0, 96.0);
        let fp = Footprint::new(&g, 3.0);
        let [a, o, e] = methods().map(|m| tile_set(&fp, &layout, m.as_ref()));
        assert!(e.is_subset(&o) && o.is_subset(&a), "gaussian {i}: {e:?} {o:?} {a:?}");

        // 10^4 samples filling the 3-sigma region.
        let (major, minor, axis) = g.covariance2d.eigen();
        let (u, v) = (axis, [-axis[1], axis[0]]);
        let (ru, rv) = (3.0 * major.sqrt(), 3.0 * minor.sqrt());
        for k in 0..10_000 {
            let rad = ((k as f32 + 0.5) / 10_000.0).sqrt() * 0.9999;
            let ang = k as f32 * 2.399_963;
            let (s, c) = ang.sin_cos();
            let p = [
                g.center[0] + rad * (ru * c * u[0] + rv * s * v[0]),
                g.center[1] + rad * (ru * c * u[1] + rv * s * v[1]),
            ];
            if p[0] < 0.0 || p[1] < 0.0 || p[0] >= 128.0 || p[1] >= 96.0 {
                continue;
            }
            let t = (p[1] as u32 / 16) * layout.tiles_x + p[0] as u32 / 16;
            assert!(e.contains(&t), "gaussian {i}: sample {p:?} in tile {t} missed");
        }
    }
}

#[test]
fn obb_area_never_exceeds_aabb_area() {
    let mut r = rng(5);
    for i in 0..1000 {
        let g = random_projected(&mut r, i, 64.0, 64.0);
        assert!(obb_of(&g).area() <= aabb_of(&g).area() * (1.0 + 1e-6));
    }
}

#[test]
fn aabb_contains_ellipse_boundary() {
    let mut r = rng(6);
    for i in 0..50 {
        let g = random_projected(&mut r, i, 64.0, 64.0);
        let b = aabb_of(&g);
        let (major, minor, axis) = g.covariance2d.eigen();
        for k in 0..10_000 {
            let (s, c) = (k as f32 * std::f32::consts::TAU / 10_000.0).sin_cos();
            let (a, bb) = (3.0 * major.sqrt() * c, 3.0 * minor.sqrt() * s);
            let p = [
                g.center[0] + a * axis[0] - bb * axis[1],
                g.center[1] + a * axis[1] + bb * axis[0],
            ];
            let eps = 1e-3 * (1.0 + p[0].abs().max(p[1].abs()));
            assert!(p[0] >= b.min[0] - eps && p[0] <= b.max[0] + eps);
            assert!(p[1] >= b.min[1] - eps && p[1] <= b.max[1] + eps);
        }
    }
}

#[test]
fn bitmasks_reassemble_tile_sets() {
    let mut r = rng(21);
    let ms = methods();
    for &(tile, group) in &[(8, 16), (8, 32), (16, 32), (16, 64), (32, 64), (16, 48)] {
        let layout = TileLayout::new(150, 100, tile, group).unwrap();
        for i in 0..300 {
            let g = random_projected(&mut r, i, 150.0, 100.0);
            let fp = Footprint::new(&g, 3.0);
            for (gi, gm) in ms.iter().enumerate() {
                for tm in &ms[gi..] {
                    let want = tile_set(&fp, &layout, tm.as_ref());
                    let mut got = BTreeSet::new();
                    for grp in bounds::identify_groups(&fp, &layout, gm.as_ref()).cells {
                        let (bm, tests) = bounds::bitmask_for(&fp, grp, &layout, tm.as_ref()).unwrap();
                        assert_eq!(tests, layout.tiles_in_group(grp).count() as u64);
                        assert_eq!(u32::from(bm.mask) >> (layout.tiles_per_group_side.pow(2)), 0);
                        for (t, bit) in layout.tiles_in_group(grp) {
                            if bm.mask & (1 << bit) != 0 {
                                got.insert(t);
                            }
                        }
                    }
                    assert_eq!(got, want, "{}+{} {tile}/{group} gaussian {i}", gm.name(), tm.name());
                }
            }
        }
    }
}

#[test]
fn identified_groups_contain_an_identified_tile() {
    let mut r = rng(8);
    let layout = TileLayout::new(200, 120, 16, 64).unwrap();
    for i in 0..500 {
        let g = random_projected(&mut r, i, 200.0, 120.0);
        let fp = Footprint::new(&g, 3.0);
        for m in methods() {
            let tiles = tile_set(&fp, &layout, m.as_ref());
            for grp in bounds::identify_groups(&fp, &layout, m.as_ref()).cells {
                assert!(
                    layout.tiles_in_group(grp).any(|(t, _)| tiles.contains(&t)),
                    "{} gaussian {i} group {grp}",
                    m.name()
                );
            }
        }
    }
}

#[test]
fn group_degeneracy_gives_single_bit_masks() {
    let mut r = rng(9);
    let layout = TileLayout::new(96, 96, 16, 16).unwrap();
    for i in 0..200 {
        let g = random_projected(&mut r, i, 96.0, 96.0);
        let fp = Footprint::new(&g, 3.0);
        for m in methods() {
            let groups = bounds::identify_groups(&fp, &layout, m.as_ref()).cells;
            assert_eq!(groups, bounds::identify_tiles(&fp, &layout, m.as_ref()).cells);
            for grp in groups {
                assert_eq!(bounds::bitmask_for(&fp, grp, &layout, m.as_ref()).unwrap().0.mask, 1);
            }
        }
    }
}

#[test]
fn straddling_gaussian_hits_both_groups_by_sampling() {
    let layout = TileLayout::new(128, 64, 16, 64).unwrap();
    let g = projected(0, [64.0, 30.0], 16.0, 4.0, 0.3);
    let fp = Footprint::new(&g, 3.0);
    // Sampling oracle: which groups own a pixel center inside the 3-sigma region.
    let mut sampled = BTreeSet::new();
    for y in 0..64 {
        for x in 0..128 {
            if fp.ellipse.mahalanobis_sq([x as f32 + 0.5, y as f32 + 0.5]) <= 9.0 {
                sampled.insert(x / 64);
            }
        }
    }
    assert_eq!(sampled, BTreeSet::from([0, 1]));
    for m in methods() {
        assert_eq!(bounds::identify_groups(&fp, &layout, m.as_ref()).cells, vec![0, 1]);
    }
}

#[test]
fn border_and_offscreen_tiles_are_clipped() {
    let layout = TileLayout::new(100, 100, 16, 16).unwrap();
    let g = projected(0, [99.0, 50.0], 9.0, 9.0, 0.0);
    let fp = Footprint::new(&g, 3.0);
    let tiles = bounds::identify_tiles(&fp, &layout, bounds::ellipse().as_ref()).cells;
    assert!(tiles.iter().all(|&t| t % layout.tiles_x >= 5));
    let off = projected(1, [-60.0, 50.0], 9.0, 9.0, 0.0);
    assert!(bounds::identify_tiles(&Footprint::new(&off, 3.0), &layout, bounds::aabb().as_ref())
        .cells
        .is_empty());
}
