mod common;

use std::collections::BTreeSet;

use common::*;
use num::{Signed, Zero};
use pem_hull::{
    dualize, dualize_vertices, expand_by_sector, filter_all, filter_sector, find_sectors, intersect_exact,
    locate_points, preprocess_arrangement, undualize_chain, HalfPlane, HullChain, Point2, Sector, SectorInterval, Q,
};
use pem_machine::Word;
use pem_primitives::PemRng;

fn words(m: &mut pem_machine::Machine, v: &[Word]) -> pem_machine::MemRegion {
    let r = m.alloc(v.len());
    for (i, &w) in v.iter().enumerate() {
        m.wr(0, r, i, w).unwrap();
    }
    r
}

#[test]
fn dual_round_trip_and_incidence() {
    let o = Point2::new(r(1, 3), r(-2, 5));
    let pts = random_points(50, 100, 4);
    let planes = dualize_vertices(&pts, &o).unwrap();
    // Each dual plane passes through... nothing in particular, but its pole is the point.
    let poles = dualize(&planes, &o).unwrap();
    assert_eq!(poles, pts);
    // Incidence: a point lies on the line through two others iff their dual lines meet on its dual.
    let (a, b) = (pt(0, 0), pt(2, 2));
    let c = pt(5, 5);
    let d = dualize_vertices(&[a, b, c], &o).unwrap();
    let meet = d[0].meet(&d[1]).unwrap();
    assert!(d[2].eval(&meet).is_zero());
    assert!(dualize_vertices(std::slice::from_ref(&o), &o).is_err());
}

#[test]
fn undualize_recovers_hull() {
    let pts = vec![pt(0, 0), pt(4, 0), pt(4, 4), pt(0, 4), pt(2, 1), pt(1, 3)];
    let o = pt(2, 2);
    let planes = dualize_vertices(&pts, &o).unwrap();
    let chain = intersect_exact(&planes, &o).unwrap();
    let back = undualize_chain(&chain, &o).unwrap();
    assert_eq!(back.vertices, vec![pt(0, 0), pt(4, 0), pt(4, 4), pt(0, 4)]);
}

#[test]
fn arrangement_two_crossing_lines() {
    let mut m = machine(2, 4, 1);
    let g = m.all_cores();
    let lines = [HalfPlane::int(1, -1, 1), HalfPlane::int(-1, -1, 1)];
    let arr = preprocess_arrangement(&mut m, g, &lines).unwrap();
    assert_eq!(arr.slabs(), 3);
    assert_eq!(arr.slab_xs.len(), 1);
    assert_eq!(arr.regions(), 9);
    // The three slabs see the lines in different orders around the crossing.
    assert_ne!(arr.order[0], arr.order[2]);
}

#[test]
fn arrangement_single_line() {
    let mut m = machine(1, 4, 1);
    let g = m.all_cores();
    let arr = preprocess_arrangement(&mut m, g, &[HalfPlane::int(0, 1, 3)]).unwrap();
    assert_eq!(arr.slabs(), 1);
    let below = arr.region_of(&pt(0, 0));
    let above = arr.region_of(&pt(0, 5));
    assert_ne!(below, above);
    assert!(!arr.violated[below][0]);
    assert!(arr.violated[above][0]);
}

fn random_lines(k: usize, seed: u64) -> Vec<HalfPlane> {
    use rand::RngExt;
    let mut g = rng(seed);
    (0..k)
        .map(|_| loop {
            let (a, b) = (g.random_range(-9i64..=9), g.random_range(-9i64..=9));
            if a != 0 || b != 0 {
                let c = g.random_range(1i64..=20) * if g.random_bool(0.5) { 1 } else { -1 };
                break HalfPlane::int(a, b, c);
            }
        })
        .collect()
}

/// Violated lines of the point shrunk slightly toward the origin.
fn violated_direct(lines: &[HalfPlane], p: &Point2) -> Vec<bool> {
    lines.iter().map(|l| if l.eval(p).is_zero() { l.c.is_negative() } else { !l.contains(p) }).collect()
}

#[test]
fn arrangement_regions_agree_with_direct_tests() {
    let lines = random_lines(6, 11);
    let mut m = machine(4, 4, 1);
    let g = m.all_cores();
    let arr = preprocess_arrangement(&mut m, g, &lines).unwrap();
    let pts = random_points(2000, 40, 12);
    let mut seen = BTreeSet::new();
    for p in &pts {
        let reg = arr.region_of(p);
        seen.insert(reg);
        let direct = violated_direct(&lines, p);
        assert_eq!(arr.violated[reg], direct, "point {p}");
    }
    assert!(seen.len() > 10);
}

#[test]
fn locate_matches_region_of() {
    let lines = random_lines(4, 21);
    let pts = random_points(4096, 60, 22);
    let mut m = machine(4, 16, 4);
    let g = m.all_cores();
    let arr = preprocess_arrangement(&mut m, g, &lines).unwrap();
    let h = handles(&mut m, pts.len());
    let out = locate_points(&mut m, g, &pts, h, &arr, 2, &mut PemRng::new(5)).unwrap();
    let got = m.snapshot_memory(out).unwrap();
    assert_eq!(m.race_count(), 0);
    for (i, p) in pts.iter().enumerate() {
        assert_eq!(got[i] as usize, arr.region_of(p));
    }
}

/// Sectors cut by `pl`, straight from the definition.
fn cut_sectors(pl: &HalfPlane, chain: &HullChain) -> BTreeSet<usize> {
    let v = &chain.vertices;
    let k = v.len();
    (0..k).filter(|&s| !pl.contains(&v[s]) || !pl.contains(&v[(s + 1) % k])).collect()
}

fn sample_chain() -> (HullChain, Point2) {
    let v: Vec<Point2> = (0..10).map(|i| circle_point(&r(2 * i - 9, 3))).collect();
    (HullChain::from_ccw(v), pt(0, 0))
}

#[test]
fn sector_intervals_cover_cut_sectors() {
    assert_eq!(SectorInterval::covering(&[false; 5]), SectorInterval::EMPTY);
    assert_eq!(SectorInterval::covering(&[true, false, false, true]), SectorInterval { start: 3, len: 2 });
    // Cutting one vertex touches the two sectors beside it.
    let iv = SectorInterval::covering_vertices(&[false, false, true, false]);
    assert_eq!(iv.sectors(4).collect::<Vec<_>>(), vec![1, 2]);
}

#[test]
fn find_sectors_matches_definition() {
    let (chain, o) = sample_chain();
    let mut planes = random_planes(1500, 30);
    planes.extend(tangent_planes(500, 31));
    let mut m = machine(4, 16, 4);
    let g = m.all_cores();
    let h = handles(&mut m, planes.len());
    let out = find_sectors(&mut m, g, &planes, h, &o, &chain, 2, &mut PemRng::new(6)).unwrap();
    let got = m.snapshot_memory(out).unwrap();
    for (i, pl) in planes.iter().enumerate() {
        let iv = SectorInterval { start: got[2 * i] as usize, len: got[2 * i + 1] as usize };
        let set: BTreeSet<usize> = iv.sectors(chain.len()).collect();
        assert_eq!(set, cut_sectors(pl, &chain), "plane {i}");
    }
}

#[test]
fn expansion_groups_copies_by_sector() {
    let mut m = machine(4, 8, 2);
    let g = m.all_cores();
    let hs = handles(&mut m, 5);
    // (start, len) per plane over 4 sectors; plane 3 wraps around.
    let iv = words(&mut m, &[0, 1, 1, 2, 0, 0, 3, 2, 0, 4]);
    let run = expand_by_sector(&mut m, g, hs, iv, 4, 100, 4.0, &mut PemRng::new(7)).unwrap();
    assert_eq!(run.buckets(), 4);
    let data = m.snapshot_memory(run.data).unwrap();
    let groups: Vec<Vec<Word>> = (0..4)
        .map(|j| {
            let mut v = data[run.bounds[j]..run.bounds[j + 1]].to_vec();
            v.sort();
            v
        })
        .collect();
    assert_eq!(groups, vec![vec![0, 3, 4], vec![1, 4], vec![1, 4], vec![3, 4]]);
}

fn scores(pl: &HalfPlane, s: &Sector) -> (Q, Q) {
    let c = &pl.c - &pl.a * &s.apex.x - &pl.b * &s.apex.y;
    let d = Point2::new(&pl.a / &c, &pl.b / &c);
    (d.dot(&s.ray_lo), d.dot(&s.ray_hi))
}

#[test]
fn filter_keeps_undominated_and_drops_only_dominated() {
    let (chain, o) = sample_chain();
    let sectors = Sector::fan(&o, &chain);
    for seed in 0..6 {
        let planes = random_planes(400, 40 + seed);
        let s = &sectors[seed as usize % sectors.len()];
        let mut m = machine(4, 8, 2);
        let g = m.all_cores();
        let h = handles(&mut m, planes.len());
        let out = filter_sector(&mut m, g, &planes, h, s, &mut PemRng::new(seed)).unwrap();
        let kept: BTreeSet<usize> = m.snapshot_memory(out).unwrap().iter().map(|&w| w as usize).collect();
        let sc: Vec<(Q, Q)> = planes.iter().map(|p| scores(p, s)).collect();
        for i in 0..planes.len() {
            let beaten_by = |j: usize| sc[j].0 > sc[i].0 && sc[j].1 > sc[i].1;
            if kept.contains(&i) {
                assert!(!(0..planes.len()).any(beaten_by), "plane {i} kept though strictly beaten");
            } else {
                assert!(kept.iter().any(|&j| beaten_by(j)), "plane {i} dropped without a strictly better survivor");
            }
        }
        // The intersection inside the wedge is unchanged.
        let kept_planes: Vec<HalfPlane> = kept.iter().map(|&i| planes[i].clone()).collect();
        let full = clip_oracle(&planes, BOX);
        let cut = clip_oracle(&kept_planes, BOX);
        let in_wedge = |v: &Vec<Point2>| sorted(v.iter().filter(|p| s.contains(p)).cloned().collect());
        for p in in_wedge(&full) {
            assert!(kept_planes.iter().all(|pl| pl.contains(&p)));
        }
        for p in in_wedge(&cut) {
            assert!(planes.iter().all(|pl| pl.contains(&p)), "filtered region grew at {p}");
        }
    }
}

#[test]
fn filter_ties_survive_together() {
    let s = Sector { apex: pt(0, 0), ray_lo: pt(1, 0), ray_hi: pt(0, 1), index: 0 };
    let planes = vec![HalfPlane::int(1, 1, 1), HalfPlane::int(1, 1, 1), HalfPlane::int(1, 1, 2)];
    let mut m = machine(1, 8, 2);
    let g = m.all_cores();
    let h = handles(&mut m, 3);
    let out = filter_sector(&mut m, g, &planes, h, &s, &mut PemRng::new(0)).unwrap();
    let mut kept = m.snapshot_memory(out).unwrap();
    kept.sort();
    assert_eq!(kept, vec![0, 1]);
}

#[test]
fn filter_keeps_planes_meeting_on_a_ray() {
    // Both lines pass through (1, 0) on the first ray; each is tighter on one side.
    let s = Sector { apex: pt(0, 0), ray_lo: pt(1, 0), ray_hi: pt(0, 1), index: 0 };
    for planes in [
        vec![HalfPlane::int(1, 1, 1), HalfPlane::int(1, 2, 1), HalfPlane::int(1, 0, 5)],
        vec![HalfPlane::int(1, 2, 1), HalfPlane::int(1, 1, 1), HalfPlane::int(1, 0, 5)],
    ] {
        let mut m = machine(1, 8, 2);
        let g = m.all_cores();
        let h = handles(&mut m, 3);
        let out = filter_sector(&mut m, g, &planes, h, &s, &mut PemRng::new(0)).unwrap();
        let mut kept = m.snapshot_memory(out).unwrap();
        kept.sort();
        assert_eq!(kept, vec![0, 1]);
    }
}

#[test]
fn filter_all_handles_empty_groups() {
    let (chain, o) = sample_chain();
    let sectors = Sector::fan(&o, &chain);
    let planes = random_planes(300, 50);
    let mut m = machine(4, 8, 2);
    let g = m.all_cores();
    let hs = handles(&mut m, planes.len());
    // Every plane into sector 0 and sector 2 only.
    let mut iv = Vec::new();
    for i in 0..planes.len() {
        iv.extend_from_slice(&[if i % 2 == 0 { 0 } else { 2 }, 1]);
    }
    let iv = words(&mut m, &iv);
    let run = expand_by_sector(&mut m, g, hs, iv, sectors.len(), 1 << 20, 4.0, &mut PemRng::new(1)).unwrap();
    let out = filter_all(&mut m, g, &planes, &run, &sectors, &mut PemRng::new(2)).unwrap();
    assert_eq!(out.len(), sectors.len());
    assert!(out[1].len == 0 && out[3].len == 0);
    assert!(out[0].len > 0 && out[2].len > 0);
    assert!(out[0].len <= 150 && out[2].len <= 150);
}

#[test]
fn degenerate_points_locate_consistently() {
    let lines = random_lines(6, 61);
    let mut pts = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = lines[i].meet(&lines[j]) {
                pts.push(p);
            }
        }
        // Points on line i.
        let l = &lines[i];
        for t in -5..=5 {
            let p = if l.b.is_zero() {
                Point2::new(&l.c / &l.a, r(t, 1))
            } else {
                let x = r(t, 2);
                Point2::new(x.clone(), (&l.c - &l.a * &x) / &l.b)
            };
            pts.push(p);
        }
    }
    pts.push(pt(0, 0));
    let pts: Vec<Point2> = pts.iter().cycle().take(2048).cloned().collect();
    let mut m = machine(4, 16, 4);
    let g = m.all_cores();
    let arr = preprocess_arrangement(&mut m, g, &lines).unwrap();
    let h = handles(&mut m, pts.len());
    let out = locate_points(&mut m, g, &pts, h, &arr, 2, &mut PemRng::new(8)).unwrap();
    let got = m.snapshot_memory(out).unwrap();
    for (i, p) in pts.iter().enumerate() {
        let reg = arr.region_of(p);
        assert_eq!(got[i] as usize, reg, "point {p}");
        assert_eq!(arr.violated[reg], violated_direct(&lines, p), "point {p}");
    }
}

#[test]
fn arrangement_rejects_lines_through_origin() {
    let mut m = machine(1, 4, 1);
    let g = m.all_cores();
    assert!(preprocess_arrangement(&mut m, g, &[HalfPlane::int(1, 1, 0)]).is_err());
}
