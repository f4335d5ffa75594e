mod common;

use common::*;
use num::Zero;
use pem_hull::{
    convex_hull_2d, halfplane_brute, hull_main, polling_sample, HalfPlane, HullConfig, HullError, Point2, PollRule,
};
use pem_primitives::PemRng;

fn four_box() -> Vec<HalfPlane> {
    vec![HalfPlane::int(1, 0, 1), HalfPlane::int(-1, 0, 1), HalfPlane::int(0, 1, 1), HalfPlane::int(0, -1, 1)]
}

/// Every output vertex satisfies every plane and lies on at least two of them.
fn assert_tight(planes: &[HalfPlane], vertices: &[Point2]) {
    for v in vertices {
        assert!(planes.iter().all(|p| p.contains(v)), "vertex {v} outside");
        assert!(planes.iter().filter(|p| p.eval(v).is_zero()).count() >= 2, "vertex {v} not tight");
    }
}

#[test]
fn box_on_every_core_count() {
    for p in 1..=4 {
        let mut m = machine(p, 1, 1);
        let g = m.all_cores();
        let out = hull_main(&mut m, g, &four_box(), &pt(0, 0), &HullConfig::default()).unwrap();
        assert_eq!(out.chain.vertices, vec![pt(-1, -1), pt(1, -1), pt(1, 1), pt(-1, 1)]);
    }
}

#[test]
fn rejects_small_or_bad_inputs() {
    let mut m = machine(4, 2, 1);
    let g = m.all_cores();
    let cfg = HullConfig::default();
    assert!(matches!(hull_main(&mut m, g, &four_box(), &pt(0, 0), &cfg), Err(HullError::Pem(_))));
    let mut m = machine(1, 1, 1);
    let g = m.all_cores();
    assert_eq!(hull_main(&mut m, g, &four_box()[..2], &pt(0, 0), &cfg).unwrap_err(), HullError::Unbounded);
    assert_eq!(hull_main(&mut m, g, &four_box(), &pt(1, 0), &cfg).unwrap_err(), HullError::Infeasible(0));
    let open = [HalfPlane::int(1, 0, 1), HalfPlane::int(0, 1, 1), HalfPlane::int(1, 1, 1)];
    assert_eq!(hull_main(&mut m, g, &open, &pt(0, 0), &cfg).unwrap_err(), HullError::Unbounded);
}

#[test]
fn tiny_inputs_equal_brute_force() {
    for seed in 0..20 {
        let planes = random_planes(3 + seed as usize % 10, seed);
        let mut m = machine(1, 1, 1);
        let g = m.all_cores();
        let out = hull_main(&mut m, g, &planes, &pt(0, 0), &HullConfig::with_seed(seed)).unwrap();
        let h = handles(&mut m, planes.len());
        let brute = halfplane_brute(&mut m, g, &planes, h, &pt(0, 0), &mut PemRng::new(seed)).unwrap();
        assert_eq!(out.chain, brute);
    }
}

#[test]
fn random_instances_match_clipping() {
    let mut recursed = 0;
    for seed in 0..100u64 {
        let tangent = seed % 10 == 0;
        let planes = if tangent {
            tangent_planes(200 + seed as usize * 2, seed)
        } else {
            random_planes(300 + (seed as usize * 37) % 725, seed)
        };
        let mut m = machine(4, 16, 4);
        let g = m.all_cores();
        let out = hull_main(&mut m, g, &planes, &pt(0, 0), &HullConfig::with_seed(seed)).unwrap();
        assert_eq!(m.race_count(), 0);
        assert!(out.chain.is_strictly_convex());
        let got = sorted(out.chain.vertices.clone());
        assert_eq!(got, sorted(clip_oracle(&planes, BOX)), "seed {seed}");
        if tangent {
            assert_eq!(got, tangent_oracle(&planes));
        }
        assert_tight(&planes, &out.chain.vertices);
        recursed += !out.stats.rounds.is_empty() as usize;
    }
    assert!(recursed >= 90, "only {recursed} instances sampled");
}

#[test]
fn rounds_respect_the_group_bound() {
    let n = 1 << 11;
    for seed in 0..8u64 {
        let tangent = seed % 2 == 0;
        let planes = if tangent { tangent_planes(n, seed) } else { random_planes(n, seed) };
        let mut m = machine(8, 16, 4);
        let g = m.all_cores();
        let out = hull_main(&mut m, g, &planes, &pt(0, 0), &HullConfig::with_seed(seed)).unwrap();
        let want = if tangent { tangent_oracle(&planes) } else { sorted(clip_oracle(&planes, BOX)) };
        assert_eq!(sorted(out.chain.vertices.clone()), want);
        assert!(!out.stats.rounds.is_empty());
        for r in &out.stats.rounds {
            if r.rule.accepted() {
                assert!(r.within_bound(), "seed {seed}: {r:?}");
            }
            assert!(r.survivors <= r.expansion);
        }
    }
}

/// Copies made by expanding every plane into the sectors of `chain` it
/// cuts, counted straight from the definition.
fn full_expansion(planes: &[HalfPlane], chain: &pem_hull::HullChain) -> usize {
    let v = &chain.vertices;
    let k = v.len();
    planes.iter().map(|p| (0..k).filter(|&s| !p.contains(&v[s]) || !p.contains(&v[(s + 1) % k])).count()).sum()
}

#[test]
fn polling_rules() {
    let planes = [HalfPlane::int(1, 1, 1), HalfPlane::int(-1, 1, 1), HalfPlane::int(0, -1, 1)];
    let mut m = machine(1, 1, 1);
    let g = m.all_cores();
    let h = handles(&mut m, 3);
    let cfg = HullConfig::default();
    let out = polling_sample(&mut m, g, &planes, h, &pt(0, 0), &cfg, &mut PemRng::new(0)).unwrap().unwrap();
    assert_eq!(out.rule, PollRule::Single);
    assert_eq!(out.chain.len(), 3);

    let n = 1 << 12;
    for seed in 0..50u64 {
        let planes = if seed % 2 == 0 { tangent_planes(n, seed) } else { random_planes(n, seed) };
        let mut m = machine(4, 16, 4);
        let g = m.all_cores();
        let h = handles(&mut m, n);
        let out = polling_sample(&mut m, g, &planes, h, &pt(0, 0), &cfg, &mut PemRng::new(seed)).unwrap().unwrap();
        assert!(out.rule.accepted());
        assert_eq!(out.estimates.len(), 12);
        assert_eq!(out.sectors.len(), out.chain.len());
        let chosen = out.estimates[out.chosen].unwrap().0;
        assert!(out.estimates.iter().flatten().all(|e| chosen <= e.0));
        let copies = full_expansion(&planes, &out.chain);
        assert!(copies as f64 <= cfg.a * n as f64, "seed {seed}: {copies} copies");
    }
}

fn hull_of(pts: &[Point2], p: usize, seed: u64) -> Vec<Point2> {
    let mut m = machine(p, 16, 4);
    let g = m.all_cores();
    let out = convex_hull_2d(&mut m, g, pts, &HullConfig::with_seed(seed)).unwrap();
    assert_eq!(m.race_count(), 0);
    out.chain.vertices
}

#[test]
fn hull_of_small_shapes() {
    let square = [pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2), pt(1, 1), pt(1, 0)];
    assert_eq!(hull_of(&square, 1, 0), vec![pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2)]);
    let hex = [pt(2, 0), pt(1, 2), pt(-1, 2), pt(-2, 0), pt(-1, -2), pt(1, -2), pt(0, 0)];
    assert_eq!(hull_of(&hex, 1, 0), vec![pt(-2, 0), pt(-1, -2), pt(1, -2), pt(2, 0), pt(1, 2), pt(-1, 2)]);
    let line: Vec<Point2> = (0..50).map(|i| pt(3 - i, 2 * i)).collect();
    assert_eq!(hull_of(&line, 2, 0), vec![pt(-46, 98), pt(3, 0)]);
    assert_eq!(hull_of(&[pt(5, 5), pt(5, 5)], 1, 0), vec![pt(5, 5)]);
}

#[test]
fn hull_of_random_sets_matches_gift_wrapping() {
    let pts = random_points(1024, 1 << 20, 77);
    assert_eq!(hull_of(&pts, 4, 1), gift_wrap(&pts));
    for seed in 0..100u64 {
        let n = 50 + (seed as usize * 53) % 700;
        // Small ranges give many collinear and repeated points.
        let range = if seed % 3 == 0 { 8 } else { 1000 };
        let pts = random_points(n, range, seed);
        assert_eq!(sorted(hull_of(&pts, 1 + seed as usize % 4, seed)), sorted(gift_wrap(&pts)), "seed {seed}");
    }
}

#[test]
fn hull_of_points_on_a_circle() {
    let pts: Vec<Point2> = (0..600).map(|i| circle_point(&r(i - 300, 37))).collect();
    let hull = hull_of(&pts, 4, 5);
    assert_eq!(hull.len(), 600);
    assert_eq!(hull, gift_wrap(&pts));
}
