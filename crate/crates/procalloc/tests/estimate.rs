use pem_machine::{Cores, Machine, MachineConfig};
use pem_procalloc::*;

const N: usize = 1 << 16;

fn machine(p: usize) -> Machine {
    Machine::new(MachineConfig::new(p, 64, 8).unwrap()).unwrap()
}

fn estimate(p: usize, n: usize, cfg: &ObliviousConfig) -> (IdAssignment, Machine) {
    let mut m = machine(p);
    let a = estimate_processors(&mut m, Cores::new(0, p), n, cfg).unwrap().unwrap();
    assert_eq!(m.race_count(), 0);
    (a, m)
}

#[test]
fn single_core_is_leftmost_and_owns_everything() {
    for seed in 0..10 {
        let (a, _) = estimate(1, N, &ObliviousConfig::with_seed(seed));
        assert_eq!(a.estimated_p, 1);
        assert_eq!(a.counted, 1);
        assert_eq!(a.cores.len(), 1);
        assert_eq!(a.cores[0].id(a.cap), 0);
        assert_eq!(a.cores[0].owned, 0..N);
        // It walks all the way to slot 0 unopposed.
        assert_eq!(a.phase_rounds[1], a.cores[0].slot as u64 + 1);
    }
}

#[test]
fn estimate_within_factor_four() {
    for p in [4, 16, 64] {
        let good = (0..100)
            .filter(|&seed| {
                let (a, _) = estimate(p, N, &ObliviousConfig::with_seed(seed));
                let r = a.estimated_p as f64 / p as f64;
                (0.25..=4.0).contains(&r)
            })
            .count();
        assert!(good >= 95, "p = {p}: {good} of 100 within 4x");
    }
}

#[test]
fn unit_scale_centres_the_estimate() {
    // Above log n cores the estimate is a genuine estimate, not a count.
    for p in [32, 64, 128] {
        let mut r: Vec<f64> = (0..100)
            .map(|seed| estimate(p, N, &ObliviousConfig::with_seed(seed)).0.estimated_p as f64 / p as f64)
            .collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = r[50];
        assert!((0.8..=1.25).contains(&median), "p = {p}: median ratio {median}");
    }
}

#[test]
fn write_step_block_misses_are_linear() {
    let mut per_core = vec![];
    for p in [2usize, 4, 8, 16, 32, 64] {
        let total: u64 =
            (0..100).map(|seed| estimate(p, N, &ObliviousConfig::with_seed(seed)).0.write_block_misses).sum();
        let avg = total as f64 / 100.0;
        assert!(avg <= 4.0 * p as f64, "p = {p}: {avg} block misses");
        per_core.push(avg / p as f64);
    }
    assert!(per_core.iter().all(|&x| x <= 4.0), "{per_core:?}");
}

#[test]
fn all_cores_in_one_slot_are_serialized() {
    // n = 32 gives 6 slots; 24 cores must collide heavily.
    for seed in 0..20 {
        let mut m = machine(24);
        let cfg = ObliviousConfig { cap_factor: 100, ..ObliviousConfig::with_seed(seed) };
        let a = estimate_processors(&mut m, Cores::new(0, 24), 32, &cfg).unwrap().unwrap();
        assert_eq!(m.race_count(), 0);
        assert_eq!(a.slots, 6);
        let mut per_slot = std::collections::HashMap::<usize, Vec<usize>>::new();
        for c in &a.cores {
            per_slot.entry(c.slot).or_default().push(c.arrival);
        }
        for (_, mut arr) in per_slot {
            arr.sort_unstable();
            assert_eq!(arr, (0..arr.len()).collect::<Vec<_>>());
        }
        assert!(assign_ids(&a).is_ok());
    }
}

#[test]
fn ids_are_distinct() {
    for seed in 0..100 {
        let (a, _) = estimate(32, N, &ObliviousConfig::with_seed(seed));
        let mut ids = a.ids();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 32, "seed {seed}");
        assert!(a.cores.iter().all(|c| c.rank < a.cap && c.block < a.blocks));
    }
}

#[test]
fn owned_ranges_cover_without_overlap() {
    for p in [1usize, 3, 7, 32, 100] {
        for seed in 0..20 {
            let n = 4096 + 37 * seed as usize;
            let (a, _) = estimate(p, n, &ObliviousConfig::with_seed(seed));
            let mut marks = vec![0u8; n];
            for c in &a.cores {
                for i in c.owned.clone() {
                    marks[i] += 1;
                }
            }
            assert!(marks.iter().all(|&x| x == 1), "p = {p}, seed {seed}");
            assert!(assign_ids(&a).is_ok());
        }
    }
}

#[test]
fn shares_are_balanced() {
    // Theta(n / p) per core: no core owns more than a constant times n / p.
    for seed in 0..50 {
        let p = 64;
        let (a, _) = estimate(p, N, &ObliviousConfig::with_seed(seed));
        let most = a.cores.iter().map(|c| c.owned.len()).max().unwrap();
        assert!(most <= 16 * N / p, "seed {seed}: {most}");
    }
}

#[test]
fn overfull_block_is_reported() {
    let cfg = ObliviousConfig { cap_factor: 0, ..ObliviousConfig::with_seed(1) };
    let mut m = machine(8);
    let r = estimate_processors(&mut m, Cores::new(0, 8), 1024, &cfg).unwrap();
    assert!(matches!(r, Err(AssignError::BlockOverflow { cap: 0, .. })));
}

#[test]
fn rejects_a_slot_array_of_nothing() {
    let mut m = machine(2);
    let r = estimate_processors(&mut m, Cores::new(0, 2), 0, &ObliviousConfig::default()).unwrap();
    assert_eq!(r, Err(AssignError::TooFewSlots(0)));
}

#[test]
fn seeded_runs_repeat() {
    let cfg = ObliviousConfig::with_seed(9);
    assert_eq!(estimate(16, N, &cfg).0, estimate(16, N, &cfg).0);
}
