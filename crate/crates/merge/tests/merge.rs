use pem_machine::{Machine, MachineConfig, MemRegion, Word};
use pem_merge::{concat_runs, merge_bucketed, BucketedRun};
use pem_primitives::PemError;
use proptest::prelude::*;

fn machine(p: usize, m: usize, b: usize) -> Machine {
    Machine::new(MachineConfig::new(p, m, b).unwrap()).unwrap()
}

/// A run given as a list of buckets.
type HostRun = Vec<Vec<Word>>;

fn load(m: &mut Machine, run: &HostRun) -> BucketedRun {
    let flat: Vec<Word> = run.concat();
    let data = m.alloc_from(&flat);
    let mut bounds = vec![0];
    for bucket in run {
        bounds.push(bounds.last().unwrap() + bucket.len());
    }
    BucketedRun::new(data, bounds).unwrap()
}

/// Bucket j of the output: bucket j of every run, in run order.
fn oracle(runs: &[HostRun]) -> HostRun {
    let t = runs[0].len();
    (0..t).map(|j| runs.iter().flat_map(|r| r[j].iter().copied()).collect()).collect()
}

fn unload(m: &Machine, run: &BucketedRun) -> HostRun {
    let flat = m.snapshot_memory(run.data).unwrap();
    run.bounds.windows(2).map(|w| flat[w[0]..w[1]].to_vec()).collect()
}

fn merge_host(p: usize, mm: usize, b: usize, runs: &[HostRun]) -> (HostRun, pem_machine::CostLedger) {
    let mut m = machine(p, mm, b);
    let loaded: Vec<BucketedRun> = runs.iter().map(|r| load(&mut m, r)).collect();
    let before = m.ledger();
    let g = m.all_cores();
    let out = merge_bucketed(&mut m, g, &loaded).unwrap();
    let cost = m.ledger().since(&before);
    assert_eq!(m.race_count(), 0);
    (unload(&m, &out), cost)
}

#[test]
fn two_runs_two_buckets() {
    let runs = vec![vec![vec![1, 5], vec![9]], vec![vec![2], vec![8, 9]]];
    let (out, _) = merge_host(2, 64, 4, &runs);
    assert_eq!(out, vec![vec![1, 5, 2], vec![9, 8, 9]]);
}

#[test]
fn single_run_is_identity() {
    let runs = vec![vec![vec![4, 3], vec![], vec![7]]];
    let (out, _) = merge_host(2, 64, 4, &runs);
    assert_eq!(out, runs[0]);
}

#[test]
fn rejects_inconsistent_bounds() {
    let mut m = machine(2, 64, 4);
    let data = m.alloc_from(&[1, 2, 3]);
    assert!(BucketedRun::new(data, vec![0, 2]).is_err());
    let bad = BucketedRun { data, bounds: vec![0, 4, 3] };
    let ok = BucketedRun::single(data);
    let g = m.all_cores();
    assert!(matches!(merge_bucketed(&mut m, g, &[ok, bad]), Err(PemError::Precondition(_))));
}

#[test]
fn rejects_too_few_keys_for_matrix() {
    let mut m = machine(2, 64, 4);
    let a = load(&mut m, &vec![vec![1], vec![], vec![]]);
    let b = load(&mut m, &vec![vec![], vec![2], vec![]]);
    let g = m.all_cores();
    assert!(matches!(merge_bucketed(&mut m, g, &[a, b]), Err(PemError::Precondition(_))));
}

fn random_runs(x: usize, t: usize, y: usize, seed: u64) -> Vec<HostRun> {
    use rand::{RngExt, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut runs: Vec<HostRun> = vec![vec![Vec::new(); t]; x];
    // Tagged values: run * 1e9 + position, so residency and order are checkable.
    for k in 0..y {
        let i = r.random_range(0..x);
        let j = r.random_range(0..t);
        runs[i][j].push((i as Word) * 1_000_000_000 + k as Word);
    }
    runs
}

#[test]
fn large_merge_matches_oracle_and_miss_bound() {
    let (x, t, y, p, mm, b) = (16, 16, 1 << 14, 4, 1024, 16);
    let runs = random_runs(x, t, y, 1);
    let (out, cost) = merge_host(p, mm, b, &runs);
    assert_eq!(out, oracle(&runs));
    let bound = (y / b + x * t) as u64;
    assert!(cost.misses() <= 4 * bound, "{} misses vs bound {bound}", cost.misses());
    // Reading and writing every key costs 2y/B; segment boundaries add at
    // most x*t + 2p more. The size-matrix bookkeeping is measured on its own.
    let scan = 2 * (y / b) as u64;
    let aux = matrix_bookkeeping_misses(p, mm, b, x, t);
    assert!(
        cost.cache_misses() <= scan + (x * t + 2 * p) as u64 + aux,
        "{} cache misses, bookkeeping {aux}",
        cost.cache_misses()
    );
}

/// Misses of writing, transposing and prefix-summing an x-by-t matrix, plus
/// scanning it once more to locate cuts.
fn matrix_bookkeeping_misses(p: usize, mm: usize, b: usize, x: usize, t: usize) -> u64 {
    let mut m = machine(p, mm, b);
    let g = m.all_cores();
    let sizes = m.alloc_from(&vec![1; x * t]);
    let before = m.ledger();
    for i in 0..x * t {
        m.write(0, sizes.addr(i), 1).unwrap();
    }
    let tr = pem_primitives::transpose(&mut m, g, sizes, x, t).unwrap();
    let pre = pem_primitives::prefix_sum(&mut m, g, tr).unwrap();
    for i in 0..pre.len {
        m.read(0, pre.addr(i)).unwrap();
    }
    m.ledger().since(&before).cache_misses()
}

#[test]
fn merge_critical_path_scales_with_cores() {
    let runs = random_runs(8, 8, 1 << 14, 2);
    let (_, c1) = merge_host(1, 1024, 16, &runs);
    let (_, c4) = merge_host(4, 1024, 16, &runs);
    assert!(c1.op_critical_path as f64 / c4.op_critical_path as f64 > 3.0);
}

#[test]
fn concat_examples() {
    let mut m = machine(2, 64, 4);
    let a = m.alloc_from(&[1]);
    let b = m.alloc_from(&[2, 3]);
    let e = m.alloc(0);
    let g = m.all_cores();
    let out = concat_runs(&mut m, g, &[a, b]).unwrap();
    assert_eq!(m.snapshot_memory(out).unwrap(), vec![1, 2, 3]);
    let out = concat_runs(&mut m, g, &[e, b, e]).unwrap();
    assert_eq!(m.snapshot_memory(out).unwrap(), vec![2, 3]);
    let out = concat_runs(&mut m, g, &[e, e]).unwrap();
    assert!(out.is_empty());
}

#[test]
fn concat_many_random_lists() {
    use rand::{RngExt, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let lists: Vec<Vec<Word>> =
        (0..64).map(|_| (0..r.random_range(0..200)).map(|_| r.random_range(-99..99)).collect()).collect();
    let mut m = machine(8, 256, 8);
    let regions: Vec<MemRegion> = lists.iter().map(|l| m.alloc_from(l)).collect();
    let g = m.all_cores();
    let out = concat_runs(&mut m, g, &regions).unwrap();
    assert_eq!(m.snapshot_memory(out).unwrap(), lists.concat());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_matches_oracle(x in 1usize..8, t in 1usize..8, extra in 0usize..200, seed in 0u64..1000, p in 1usize..9, b in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let y = x * t + extra;
        let runs = random_runs(x, t, y, seed);
        let (out, _) = merge_host(p, 64, b, &runs);
        prop_assert_eq!(out, oracle(&runs));
    }
}
