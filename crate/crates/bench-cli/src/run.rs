//! Running parameter points and writing rows.

use std::cmp::Ordering;
use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use pem_hull::{hull_main, HalfPlane, HullConfig, Point2, PollRule};
use pem_machine::{CostLedger, Machine, MachineConfig, Word};
use pem_primitives::prefix_sum;
use pem_procalloc::{oblivious_prefix, ObliviousConfig};
use pem_sort::{sample_sort, SortPlan};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Algo, Sweep};

pub const HEADER: [&str; 15] = [
    "algo",
    "n",
    "p",
    "M",
    "B",
    "seed",
    "status",
    "ops",
    "crit_path",
    "cache_misses",
    "block_misses",
    "rounds",
    "retries",
    "bound",
    "ratio",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub ops: u64,
    /// Operation critical path.
    pub crit_path: u64,
    pub cache_misses: u64,
    pub block_misses: u64,
    pub rounds: u64,
    pub retries: u64,
}

impl Measured {
    fn from_ledger(l: &CostLedger, retries: u64) -> Self {
        Measured {
            ops: l.ops(),
            crit_path: l.op_critical_path,
            cache_misses: l.cache_misses(),
            block_misses: l.block_misses(),
            rounds: l.rounds,
            retries,
        }
    }
}

/// One CSV row. `status` is `ok`, `ok: <note>`, `skipped: <reason>` or
/// `failed: <error>`; only ok rows carry measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRow {
    pub algo: String,
    pub n: usize,
    /// Requested core count; a clamped run says so in `status`.
    pub p: usize,
    pub m: usize,
    pub b: usize,
    pub seed: u64,
    pub status: String,
    pub measured: Option<Measured>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

impl ScenarioRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok" || self.status.starts_with("ok:")
    }

    pub fn is_skipped(&self) -> bool {
        self.status.starts_with("skipped")
    }

    fn key(&self) -> (&str, usize, usize, usize, usize, u64) {
        (&self.algo, self.n, self.p, self.m, self.b, self.seed)
    }
}

/// One parameter point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub b: usize,
    pub seed: u64,
}

pub fn points(s: &Sweep) -> Vec<Point> {
    let mut out = vec![];
    for &n in &s.n {
        for &p in &s.p {
            for &m in &s.m {
                for &b in &s.b {
                    for &seed in &s.seeds {
                        out.push(Point { n, p, m, b, seed });
                    }
                }
            }
        }
    }
    out
}

/// Runs every point of every sweep, rows in parallel, and returns them
/// sorted by `(algo, n, p, M, B, seed)`.
pub fn run_sweep(sweeps: &[Sweep]) -> Vec<ScenarioRow> {
    let jobs: Vec<(&Sweep, Point)> = sweeps.iter().flat_map(|s| points(s).into_iter().map(move |pt| (s, pt))).collect();
    let mut rows: Vec<ScenarioRow> = jobs.par_iter().map(|(s, pt)| run_point(s, pt)).collect();
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    rows
}

pub fn run_point(s: &Sweep, pt: &Point) -> ScenarioRow {
    let mut row = ScenarioRow {
        algo: s.name.clone(),
        n: pt.n,
        p: pt.p,
        m: pt.m,
        b: pt.b,
        seed: pt.seed,
        status: String::new(),
        measured: None,
        bound: None,
        ratio: None,
    };
    let mut p = pt.p;
    let mut note = None;
    let needs_mp = matches!(s.algo, Algo::Sort | Algo::Hull);
    if needs_mp && pt.n < pt.m * pt.p && s.clamp_p {
        p = (pt.n / pt.m.max(1)).max(1);
        note = Some(format!("ran on {p} cores"));
    }
    match check(s, pt, p) {
        Err(reason) => row.status = format!("skipped: {reason}"),
        Ok(bound) => match execute(s, pt, p) {
            Ok(meas) => {
                let got = if s.bound.on_misses() { meas.cache_misses } else { meas.crit_path };
                row.bound = Some(bound);
                row.ratio = Some(got as f64 / bound);
                row.measured = Some(meas);
                row.status = match note {
                    Some(n) => format!("ok: {n}"),
                    None => "ok".into(),
                };
            }
            Err(e) => row.status = format!("failed: {e:#}"),
        },
    }
    row
}

/// Preconditions of a row; the bound on success.
fn check(s: &Sweep, pt: &Point, p: usize) -> std::result::Result<f64, String> {
    MachineConfig::new(p, pt.m, pt.b).map_err(|e| e.to_string())?;
    match s.algo {
        Algo::Sort | Algo::Hull if pt.n < pt.m * p => {
            return Err(format!("n = {} is below M p = {}", pt.n, pt.m * p));
        }
        Algo::ObliviousPrefix => {
            let log_n = (pt.n.max(2) as f64).log2().floor() as usize;
            if p > pt.n / log_n {
                return Err(format!("p = {p} exceeds n / log n = {}", pt.n / log_n));
            }
        }
        Algo::Hull if pt.n < 3 => return Err("a bounded intersection needs 3 half-planes".into()),
        _ => {}
    }
    s.bound.eval(pt.n, p, pt.m, pt.b)
}

fn machine(p: usize, m: usize, b: usize) -> Result<Machine> {
    Ok(Machine::new(MachineConfig::new(p, m, b)?)?)
}

fn execute(s: &Sweep, pt: &Point, p: usize) -> Result<Measured> {
    let mut mach = machine(p, pt.m, pt.b)?;
    let g = mach.all_cores();
    match s.algo {
        Algo::Sort => {
            let a = mach.alloc_from(&sort_keys(pt.n, pt.seed));
            let before = mach.ledger();
            let plan = SortPlan { x: s.x, ..SortPlan::with_seed(pt.seed) };
            let out = sample_sort(&mut mach, g, a, &plan)?;
            Ok(Measured::from_ledger(&mach.ledger().since(&before), out.stats.retries as u64))
        }
        Algo::Hull => {
            let planes = hull_planes(pt.n, pt.seed);
            let before = mach.ledger();
            let out = hull_main(&mut mach, g, &planes, &Point2::origin(), &HullConfig::with_seed(pt.seed))?;
            let repolls =
                out.stats.rounds.iter().filter(|r| matches!(r.rule, PollRule::Repolled | PollRule::BestEffort)).count();
            Ok(Measured::from_ledger(&mach.ledger().since(&before), repolls as u64))
        }
        Algo::Prefix => {
            let a = mach.alloc_from(&prefix_words(pt.n, pt.seed));
            let before = mach.ledger();
            prefix_sum(&mut mach, g, a)?;
            Ok(Measured::from_ledger(&mach.ledger().since(&before), 0))
        }
        Algo::ObliviousPrefix => {
            let a = mach.alloc_from(&prefix_words(pt.n, pt.seed));
            let before = mach.ledger();
            let (_, asg) = oblivious_prefix(&mut mach, g, a, &ObliviousConfig::with_seed(pt.seed))?;
            Ok(Measured::from_ledger(&mach.ledger().since(&before), asg.is_none() as u64))
        }
    }
}

/// Keys in `[0, n)`, so duplicates are common.
pub fn sort_keys(n: usize, seed: u64) -> Vec<Word> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| r.random_range(0..n.max(1) as Word)).collect()
}

pub fn prefix_words(n: usize, seed: u64) -> Vec<Word> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| r.random_range(-1000..1000)).collect()
}

/// `n` half-planes `a x + b y <= c` with small integer coefficients and
/// `c > 0`, redrawn until the intersection is bounded.
pub fn hull_planes(n: usize, seed: u64) -> Vec<HalfPlane> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let coef: Vec<(i64, i64, i64)> = (0..n)
            .map(|_| loop {
                let (a, b) = (r.random_range(-50..=50), r.random_range(-50..=50));
                if a != 0 || b != 0 {
                    break (a, b, r.random_range(1..=100));
                }
            })
            .collect();
        if bounded(coef.iter().map(|&(a, b, _)| (a, b)).collect()) {
            return coef.into_iter().map(|(a, b, c)| HalfPlane::int(a, b, c)).collect();
        }
    }
}

/// Half-planes containing the origin bound a region iff their normals leave
/// no angular gap of half a turn or more.
fn bounded(mut normals: Vec<(i64, i64)>) -> bool {
    let upper = |v: &(i64, i64)| v.1 > 0 || (v.1 == 0 && v.0 > 0);
    let cross = |a: &(i64, i64), b: &(i64, i64)| a.0 * b.1 - a.1 * b.0;
    normals.sort_by(|a, b| upper(b).cmp(&upper(a)).then_with(|| 0.cmp(&cross(a, b))));
    normals.dedup_by(|a, b| cross(a, b) == 0 && a.0 * b.0 + a.1 * b.1 > 0);
    let k = normals.len();
    k >= 3 && (0..k).all(|i| cross(&normals[i], &normals[(i + 1) % k]).cmp(&0) == Ordering::Greater)
}

fn fmt_f(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ScenarioRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let meas = match &r.measured {
            Some(m) => [m.ops, m.crit_path, m.cache_misses, m.block_misses, m.rounds, m.retries].map(|v| v.to_string()),
            None => Default::default(),
        };
        let mut rec = vec![
            r.algo.clone(),
            r.n.to_string(),
            r.p.to_string(),
            r.m.to_string(),
            r.b.to_string(),
            r.seed.to_string(),
            r.status.clone(),
        ];
        rec.extend(meas);
        rec.push(fmt_f(r.bound));
        rec.push(fmt_f(r.ratio));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ScenarioRow]) -> String {
    let mut buf = vec![];
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ScenarioRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != HEADER {
        bail!("unexpected header {header:?}");
    }
    let mut rows = vec![];
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let at = || format!("row {}", i + 1);
        let int =
            |k: usize| -> Result<u64> { rec[k].parse().with_context(|| format!("{}: column {}", at(), HEADER[k])) };
        let opt = |k: usize| -> Result<Option<f64>> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                Ok(Some(rec[k].parse().with_context(|| format!("{}: column {}", at(), HEADER[k]))?))
            }
        };
        let measured = if rec[7].is_empty() {
            None
        } else {
            Some(Measured {
                ops: int(7)?,
                crit_path: int(8)?,
                cache_misses: int(9)?,
                block_misses: int(10)?,
                rounds: int(11)?,
                retries: int(12)?,
            })
        };
        rows.push(ScenarioRow {
            algo: rec[0].to_string(),
            n: int(1)? as usize,
            p: int(2)? as usize,
            m: int(3)? as usize,
            b: int(4)? as usize,
            seed: int(5)?,
            status: rec[6].to_string(),
            measured,
            bound: opt(13)?,
            ratio: opt(14)?,
        });
    }
    Ok(rows)
}
