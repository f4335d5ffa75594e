//! Sweep configuration: a flat text format of `[section]` headers followed
//! by `key = value list` lines.
//!
//! ```text
//! # sort misses across sizes
//! [sort]
//! n = 2^12..2^18
//! p = 4
//! M = 4096
//! B = 64
//! seeds = 1, 2, 3
//! clamp_p = true
//! ```
//!
//! A section name is the algorithm, optionally followed by `/label` so one
//! algorithm can be swept under several bounds. The section name is what
//! appears in the `algo` column.

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algo {
    Sort,
    Hull,
    Prefix,
    ObliviousPrefix,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sort" => Algo::Sort,
            "hull" => Algo::Hull,
            "prefix" => Algo::Prefix,
            "oblivious_prefix" => Algo::ObliviousPrefix,
            _ => bail!("unknown algorithm {s:?}"),
        })
    }

    pub fn default_bound(self) -> Bound {
        match self {
            Algo::Sort | Algo::Hull => Bound::SortMisses,
            Algo::Prefix | Algo::ObliviousPrefix => Bound::Scan,
        }
    }
}

/// Closed-form bounds a row is compared against. Miss bounds are compared
/// with `cache_misses`, critical-path bounds with `crit_path`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `(n / B) log_M n`.
    SortMisses,
    /// `n / B`.
    Scan,
    /// `(n / p) log2 n`.
    SortCrit,
    /// `n / p + log2 p`.
    PrefixCrit,
}

impl Bound {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sort_misses" => Bound::SortMisses,
            "scan" => Bound::Scan,
            "sort_crit" => Bound::SortCrit,
            "prefix_crit" => Bound::PrefixCrit,
            _ => bail!("unknown bound {s:?}"),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Bound::SortMisses => "sort_misses",
            Bound::Scan => "scan",
            Bound::SortCrit => "sort_crit",
            Bound::PrefixCrit => "prefix_crit",
        }
    }

    pub fn on_misses(self) -> bool {
        matches!(self, Bound::SortMisses | Bound::Scan)
    }

    /// The bound at one parameter point, or why it is degenerate there.
    pub fn eval(self, n: usize, p: usize, m: usize, b: usize) -> std::result::Result<f64, String> {
        let (n, p, m, b) = (n as f64, p as f64, m as f64, b as f64);
        if n < 2.0 {
            return Err(format!("bound {} is degenerate at n = {n}", self.name()));
        }
        let v = match self {
            Bound::SortMisses => {
                if m <= 1.0 {
                    return Err(format!("log_M n is undefined for M = {m}"));
                }
                n / b * (n.ln() / m.ln())
            }
            Bound::Scan => n / b,
            Bound::SortCrit => n / p * n.log2(),
            Bound::PrefixCrit => n / p + p.log2(),
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(format!("bound {} evaluates to {v}", self.name()))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    /// Section name, written to the `algo` column.
    pub name: String,
    pub algo: Algo,
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub m: Vec<usize>,
    pub b: Vec<usize>,
    pub seeds: Vec<u64>,
    pub bound: Bound,
    /// Run rows with `n < M p` on `max(1, n / M)` cores instead of skipping.
    pub clamp_p: bool,
    /// Sampling exponent for the sort.
    pub x: u32,
}

impl Sweep {
    pub fn new(name: &str) -> Result<Self> {
        let algo = Algo::parse(name.split('/').next().unwrap_or(name))?;
        Ok(Sweep {
            name: name.to_string(),
            algo,
            n: vec![],
            p: vec![1],
            m: vec![4096],
            b: vec![64],
            seeds: vec![1],
            bound: algo.default_bound(),
            clamp_p: false,
            x: 32,
        })
    }
}

/// One value or a list: `4096`, `2^12`, `1, 2, 3`, `1..4` (inclusive) or
/// `2^10..2^14` (powers of two).
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = vec![];
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let (a, b) = (a.trim(), b.trim());
            if a.starts_with("2^") && b.starts_with("2^") {
                let (ea, eb) = (exponent(a)?, exponent(b)?);
                out.extend((ea..=eb).map(|e| 1u64 << e));
            } else {
                out.extend(number(a)?..=number(b)?);
            }
        } else {
            out.push(number(tok)?);
        }
    }
    Ok(out)
}

fn exponent(s: &str) -> Result<u32> {
    let e: u32 = s[2..].trim().parse().with_context(|| format!("bad exponent in {s:?}"))?;
    if e > 62 {
        bail!("2^{e} is too large");
    }
    Ok(e)
}

fn number(s: &str) -> Result<u64> {
    if s.starts_with("2^") {
        return Ok(1u64 << exponent(s)?);
    }
    s.parse().with_context(|| format!("bad number {s:?}"))
}

fn sizes(s: &str) -> Result<Vec<usize>> {
    Ok(parse_list(s)?.into_iter().map(|v| v as usize).collect())
}

pub fn parse_config(text: &str) -> Result<Vec<Sweep>> {
    let mut sweeps: Vec<Sweep> = vec![];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("line {}", lineno + 1);
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sweeps.push(Sweep::new(name.trim()).with_context(at)?);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("{}: expected key = value", at()))?;
        let sweep = sweeps.last_mut().ok_or_else(|| anyhow!("{}: key outside a section", at()))?;
        let value = value.trim();
        match key.trim() {
            "n" => sweep.n = sizes(value).with_context(at)?,
            "p" => sweep.p = sizes(value).with_context(at)?,
            "M" => sweep.m = sizes(value).with_context(at)?,
            "B" => sweep.b = sizes(value).with_context(at)?,
            "seeds" | "seed" => sweep.seeds = parse_list(value).with_context(at)?,
            "bound" => sweep.bound = Bound::parse(value).with_context(at)?,
            "clamp_p" => sweep.clamp_p = value.parse().with_context(at)?,
            "x" => sweep.x = value.parse().with_context(at)?,
            k => bail!("{}: unknown key {k:?}", at()),
        }
    }
    Ok(sweeps)
}

/// Replaces every sweep's seeds with `spec` (a value list), as the
/// `PEMLAB_SEED` variable does.
pub fn override_seeds(sweeps: &mut [Sweep], spec: &str) -> Result<()> {
    let seeds = parse_list(spec).context("PEMLAB_SEED")?;
    for s in sweeps {
        s.seeds = seeds.clone();
    }
    Ok(())
}
