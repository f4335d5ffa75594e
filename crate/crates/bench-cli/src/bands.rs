//! Bound-ratio band checks over CSV rows.

use std::collections::BTreeMap;
use std::fmt;

use crate::run::ScenarioRow;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Inconclusive(String),
}

/// One `(algo, M, B, p)` series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    pub algo: String,
    pub m: usize,
    pub b: usize,
    pub p: usize,
    /// Ok rows used.
    pub rows: usize,
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub verdict: Verdict,
}

impl SeriesReport {
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }
}

impl fmt::Display for SeriesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match &self.verdict {
            Verdict::Pass => "pass".to_string(),
            Verdict::Fail(why) => format!("FAIL ({why})"),
            Verdict::Inconclusive(why) => format!("inconclusive ({why})"),
        };
        write!(
            f,
            "{} M={} B={} p={}: {} rows, {} skipped, ratio {:.4}..{:.4} -> {verdict}",
            self.algo, self.m, self.b, self.p, self.rows, self.skipped, self.min_ratio, self.max_ratio
        )
    }
}

/// Groups rows by `(algo, M, B, p)` and passes a series when its largest
/// ratio is within `band` times its smallest. Skipped rows are ignored; a
/// failed row fails its series; fewer than two usable rows is inconclusive.
pub fn check_bands(rows: &[ScenarioRow], band: f64) -> Vec<SeriesReport> {
    let mut series: BTreeMap<(&str, usize, usize, usize), Vec<&ScenarioRow>> = BTreeMap::new();
    for r in rows {
        series.entry((&r.algo, r.m, r.b, r.p)).or_default().push(r);
    }
    series
        .into_iter()
        .map(|((algo, m, b, p), rs)| {
            let ratios: Vec<f64> = rs.iter().filter(|r| r.is_ok()).filter_map(|r| r.ratio).collect();
            let skipped = rs.iter().filter(|r| r.is_skipped()).count();
            let failed = rs.iter().filter(|r| !r.is_ok() && !r.is_skipped()).count();
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let verdict = if failed > 0 {
                Verdict::Fail(format!("{failed} rows failed to run"))
            } else if ratios.len() < 2 {
                Verdict::Inconclusive(format!("{} usable rows", ratios.len()))
            } else if min_ratio <= 0.0 {
                Verdict::Fail("a ratio is zero".into())
            } else if max_ratio / min_ratio > band {
                Verdict::Fail(format!("spread {:.3} exceeds {band}", max_ratio / min_ratio))
            } else {
                Verdict::Pass
            };
            SeriesReport { algo: algo.to_string(), m, b, p, rows: ratios.len(), skipped, min_ratio, max_ratio, verdict }
        })
        .collect()
}

/// 0 when every series passes, 1 when any fails, otherwise 2. No series at
/// all is inconclusive.
pub fn exit_code(reports: &[SeriesReport]) -> i32 {
    if reports.iter().any(|r| matches!(r.verdict, Verdict::Fail(_))) {
        1
    } else if reports.is_empty() || reports.iter().any(|r| matches!(r.verdict, Verdict::Inconclusive(_))) {
        2
    } else {
        0
    }
}
