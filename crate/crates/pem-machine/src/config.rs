use std::fmt;

use crate::MachineError;

/// Largest supported core count. Per-block core sets are `u128` masks.
pub const MAX_CORES: usize = 128;

/// Simulator parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    /// Core count.
    pub p: usize,
    /// Cache capacity per core, in words.
    pub m: usize,
    /// Block size, in words.
    pub b: usize,
    /// Cost units charged per cache or block miss.
    pub miss_latency: u64,
    /// When set, `validate` also requires `m >= b * b`.
    pub tall_cache: bool,
}

impl MachineConfig {
    pub fn new(p: usize, m: usize, b: usize) -> Result<Self, MachineError> {
        let cfg = MachineConfig { p, m, b, miss_latency: 1, tall_cache: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_miss_latency(mut self, latency: u64) -> Self {
        self.miss_latency = latency;
        self
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        let bad = |msg: String| Err(MachineError::Config(msg));
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if self.p > MAX_CORES {
            return bad(format!("p = {} exceeds the supported maximum {MAX_CORES}", self.p));
        }
        if self.b == 0 {
            return bad("B must be at least 1".into());
        }
        if self.m < self.b {
            return bad(format!("M = {} is smaller than B = {}", self.m, self.b));
        }
        if !self.m.is_multiple_of(self.b) {
            return bad(format!("M = {} is not a multiple of B = {}", self.m, self.b));
        }
        if self.tall_cache && self.m < self.b * self.b {
            return bad(format!("tall cache requires M >= B^2 (M = {}, B = {})", self.m, self.b));
        }
        Ok(())
    }

    /// Number of blocks a core's cache can hold.
    pub fn cache_blocks(&self) -> usize {
        self.m / self.b
    }

    /// Same machine with a different core count.
    pub fn with_p(&self, p: usize) -> Result<Self, MachineError> {
        let mut c = self.clone();
        c.p = p;
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} M={} B={} miss_latency={}", self.p, self.m, self.b, self.miss_latency)
    }
}

/// A machine configuration plus the seed that drives every random choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub machine: MachineConfig,
    pub seed: u64,
}

impl Scenario {
    /// Parses `key=value` lines. Recognised keys: `p`, `M`, `B`, `seed`,
    /// `miss_latency`, `tall_cache`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MachineError> {
        let mut p = None;
        let mut m = None;
        let mut b = None;
        let mut seed = 0u64;
        let mut latency = 1u64;
        let mut tall = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(MachineError::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1)));
            };
            let key = key.trim();
            let value = value.trim();
            let num = |v: &str| -> Result<u64, MachineError> {
                v.parse::<u64>()
                    .map_err(|_| MachineError::Config(format!("line {}: {key} is not an integer: {v:?}", lineno + 1)))
            };
            match key {
                "p" => p = Some(num(value)? as usize),
                "M" => m = Some(num(value)? as usize),
                "B" => b = Some(num(value)? as usize),
                "seed" => seed = num(value)?,
                "miss_latency" => latency = num(value)?,
                "tall_cache" => {
                    tall = matches!(value, "1" | "true" | "yes");
                }
                other => return Err(MachineError::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        let missing = |k: &str| MachineError::Config(format!("missing required key {k}"));
        let machine = MachineConfig {
            p: p.ok_or_else(|| missing("p"))?,
            m: m.ok_or_else(|| missing("M"))?,
            b: b.ok_or_else(|| missing("B"))?,
            miss_latency: latency,
            tall_cache: tall,
        };
        machine.validate()?;
        Ok(Scenario { machine, seed })
    }
}
