use std::io::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    Read,
    Write,
    /// Charge applied when a round closes; `addr` is the block's first word.
    Settle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MissKind {
    None,
    Cache,
    Block,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub round: u64,
    pub core: usize,
    pub op: TraceOp,
    pub addr: usize,
    pub miss_kind: MissKind,
}

impl TraceOp {
    fn as_str(self) -> &'static str {
        match self {
            TraceOp::Read => "read",
            TraceOp::Write => "write",
            TraceOp::Settle => "settle",
        }
    }
}

impl MissKind {
    fn as_str(self) -> &'static str {
        match self {
            MissKind::None => "none",
            MissKind::Cache => "cache",
            MissKind::Block => "block",
        }
    }
}

/// Writes events as CSV with header `round,core,op,addr,miss_kind`.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], mut out: W) -> io::Result<()> {
    writeln!(out, "round,core,op,addr,miss_kind")?;
    for e in events {
        writeln!(out, "{},{},{},{},{}", e.round, e.core, e.op.as_str(), e.addr, e.miss_kind.as_str())?;
    }
    Ok(())
}
