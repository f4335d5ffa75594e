//! Recursive matrix transpose.

use pem_machine::{Cores, Machine, MemRegion};

use crate::Result;

#[derive(Clone, Copy)]
struct Job {
    src: MemRegion,
    dst: MemRegion,
    rows: usize,
    cols: usize,
}

/// Transposes the `rows x cols` row-major matrix in `src` into a fresh
/// `cols x rows` row-major matrix.
pub fn transpose(m: &mut Machine, group: Cores, src: MemRegion, rows: usize, cols: usize) -> Result<MemRegion> {
    assert_eq!(src.len, rows * cols, "matrix shape does not match region");
    let dst = m.alloc(rows * cols);
    transpose_into(m, group, src, dst, rows, cols)?;
    Ok(dst)
}

/// As [`transpose`], writing into `dst`.
pub fn transpose_into(
    m: &mut Machine,
    group: Cores,
    src: MemRegion,
    dst: MemRegion,
    rows: usize,
    cols: usize,
) -> Result<()> {
    assert!(src.len >= rows * cols && dst.len >= rows * cols);
    if rows * cols == 0 {
        return Ok(());
    }
    let b = m.config().b;
    let g = group.fit(rows * cols, b);
    let job = Job { src, dst, rows, cols };
    par(m, g, &job, 0, rows, 0, cols, b)?;
    m.barrier(group);
    Ok(())
}

// Splits the block `[r0, r0 + nr) x [c0, c0 + nc)` between the two halves of
// `g` until every core has one sub-block. Columns are split whenever they are
// not much shorter than rows; with fewer than `B` rows in total, always, so
// each core writes whole output rows.
#[allow(clippy::too_many_arguments)]
fn par(m: &mut Machine, g: Cores, job: &Job, r0: usize, nr: usize, c0: usize, nc: usize, b: usize) -> Result<()> {
    if g.len == 1 || nr * nc <= 1 {
        return seq(m, g.core(0), job, r0, nr, c0, nc);
    }
    let k1 = g.len / 2;
    let g1 = Cores::new(g.lo, k1);
    let g2 = Cores::new(g.lo + k1, g.len - k1);
    let split_cols = nc > 1 && (job.rows < b || nc > nr / 4 || nr == 1);
    if split_cols {
        let h = (nc * k1 / g.len).clamp(1, nc - 1);
        par(m, g1, job, r0, nr, c0, h, b)?;
        par(m, g2, job, r0, nr, c0 + h, nc - h, b)
    } else {
        let h = (nr * k1 / g.len).clamp(1, nr - 1);
        par(m, g1, job, r0, h, c0, nc, b)?;
        par(m, g2, job, r0 + h, nr - h, c0, nc, b)
    }
}

fn seq(m: &mut Machine, c: usize, job: &Job, r0: usize, nr: usize, c0: usize, nc: usize) -> Result<()> {
    if nr * nc <= 4 || nr == 1 || nc == 1 {
        for i in r0..r0 + nr {
            for j in c0..c0 + nc {
                let v = m.rd(c, job.src, i * job.cols + j)?;
                m.wr(c, job.dst, j * job.rows + i, v)?;
            }
        }
        return Ok(());
    }
    if nc >= nr {
        let h = nc / 2;
        seq(m, c, job, r0, nr, c0, h)?;
        seq(m, c, job, r0, nr, c0 + h, nc - h)
    } else {
        let h = nr / 2;
        seq(m, c, job, r0, h, c0, nc)?;
        seq(m, c, job, r0 + h, nr - h, c0, nc)
    }
}
