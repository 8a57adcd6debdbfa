//! Assignment of interior rows to workers.

use alloc::vec::Vec;
use core::ops::Range;

use crate::Error;

/// Contiguous interior rows owned by one worker during every phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBlock {
    pub worker: usize,
    pub rows: Range<usize>,
}

/// One block per worker, in worker order. Blocks are contiguous, disjoint and
/// cover rows `1..n - 1` exactly; their sizes differ by at most one, with the
/// larger blocks first. Workers beyond the number of interior rows get empty
/// blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<RowBlock>,
}

impl Partition {
    pub fn blocks(&self) -> &[RowBlock] {
        &self.blocks
    }

    pub fn workers(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, worker: usize) -> &RowBlock {
        &self.blocks[worker]
    }

    /// Worker owning interior row `i`.
    pub fn owner(&self, i: usize) -> Option<usize> {
        self.blocks
            .iter()
            .find(|b| b.rows.contains(&i))
            .map(|b| b.worker)
    }
}

pub fn partition_rows(n: usize, workers: usize) -> Result<Partition, Error> {
    if n < 3 {
        return Err(Error::GridTooSmall { n });
    }
    if workers == 0 {
        return Err(Error::ZeroWorkers);
    }
    let rows = n - 2;
    let base = rows / workers;
    let extra = rows % workers;
    let mut start = 1;
    let blocks = (0..workers)
        .map(|worker| {
            let len = base + usize::from(worker < extra);
            let block = RowBlock {
                worker,
                rows: start..start + len,
            };
            start += len;
            block
        })
        .collect();
    Ok(Partition { blocks })
}
