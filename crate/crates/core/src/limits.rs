use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard caps applied by the enumeration and search routines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest group order accepted for table construction and enumeration.
    pub max_group_order: usize,
    /// Longest block that may be factored. `None` means `2 * D(G)`.
    pub max_block_len: Option<usize>,
    /// Most factorizations a single block may have before the search gives up.
    pub max_factorizations: usize,
    /// Most automorphisms generated for orbit reduction. Beyond this the
    /// searches run unreduced.
    pub max_automorphisms: usize,
    /// Wall-clock budget for one task (one group, one block, one search).
    pub timeout: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_group_order: 256,
            max_block_len: None,
            max_factorizations: 2_000_000,
            max_automorphisms: 1_000_000,
            timeout: None,
        }
    }
}

impl Limits {
    pub fn budget(&self) -> Budget {
        Budget::new(self.timeout)
    }

    pub fn block_cap(&self, davenport: usize) -> usize {
        self.max_block_len.unwrap_or(2 * davenport)
    }
}

/// A running deadline shared by the workers of one task.
///
/// Checking the clock on every node is too slow, so callers call [`Budget::tick`]
/// and the clock is only read every few thousand ticks.
#[derive(Debug)]
pub struct Budget {
    deadline: Option<Instant>,
    ticks: AtomicU64,
}

const CLOCK_STRIDE: u64 = 4096;

impl Budget {
    pub fn new(timeout: Option<Duration>) -> Self {
        Budget { deadline: timeout.map(|t| Instant::now() + t), ticks: AtomicU64::new(0) }
    }

    pub fn unlimited() -> Self {
        Budget::new(None)
    }

    #[inline]
    pub fn tick(&self) -> Result<()> {
        let Some(deadline) = self.deadline else {
            return Ok(());
        };
        let n = self.ticks.fetch_add(1, Ordering::Relaxed);
        if n.is_multiple_of(CLOCK_STRIDE) && Instant::now() >= deadline {
            return Err(Error::Resource("wall-clock timeout".into()));
        }
        Ok(())
    }
}
