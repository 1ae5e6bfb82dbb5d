use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the number of basis states. Overridable through the
/// `BBP_MAX_DIM` environment variable or [`FockBasis::with_capacity_limit`].
pub const DEFAULT_MAX_STATES: usize = 200_000;

/// Truncated multimode Fock basis: all occupation vectors
/// `(n_1, ..., n_M)` with `sum n_k <= total_cutoff`.
///
/// States are ordered by total photon number first, then lexicographically
/// on the occupation vector, so the vacuum always has index 0. The size is
/// `binomial(total_cutoff + mode_count, mode_count)`.
#[derive(Debug)]
pub struct FockBasis {
    mode_count: usize,
    total_cutoff: u32,
    states: Vec<Box<[u32]>>,
    index: HashMap<Box<[u32]>, usize>,
    /// start index of each total-photon shell; `shell_starts[n]` is the first
    /// state with total photon number `n`, and a final sentinel equals `len`.
    shell_starts: Vec<usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.mode_count == other.mode_count && self.total_cutoff == other.total_cutoff
    }
}
impl Eq for FockBasis {}

fn capacity_limit() -> usize {
    std::env::var("BBP_MAX_DIM")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_STATES)
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

impl FockBasis {
    /// Builds the basis with the default (or `BBP_MAX_DIM`-overridden)
    /// capacity limit.
    pub fn new(mode_count: usize, total_cutoff: u32) -> Result<Arc<Self>> {
        Self::with_capacity_limit(mode_count, total_cutoff, capacity_limit())
    }

    pub fn with_capacity_limit(
        mode_count: usize,
        total_cutoff: u32,
        limit: usize,
    ) -> Result<Arc<Self>> {
        if mode_count == 0 {
            return Err(Error::DimensionMismatch(
                "basis needs at least one mode".into(),
            ));
        }
        let size = binomial(
            total_cutoff as u64 + mode_count as u64,
            mode_count as u64,
        );
        if size > limit as u128 {
            return Err(Error::CapacityExceeded {
                requested: size,
                limit,
            });
        }
        let size = size as usize;

        let mut states = Vec::with_capacity(size);
        let mut shell_starts = Vec::with_capacity(total_cutoff as usize + 2);
        let mut scratch = vec![0u32; mode_count];
        for total in 0..=total_cutoff {
            shell_starts.push(states.len());
            enumerate_shell(&mut scratch, 0, total, &mut states);
        }
        shell_starts.push(states.len());
        debug_assert_eq!(states.len(), size);

        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();

        Ok(Arc::new(FockBasis {
            mode_count,
            total_cutoff,
            states,
            index,
            shell_starts,
        }))
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn total_cutoff(&self) -> u32 {
        self.total_cutoff
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Occupation vector of the state with the given index.
    pub fn occupation(&self, index: usize) -> &[u32] {
        &self.states[index]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn total_photons(&self, index: usize) -> u32 {
        self.states[index].iter().sum()
    }

    /// Index range of the shell with total photon number `n`.
    pub fn shell_range(&self, n: u32) -> std::ops::Range<usize> {
        let n = n as usize;
        self.shell_starts[n]..self.shell_starts[n + 1]
    }

    /// First index whose total photon number is >= `n` (basis length when
    /// `n` exceeds the cutoff).
    pub fn first_index_of_shell(&self, n: u32) -> usize {
        if n > self.total_cutoff {
            self.len()
        } else {
            self.shell_starts[n as usize]
        }
    }

    pub fn iter_states(&self) -> impl Iterator<Item = (usize, &[u32])> {
        self.states.iter().enumerate().map(|(i, s)| (i, &**s))
    }

    /// Two bases are interchangeable iff they have the same mode count and
    /// cutoff (the enumeration is deterministic).
    pub fn compatible(&self, other: &FockBasis) -> bool {
        self == other
    }
}

fn enumerate_shell(scratch: &mut [u32], mode: usize, remaining: u32, out: &mut Vec<Box<[u32]>>) {
    if mode == scratch.len() - 1 {
        scratch[mode] = remaining;
        out.push(scratch.to_vec().into_boxed_slice());
        return;
    }
    for n in 0..=remaining {
        scratch[mode] = n;
        enumerate_shell(scratch, mode + 1, remaining - n, out);
    }
}
