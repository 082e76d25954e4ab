//! Streaming state for one orbit: `S_n`, the `K` largest digits, and per-threshold
//! exceedance counts and sums.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SumLedger {
    n: u64,
    total: u128,
    max: u64,
    top: BinaryHeap<Reverse<u64>>,
    capacity: usize,
    top_sum: u128,
    /// Registered thresholds, ascending.
    thresholds: Vec<u64>,
    exceed_count: Vec<u64>,
    exceed_sum: Vec<u128>,
}

impl SumLedger {
    /// A ledger keeping the `capacity` largest digits and tracking `a > c` for
    /// each `c` in `thresholds`.
    pub fn new(capacity: usize, thresholds: &[u64]) -> Self {
        let mut t = thresholds.to_vec();
        t.sort_unstable();
        t.dedup();
        let k = t.len();
        SumLedger {
            n: 0,
            total: 0,
            max: 0,
            top: BinaryHeap::with_capacity(capacity + 1),
            capacity,
            top_sum: 0,
            thresholds: t,
            exceed_count: vec![0; k],
            exceed_sum: vec![0; k],
        }
    }

    #[inline]
    pub fn push(&mut self, a: u64) {
        self.n += 1;
        self.total += u128::from(a);
        if a > self.max {
            self.max = a;
        }
        if self.top.len() < self.capacity {
            self.top.push(Reverse(a));
            self.top_sum += u128::from(a);
        } else if self.capacity > 0 {
            let mut min = self.top.peek_mut().expect("full heap");
            if a > min.0 {
                self.top_sum = self.top_sum - u128::from(min.0) + u128::from(a);
                *min = Reverse(a);
            }
        }
        if self.thresholds.first().is_some_and(|&c| a > c) {
            for (idx, &c) in self.thresholds.iter().enumerate() {
                if a <= c {
                    break;
                }
                self.exceed_count[idx] += 1;
                self.exceed_sum[idx] += u128::from(a);
            }
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `S_n`.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn max_digit(&self) -> u64 {
        self.max
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Sum of the retained `min(n, K)` largest digits.
    pub fn top_sum(&self) -> u128 {
        self.top_sum
    }

    /// The retained largest digits, descending.
    pub fn top_sorted(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.top.iter().map(|r| r.0).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    /// `S_n^b`: the total without its `b` largest digits.
    pub fn trimmed_sum(&self, b: usize) -> Result<u128> {
        if b > self.capacity {
            return Err(Error::Capacity {
                requested: b,
                capacity: self.capacity,
            });
        }
        if b as u64 > self.n {
            return Err(Error::Domain(format!("cannot trim {b} of {} digits", self.n)));
        }
        let removed: u128 = self.top_sorted().iter().take(b).map(|&a| u128::from(a)).sum();
        Ok(self.total - removed)
    }

    fn slot(&self, c: u64) -> Result<usize> {
        self.thresholds.binary_search(&c).map_err(|_| Error::UnknownThreshold(c))
    }

    /// `#{k ≤ n : a_k > c}`.
    pub fn count_exceed(&self, c: u64) -> Result<u64> {
        Ok(self.exceed_count[self.slot(c)?])
    }

    /// `T_n^c = Σ a_k·1{a_k ≤ c}`.
    pub fn truncated_sum(&self, c: u64) -> Result<u128> {
        Ok(self.total - self.exceed_sum[self.slot(c)?])
    }
}

/// `T_n^r` computed directly from the digits.
pub fn truncated_sum(digits: &[u64], r: u64) -> u128 {
    digits.iter().filter(|&&a| a <= r).map(|&a| u128::from(a)).sum()
}
