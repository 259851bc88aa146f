use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelVector;
use crate::error::{Error, Result};

/// Stored representation snapshot; owns its values, so nothing links back to
/// the step that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankEntry {
    pub h: Vec<f64>,
    pub y: LabelVector,
    pub step: u64,
}

/// FIFO memory bank of past representations; capacity 0 disables it.
#[derive(Clone, Debug, Default)]
pub struct MemoryBank {
    capacity: usize,
    entries: VecDeque<BankEntry>,
    next_step: u64,
}

impl MemoryBank {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
            next_step: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest first.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = &BankEntry> {
        self.entries.iter()
    }

    pub fn snapshot(&self) -> Vec<BankEntry> {
        self.entries.iter().cloned().collect()
    }

    pub fn push(&mut self, h: &[f64], y: &LabelVector) -> Result<()> {
        if let Some(first) = self.entries.front() {
            if first.h.len() != h.len() || first.y.len() != y.len() {
                return Err(Error::Shape(format!(
                    "bank holds ({}, {}) entries, got ({}, {})",
                    first.h.len(),
                    first.y.len(),
                    h.len(),
                    y.len()
                )));
            }
        }
        let step = self.next_step;
        self.next_step += 1;
        if self.capacity == 0 {
            return Ok(());
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(BankEntry {
            h: h.to_vec(),
            y: y.clone(),
            step,
        });
        Ok(())
    }

    pub fn push_batch(&mut self, hs: &[Vec<f64>], ys: &[LabelVector]) -> Result<()> {
        if hs.len() != ys.len() {
            return Err(Error::Shape(format!("{} representations for {} labels", hs.len(), ys.len())));
        }
        hs.iter().zip(ys).try_for_each(|(h, y)| self.push(h, y))
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}
