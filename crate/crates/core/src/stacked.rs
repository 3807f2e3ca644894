/*
Copyright 2026 The diradmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Decision variables of all agents, stored as `n` contiguous blocks of
/// length `m`. Block `i` is agent `i`'s copy `x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedVector {
    data: Vec<f64>,
    block: usize,
}

impl StackedVector {
    pub fn zeros(agents: usize, block: usize) -> Self {
        Self {
            data: vec![0.0; agents * block],
            block,
        }
    }

    /// Panics if `data.len()` is not a multiple of `block`.
    pub fn from_vec(data: Vec<f64>, block: usize) -> Self {
        assert!(block > 0 && data.len().is_multiple_of(block), "length not a multiple of block size");
        Self { data, block }
    }

    /// `agents` copies of the same `m`-vector.
    pub fn replicate(value: &[f64], agents: usize) -> Self {
        let mut data = Vec::with_capacity(agents * value.len());
        for _ in 0..agents {
            data.extend_from_slice(value);
        }
        Self {
            data,
            block: value.len(),
        }
    }

    pub fn agents(&self) -> usize {
        self.data.len() / self.block
    }

    pub fn block_dim(&self) -> usize {
        self.block
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.block == other.block && self.data.len() == other.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block_of(&self, i: usize) -> &[f64] {
        &self.data[i * self.block..(i + 1) * self.block]
    }

    pub fn block_of_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.block..(i + 1) * self.block]
    }

    pub fn blocks(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.block)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// The average of the blocks, an `m`-vector.
    pub fn block_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.block];
        for b in self.blocks() {
            for (m, v) in mean.iter_mut().zip(b) {
                *m += v;
            }
        }
        let n = self.agents() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// `(11ᵀ/n) x`: the block mean replicated into every block.
    pub fn consensus_projection(&self) -> Self {
        Self::replicate(&self.block_mean(), self.agents())
    }

    /// `x - (11ᵀ/n) x`.
    pub fn disagreement(&self) -> Self {
        let mean = self.block_mean();
        let mut out = self.clone();
        for b in out.data.chunks_mut(self.block) {
            for (v, m) in b.iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert!(self.same_shape(other));
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += alpha * o;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn copy_from(&mut self, other: &Self) {
        debug_assert!(self.same_shape(other));
        self.data.copy_from_slice(&other.data);
    }
}

impl Index<usize> for StackedVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for StackedVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}
