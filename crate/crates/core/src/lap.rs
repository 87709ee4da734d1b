//! Dense linear assignment by the Jonker-Volgenant shortest augmenting path
//! method: column reduction, reduction transfer, two rounds of augmenting
//! row reduction, then Dijkstra-style augmentation for the rows still free.
//! `O(n³)` in the worst case.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Square matrix of nonnegative finite costs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                found: costs.len(),
            });
        }
        if let Some(index) = costs.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidCost { index });
        }
        Ok(CostMatrix { n, costs })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut costs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                costs.push(f(i, j));
            }
        }
        CostMatrix::new(n, costs)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.n + col]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.costs[i * self.n..(i + 1) * self.n]
    }

    /// Sum of `cost[i][assignment[i]]`, accumulated in row order.
    pub fn cost_of(&self, assignment: &[usize]) -> f64 {
        assignment.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LapSolution {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    pub total_cost: f64,
}

const NONE: usize = usize::MAX;

pub fn solve_lap(matrix: &CostMatrix) -> LapSolution {
    let n = matrix.n;
    if n == 0 {
        return LapSolution {
            row_to_col: Vec::new(),
            total_cost: 0.0,
        };
    }
    if n == 1 {
        return LapSolution {
            row_to_col: vec![0],
            total_cost: matrix.get(0, 0),
        };
    }
    let mut solver = Jv {
        c: matrix,
        n,
        v: vec![0.0; n],
        row_sol: vec![NONE; n],
        col_sol: vec![NONE; n],
    };
    let mut free = solver.column_reduction();
    for _ in 0..2 {
        free = solver.augmenting_row_reduction(free);
    }
    for row in free {
        solver.augment(row);
    }
    let total_cost = matrix.cost_of(&solver.row_sol);
    LapSolution {
        row_to_col: solver.row_sol,
        total_cost,
    }
}

struct Jv<'a> {
    c: &'a CostMatrix,
    n: usize,
    /// Column prices.
    v: Vec<f64>,
    row_sol: Vec<usize>,
    col_sol: Vec<usize>,
}

impl Jv<'_> {
    /// Assigns each column to its cheapest row where that row is still
    /// unclaimed, then transfers slack from singly-assigned rows into the
    /// column prices. Returns the rows left unassigned.
    fn column_reduction(&mut self) -> Vec<usize> {
        let n = self.n;
        let mut matches = vec![0usize; n];
        for j in (0..n).rev() {
            let mut imin = 0;
            let mut min = self.c.get(0, j);
            for i in 1..n {
                let h = self.c.get(i, j);
                if h < min {
                    min = h;
                    imin = i;
                }
            }
            self.v[j] = min;
            matches[imin] += 1;
            if matches[imin] == 1 {
                self.row_sol[imin] = j;
                self.col_sol[j] = imin;
            } else if self.v[j] < self.v[self.row_sol[imin]] {
                let j1 = self.row_sol[imin];
                self.row_sol[imin] = j;
                self.col_sol[j] = imin;
                self.col_sol[j1] = NONE;
            } else {
                self.col_sol[j] = NONE;
            }
        }

        let mut free = Vec::new();
        for i in 0..n {
            match matches[i] {
                0 => free.push(i),
                1 => {
                    let j1 = self.row_sol[i];
                    let row = self.c.row(i);
                    let min = (0..n)
                        .filter(|&j| j != j1)
                        .map(|j| row[j] - self.v[j])
                        .fold(f64::INFINITY, f64::min);
                    self.v[j1] -= min;
                }
                _ => {}
            }
        }
        free
    }

    /// One pass of augmenting row reduction over `free`; returns the rows
    /// still free afterwards.
    fn augmenting_row_reduction(&mut self, free: Vec<usize>) -> Vec<usize> {
        let n = self.n;
        let mut queue = free;
        let mut still_free = Vec::new();
        let mut k = 0;
        // Re-queueing can cycle on float noise; cap the rework.
        let mut budget = n * n;
        while k < queue.len() {
            let i = queue[k];
            k += 1;
            let row = self.c.row(i);
            let mut umin = row[0] - self.v[0];
            let mut j1 = 0;
            let mut j2 = 0;
            let mut usubmin = f64::INFINITY;
            for j in 1..n {
                let h = row[j] - self.v[j];
                if h < usubmin {
                    if h >= umin {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        umin = h;
                        j2 = j1;
                        j1 = j;
                    }
                }
            }
            let mut i0 = self.col_sol[j1];
            let strict = umin < usubmin;
            if strict {
                self.v[j1] -= usubmin - umin;
            } else if i0 != NONE {
                j1 = j2;
                i0 = self.col_sol[j2];
            }
            self.row_sol[i] = j1;
            self.col_sol[j1] = i;
            if i0 != NONE {
                self.row_sol[i0] = NONE;
                if strict && budget > 0 {
                    budget -= 1;
                    // Process the displaced row next.
                    k -= 1;
                    queue[k] = i0;
                } else {
                    still_free.push(i0);
                }
            }
        }
        still_free
    }

    /// Shortest augmenting path from `free_row` to an unassigned column.
    fn augment(&mut self, free_row: usize) {
        let n = self.n;
        let mut d: Vec<f64> = self
            .c
            .row(free_row)
            .iter()
            .zip(&self.v)
            .map(|(c, v)| c - v)
            .collect();
        let mut pred = vec![free_row; n];
        // collist[..low] are scanned, [low..up) share the current minimum,
        // [up..] are still to do.
        let mut collist: Vec<usize> = (0..n).collect();
        let mut low = 0;
        let mut up = 0;
        let mut ready = 0;
        let mut min = 0.0;
        let end_of_path;

        'search: loop {
            if up == low {
                ready = low;
                min = d[collist[up]];
                up += 1;
                for k in up..n {
                    let j = collist[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        collist[k] = collist[up];
                        collist[up] = j;
                        up += 1;
                    }
                }
                if let Some(&j) = collist[low..up].iter().find(|&&j| self.col_sol[j] == NONE) {
                    end_of_path = j;
                    break 'search;
                }
            }
            let j1 = collist[low];
            low += 1;
            let i = self.col_sol[j1];
            let row = self.c.row(i);
            let h = row[j1] - self.v[j1] - min;
            let mut k = up;
            while k < n {
                let j = collist[k];
                let v2 = row[j] - self.v[j] - h;
                if v2 < d[j] {
                    pred[j] = i;
                    if v2 == min {
                        if self.col_sol[j] == NONE {
                            end_of_path = j;
                            break 'search;
                        }
                        collist[k] = collist[up];
                        collist[up] = j;
                        up += 1;
                    }
                    d[j] = v2;
                }
                k += 1;
            }
        }

        for &j in &collist[..ready] {
            self.v[j] += d[j] - min;
        }
        let mut j = end_of_path;
        loop {
            let i = pred[j];
            self.col_sol[j] = i;
            let next = self.row_sol[i];
            self.row_sol[i] = j;
            if i == free_row {
                break;
            }
            j = next;
        }
    }
}
