//! Exact transport LP by the transportation simplex method.
//!
//! North-west-corner start, MODI pricing on a spanning-tree basis. Degenerate
//! bases keep explicit zero-flow basic cells; after a run of degenerate pivots
//! pricing switches to Bland's smallest-index rule, which cannot cycle.

use std::collections::VecDeque;

use ndarray::{Array1, Array2};

use super::marginal::{check_balanced, Marginal};
use super::plan::Plan;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub plan: Plan,
    pub value: f64,
    /// Row potentials u with u_i + v_j ≤ w_ij.
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub pivots: usize,
    pub degenerate_pivots: usize,
}

/// min ⟨W,T⟩ over U(a,b). Returns the optimal vertex and its value.
pub fn transport_lp(w: &Array2<f64>, a: &Marginal, b: &Marginal) -> Result<(Plan, f64)> {
    transport_lp_detailed(w, a, b).map(|s| (s.plan, s.value))
}

pub fn transport_lp_detailed(w: &Array2<f64>, a: &Marginal, b: &Marginal) -> Result<LpSolution> {
    let (m, n) = (a.len(), b.len());
    if w.dim() != (m, n) {
        return Err(Error::Shape { expected: (m, n), got: w.dim() });
    }
    check_balanced(a, b)?;
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("transport cost must be finite".into()));
    }
    let mut tab = Tableau::north_west(a.as_slice(), b.as_slice());
    let scale = w.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let eps = 1e-12 * scale;
    let cap = 1000 + 20 * m * n * (m + n);
    let mut pivots = 0;
    let mut degenerate = 0;
    let mut degenerate_run = 0;
    let mut bland = false;
    let (mut u, mut v) = tab.potentials(w);
    loop {
        let Some((ie, je)) = tab.entering(w, &u, &v, eps, bland) else { break };
        if pivots >= cap {
            return Err(Error::LpIterationCap { iterations: pivots, degenerate });
        }
        let theta = tab.pivot(ie, je, bland);
        pivots += 1;
        if theta <= 0.0 {
            degenerate += 1;
            degenerate_run += 1;
            if degenerate_run > 2 * (m + n) {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        (u, v) = tab.potentials(w);
    }
    let mut x = Array2::zeros((m, n));
    for &(i, j, f) in &tab.cells {
        x[(i, j)] = f.max(0.0);
    }
    let value = (&x * w).sum();
    let plan = Plan::dense(x, a.clone(), b.clone())?;
    Ok(LpSolution { plan, value, u, v, pivots, degenerate_pivots: degenerate })
}

struct Tableau {
    m: usize,
    n: usize,
    /// Basic cells (row, col, flow); always m + n − 1 of them.
    cells: Vec<(usize, usize, f64)>,
    /// Index into `cells` for basic (i, j).
    slot: Vec<Option<usize>>,
}

impl Tableau {
    fn north_west(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let (mut s, mut d) = (a.to_vec(), b.to_vec());
        let mut cells = Vec::with_capacity(m + n - 1);
        let mut slot = vec![None; m * n];
        let (mut i, mut j) = (0, 0);
        loop {
            let q = s[i].min(d[j]).max(0.0);
            slot[i * n + j] = Some(cells.len());
            cells.push((i, j, q));
            s[i] -= q;
            d[j] -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || s[i] <= d[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { m, n, cells, slot }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (c, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, c));
            adj[self.m + j].push((i, c));
        }
        adj
    }

    fn potentials(&self, w: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
        let (m, n) = (self.m, self.n);
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &(next, c) in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j, _) = self.cells[c];
                    pot[next] = w[(i, j)] - pot[node];
                    queue.push_back(next);
                }
            }
        }
        (Array1::from(pot[..m].to_vec()), Array1::from(pot[m..].to_vec()))
    }

    fn entering(&self, w: &Array2<f64>, u: &Array1<f64>, v: &Array1<f64>, eps: f64, bland: bool) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.m {
            for j in 0..self.n {
                if self.slot[i * self.n + j].is_some() {
                    continue;
                }
                let r = w[(i, j)] - u[i] - v[j];
                if r < -eps {
                    if bland {
                        return Some((i, j));
                    }
                    if best.map_or(true, |b| r < b.2) {
                        best = Some((i, j, r));
                    }
                }
            }
        }
        best.map(|b| (b.0, b.1))
    }

    /// Tree path of cell slots from row node `ie` to column node `je`.
    fn path(&self, ie: usize, je: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let target = self.m + je;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[ie] = true;
        let mut queue = VecDeque::from([ie]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, c) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    prev[next] = Some((node, c));
                    queue.push_back(next);
                }
            }
        }
        let mut edges = Vec::new();
        let mut node = target;
        while node != ie {
            let (p, c) = prev[node].expect("basis is a spanning tree");
            edges.push(c);
            node = p;
        }
        edges.reverse();
        edges
    }

    /// Brings (ie, je) into the basis; returns the step length θ.
    fn pivot(&mut self, ie: usize, je: usize, bland: bool) -> f64 {
        let path = self.path(ie, je);
        // Path edges alternate −, +, −, … starting next to row ie.
        let mut leave: Option<usize> = None;
        let mut theta = f64::INFINITY;
        for (pos, &c) in path.iter().enumerate() {
            if pos % 2 != 0 {
                continue;
            }
            let (i, j, f) = self.cells[c];
            let better = match leave {
                None => true,
                Some(l) => {
                    let (li, lj, _) = self.cells[l];
                    f < theta || (bland && f == theta && (i, j) < (li, lj))
                }
            };
            if better {
                theta = f;
                leave = Some(c);
            }
        }
        let leave = leave.expect("cycle has a decreasing cell");
        let theta = theta.max(0.0);
        for (pos, &c) in path.iter().enumerate() {
            let f = &mut self.cells[c].2;
            if pos % 2 == 0 {
                *f = (*f - theta).max(0.0);
            } else {
                *f += theta;
            }
        }
        let (li, lj, _) = self.cells[leave];
        self.slot[li * self.n + lj] = None;
        self.cells[leave] = (ie, je, theta);
        self.slot[ie * self.n + je] = Some(leave);
        theta
    }
}
