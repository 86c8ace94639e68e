//! Minimum-weight vertex cover of a bipartite graph via max-flow/min-cut.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Residual capacities below this are treated as saturated.
const RESIDUAL_EPS: f64 = 1e-14;

struct Edge {
    to: usize,
    cap: f64,
}

/// Dinic's algorithm on real capacities.
struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { edges: Vec::new(), adj: vec![Vec::new(); n], level: vec![0; n], next: vec![0; n] }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap } = self.edges[e];
                if cap > RESIDUAL_EPS && self.level[to] < 0 {
                    self.level[to] = self.level[v] + 1;
                    queue.push_back(to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, limit: f64) -> f64 {
        if v == t {
            return limit;
        }
        while self.next[v] < self.adj[v].len() {
            let e = self.adj[v][self.next[v]];
            let Edge { to, cap } = self.edges[e];
            if cap > RESIDUAL_EPS && self.level[to] == self.level[v] + 1 {
                let pushed = self.dfs(to, t, limit.min(cap));
                if pushed > 0.0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            self.next[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                total += pushed;
            }
        }
    }
}

/// A minimum-weight vertex cover of the bipartite graph with left weights
/// `left`, right weights `right` and `edges` given as `(left, right)` index
/// pairs. Returns cover membership flags for both sides.
///
/// The result is always a cover. Covered vertices whose neighbours are all
/// covered are dropped afterwards, which only matters when rounding left the
/// cut slightly off the optimum.
pub(crate) fn min_weight_vertex_cover(left: &[f64], right: &[f64], edges: &[(usize, usize)]) -> (Vec<bool>, Vec<bool>) {
    let (nl, nr) = (left.len(), right.len());
    let source = nl + nr;
    let sink = source + 1;
    let mut net = Network::new(nl + nr + 2);
    for (a, w) in left.iter().enumerate() {
        net.add_edge(source, a, *w);
    }
    for (b, w) in right.iter().enumerate() {
        net.add_edge(nl + b, sink, *w);
    }
    for &(a, b) in edges {
        net.add_edge(a, nl + b, f64::INFINITY);
    }
    net.max_flow(source, sink);
    net.bfs(source);
    let reachable = |v: usize| net.level[v] >= 0;

    let mut cover_left: Vec<bool> = (0..nl).map(|a| !reachable(a)).collect();
    let mut cover_right: Vec<bool> = (0..nr).map(|b| reachable(nl + b)).collect();

    let mut left_adj = vec![Vec::new(); nl];
    let mut right_adj = vec![Vec::new(); nr];
    for &(a, b) in edges {
        left_adj[a].push(b);
        right_adj[b].push(a);
    }
    for a in 0..nl {
        if cover_left[a] && left_adj[a].iter().all(|&b| cover_right[b]) {
            cover_left[a] = false;
        }
    }
    for b in 0..nr {
        if cover_right[b] && right_adj[b].iter().all(|&a| cover_left[a]) {
            cover_right[b] = false;
        }
    }
    (cover_left, cover_right)
}
