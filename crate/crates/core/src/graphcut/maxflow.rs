//! Integer-capacity maximum flow (Dinic's blocking-flow augmenting paths).

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: i64,
}

/// Directed flow network. Edges are stored in pairs so that `e ^ 1` is
/// the residual twin of `e`.
#[derive(Debug, Clone)]
pub struct MaxFlow {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        MaxFlow {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u → v` with capacity `cap` and `v → u` with `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, rev_cap: i64) {
        debug_assert!(cap >= 0 && rev_cap >= 0);
        let e = self.edges.len();
        self.edges.push(Edge { to: v, cap });
        self.edges.push(Edge { to: u, cap: rev_cap });
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
    }

    fn levels(&self, s: usize, t: usize, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > 0 && level[to] < 0 {
                    level[to] = level[u] + 1;
                    queue.push_back(to);
                }
            }
        }
        level[t] >= 0
    }

    /// Pushes the maximum flow from `s` to `t` and returns its value.
    pub fn run(&mut self, s: usize, t: usize) -> i64 {
        assert_ne!(s, t);
        let n = self.node_count();
        let mut level = vec![-1i32; n];
        let mut next = vec![0usize; n];
        let mut path: Vec<usize> = Vec::new();
        let mut total = 0i64;
        while self.levels(s, t, &mut level) {
            next.fill(0);
            path.clear();
            let mut u = s;
            loop {
                if u == t {
                    let bottleneck = path.iter().map(|&e| self.edges[e].cap).min().unwrap_or(0);
                    total += bottleneck;
                    let mut cut_at = path.len();
                    for (k, &e) in path.iter().enumerate() {
                        self.edges[e].cap -= bottleneck;
                        self.edges[e ^ 1].cap += bottleneck;
                        if self.edges[e].cap == 0 && cut_at == path.len() {
                            cut_at = k;
                        }
                    }
                    // resume from the tail of the first saturated edge
                    path.truncate(cut_at);
                    u = path.last().map_or(s, |&e| self.edges[e].to);
                    continue;
                }
                let mut advanced = false;
                while next[u] < self.adj[u].len() {
                    let e = self.adj[u][next[u]];
                    let Edge { to, cap } = self.edges[e];
                    if cap > 0 && level[to] == level[u] + 1 {
                        path.push(e);
                        u = to;
                        advanced = true;
                        break;
                    }
                    next[u] += 1;
                }
                if advanced {
                    continue;
                }
                // dead end
                level[u] = -1;
                match path.pop() {
                    None => break,
                    Some(e) => {
                        u = self.edges[e ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
        total
    }

    /// After [`run`](Self::run): nodes that can still reach `t` through
    /// residual capacity. This is the smallest sink side of a minimum cut.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut reach = vec![false; self.node_count()];
        reach[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                // twin of e runs u -> v
                let u = self.edges[e].to;
                if !reach[u] && self.edges[e ^ 1].cap > 0 {
                    reach[u] = true;
                    queue.push_back(u);
                }
            }
        }
        reach
    }
}
