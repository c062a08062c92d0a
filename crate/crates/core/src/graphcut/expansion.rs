//! α-expansion over the offset labels.
//!
//! Each move lets every point either keep its label or switch to α. The
//! binary move energy is encoded as an s-t graph and solved with
//! [`MaxFlow`]. The far/near smooth costs are not a metric, so pairwise
//! terms that would make a move non-submodular are truncated by raising
//! the mixed entries. A move is accepted only if it strictly lowers the
//! true energy, which keeps the energy trace monotone regardless of the
//! truncation.

use super::maxflow::MaxFlow;
use super::problem::{ContourProblem, Labeling};

/// Pseudo-boolean energy of degree two with submodular pairwise terms.
#[derive(Debug, Clone, Default)]
pub(crate) struct BinaryEnergy {
    constant: i64,
    /// Cost of each variable taking 0 and 1.
    unary: Vec<[i64; 2]>,
    /// Edge `i → j` paid when `x_i = 0` and `x_j = 1`.
    edges: Vec<(usize, usize, i64)>,
}

impl BinaryEnergy {
    pub(crate) fn new(vars: usize) -> Self {
        BinaryEnergy {
            constant: 0,
            unary: vec![[0, 0]; vars],
            edges: Vec::new(),
        }
    }

    pub(crate) fn add_unary(&mut self, i: usize, cost: [i64; 2]) {
        self.unary[i][0] += cost[0];
        self.unary[i][1] += cost[1];
    }

    /// Adds `cost[x_i][x_j]`. Requires `c00 + c11 <= c01 + c10`.
    pub(crate) fn add_pairwise(&mut self, i: usize, j: usize, cost: [[i64; 2]; 2]) {
        let [[a, b], [c, d]] = cost;
        assert!(a + d <= b + c, "pairwise term is not submodular: {cost:?}");
        self.constant += a;
        self.unary[i][1] += c - a;
        self.unary[j][1] += d - c;
        let w = b + c - a - d;
        if w > 0 {
            self.edges.push((i, j, w));
        }
    }

    /// Minimizer and minimum. Ties resolve toward `x = 0`.
    pub(crate) fn minimize(&self) -> (Vec<bool>, i64) {
        let n = self.unary.len();
        let (s, t) = (n, n + 1);
        let mut g = MaxFlow::new(n + 2);
        let mut constant = self.constant;
        for (i, &[c0, c1]) in self.unary.iter().enumerate() {
            let m = c0.min(c1);
            constant += m;
            if c1 - m > 0 {
                g.add_edge(s, i, c1 - m, 0);
            }
            if c0 - m > 0 {
                g.add_edge(i, t, c0 - m, 0);
            }
        }
        for &(i, j, w) in &self.edges {
            g.add_edge(i, j, w, 0);
        }
        let flow = g.run(s, t);
        let sink = g.sink_side(t);
        (sink[..n].to_vec(), constant + flow)
    }
}

/// Result of [`minimize_traced`]: the labeling and the energy after
/// initialization and after every accepted move.
#[derive(Debug, Clone)]
pub struct MinimizeReport {
    pub labeling: Labeling,
    pub energy_trace: Vec<i64>,
    pub sweeps: usize,
}

impl MinimizeReport {
    pub fn energy(&self) -> i64 {
        *self.energy_trace.last().expect("trace holds the initial energy")
    }
}

pub fn minimize(problem: &ContourProblem) -> Labeling {
    minimize_traced(problem).labeling
}

pub fn minimize_traced(problem: &ContourProblem) -> MinimizeReport {
    let labels = problem.labels();
    let nl = labels.len();
    let n = problem.len();
    let zero = labels
        .iter()
        .position(|l| *l == super::OffsetLabel::ZERO)
        .expect("label set contains the zero offset");

    // lookup tables over label indices
    let data: Vec<i64> = (0..n)
        .flat_map(|i| labels.iter().map(move |&l| problem.data_cost(i, l)))
        .collect();
    let smooth: Vec<i64> = labels
        .iter()
        .flat_map(|&a| labels.iter().map(move |&b| problem.smooth_cost(a, b)))
        .collect();
    let d = |i: usize, l: usize| data[i * nl + l];
    let v = |a: usize, b: usize| smooth[a * nl + b];
    let total = |lab: &[usize]| -> i64 {
        let du: i64 = lab.iter().enumerate().map(|(i, &l)| d(i, l)).sum();
        let pu: i64 = problem.pairs().iter().map(|&(i, j)| v(lab[i], lab[j])).sum();
        du + pu
    };

    let mut current = vec![zero; n];
    let mut energy = total(&current);
    let mut trace = vec![energy];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut improved = false;
        for alpha in 0..nl {
            let mut be = BinaryEnergy::new(n);
            for (i, &l) in current.iter().enumerate() {
                be.add_unary(i, [d(i, l), d(i, alpha)]);
            }
            for &(i, j) in problem.pairs() {
                let (li, lj) = (current[i], current[j]);
                let a = v(li, lj);
                let mut b = v(li, alpha);
                let mut c = v(alpha, lj);
                let dd = v(alpha, alpha);
                let excess = a + dd - b - c;
                if excess > 0 {
                    b += excess / 2;
                    c += excess - excess / 2;
                }
                be.add_pairwise(i, j, [[a, b], [c, dd]]);
            }
            let (switch, _) = be.minimize();
            if !switch.iter().any(|&s| s) {
                continue;
            }
            let candidate: Vec<usize> = current
                .iter()
                .zip(&switch)
                .map(|(&l, &s)| if s { alpha } else { l })
                .collect();
            let e = total(&candidate);
            if e < energy {
                current = candidate;
                energy = e;
                trace.push(e);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    MinimizeReport {
        labeling: Labeling {
            labels: current.into_iter().map(|l| labels[l]).collect(),
        },
        energy_trace: trace,
        sweeps,
    }
}
