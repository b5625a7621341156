//! Exact integer max-flow (Dinic) on small dense graphs.
//!
//! Probabilities are scaled to integers before entering the solver so that
//! optimal transport values, duality checks and cut extraction are exact:
//! no floating-point flow drift can accumulate across augmentations.

/// Probabilities are scaled by this factor and rounded to integers.
///
/// Per-entry rounding error is `0.5 / SCALE`; with a 1e14 scale an n-state
/// instance stays well inside the crate's 1e-12 construction tolerance while
/// capacities and cut values still fit comfortably in `u64`.
pub(crate) const FLOW_SCALE: f64 = 1e14;

/// Effectively-infinite capacity for precedence/transport arcs.
pub(crate) const INF_CAP: u64 = u64::MAX / 4;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    rev: usize,
    cap: u64,
    // original capacity, kept so per-edge flow can be read off afterwards
    orig: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

/// Handle to a forward edge so its flow can be queried after the solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeRef {
    from: usize,
    idx: usize,
}

impl FlowNetwork {
    pub(crate) fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> EdgeRef {
        let fwd = self.adj[from].len();
        let bwd = self.adj[to].len();
        self.adj[from].push(Edge {
            to,
            rev: bwd,
            cap,
            orig: cap,
        });
        self.adj[to].push(Edge {
            to: from,
            rev: fwd,
            cap: 0,
            orig: 0,
        });
        EdgeRef { from, idx: fwd }
    }

    /// Flow pushed through a forward edge (valid after `max_flow`).
    pub(crate) fn flow(&self, e: EdgeRef) -> u64 {
        let edge = &self.adj[e.from][e.idx];
        edge.orig - edge.cap
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.fill(-1);
        let mut queue = std::collections::VecDeque::new();
        self.level[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for e in &self.adj[u] {
                if e.cap > 0 && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, u: usize, sink: usize, pushed: u64) -> u64 {
        if u == sink {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let i = self.iter[u];
            let (to, cap) = {
                let e = &self.adj[u][i];
                (e.to, e.cap)
            };
            if cap > 0 && self.level[to] == self.level[u] + 1 {
                let d = self.dfs(to, sink, pushed.min(cap));
                if d > 0 {
                    let rev = self.adj[u][i].rev;
                    self.adj[u][i].cap -= d;
                    self.adj[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    /// Run Dinic to completion and return the max-flow value.
    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        assert_ne!(source, sink);
        let mut total = 0u64;
        while self.bfs(source, sink) {
            self.iter.fill(0);
            loop {
                let f = self.dfs(source, sink, u64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from `source` in the residual graph; together with its
    /// complement this is a minimum cut once `max_flow` has run.
    pub(crate) fn min_cut_side(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(u) = stack.pop() {
            for e in &self.adj[u] {
                if e.cap > 0 && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }
}

/// Round a probability to the integer capacity grid.
pub(crate) fn scale_prob(p: f64) -> u64 {
    debug_assert!(p >= -1e-9);
    (p.max(0.0) * FLOW_SCALE).round() as u64
}

pub(crate) fn unscale(v: u64) -> f64 {
    v as f64 / FLOW_SCALE
}

/// Maximum-weight up-set of a poset with (scaled integer) node weights.
///
/// Up-sets are closures under the successor relation, so this is the classic
/// project-selection reduction: positive-weight nodes hang off the source,
/// negative-weight nodes feed the sink, and each relation `i ⪯ j` becomes an
/// infinite arc `i -> j` forcing `j` into any finite cut that contains `i`.
/// Returns the selected membership vector and its exact integer weight.
pub(crate) fn max_weight_up_set(weights: &[i64], poset: &crate::poset::FinitePoset) -> (i64, Vec<bool>) {
    let n = weights.len();
    assert_eq!(n, poset.len());
    let source = n;
    let sink = n + 1;
    let mut net = FlowNetwork::new(n + 2);
    for (i, &w) in weights.iter().enumerate() {
        if w > 0 {
            net.add_edge(source, i, w as u64);
        } else if w < 0 {
            net.add_edge(i, sink, (-w) as u64);
        }
    }
    for (i, j) in poset.related_pairs() {
        if i != j {
            net.add_edge(i, j, INF_CAP);
        }
    }
    net.max_flow(source, sink);
    let side = net.min_cut_side(source);
    let members: Vec<bool> = (0..n).map(|i| side[i]).collect();
    let value: i64 = members
        .iter()
        .zip(weights)
        .filter_map(|(&m, &w)| m.then_some(w))
        .sum();
    (value, members)
}
