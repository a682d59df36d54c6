//! Maximum flow / minimum cut (Dinic) on real capacities.

use std::collections::VecDeque;

use crate::error::{arg, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    /// Non-negative; `f64::INFINITY` marks an uncuttable arc.
    pub capacity: f64,
}

/// A directed network with a distinguished source and sink.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= nodes || sink >= nodes {
            return arg("source and sink must be nodes of the network");
        }
        if source == sink {
            return arg("source and sink must differ");
        }
        Ok(Self { nodes, source, sink, arcs: Vec::new() })
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        if from >= self.nodes || to >= self.nodes {
            return arg("arc endpoint out of range");
        }
        if capacity.is_nan() || capacity < 0.0 {
            return arg(format!("arc capacity must be non-negative, got {capacity}"));
        }
        self.arcs.push(FlowArc { from, to, capacity });
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    /// Stand-in for infinite capacity: `(nodes + 1)` times the largest finite
    /// capacity, which exceeds the capacity of any cut made of finite arcs.
    pub fn infinite_capacity(&self) -> f64 {
        let max_finite = self.arcs.iter().map(|a| a.capacity).filter(|c| c.is_finite()).fold(0.0f64, f64::max).max(1.0);
        (self.nodes as f64 + 1.0) * max_finite
    }

    /// Total capacity of arcs leaving `side` (true = source side), with
    /// infinite arcs counted at their realized finite value.
    pub fn cut_capacity(&self, side: &[bool]) -> f64 {
        let inf = self.infinite_capacity();
        self.arcs
            .iter()
            .filter(|a| side[a.from] && !side[a.to])
            .map(|a| if a.capacity.is_finite() { a.capacity } else { inf })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct MaxFlow {
    pub value: f64,
    /// Nodes reachable from the source in the final residual network: the
    /// source side of the minimum cut with the fewest nodes.
    pub source_side: Vec<bool>,
    /// Capacity of the cut induced by `source_side`.
    pub cut_capacity: f64,
}

struct Residual {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

const NIL: usize = usize::MAX;

impl Residual {
    fn new(nodes: usize, arcs: usize) -> Self {
        Self {
            head: vec![NIL; nodes],
            next: Vec::with_capacity(2 * arcs),
            to: Vec::with_capacity(2 * arcs),
            cap: Vec::with_capacity(2 * arcs),
        }
    }

    fn add(&mut self, u: usize, v: usize, c: f64) {
        for (a, b, cc) in [(u, v, c), (v, u, 0.0)] {
            self.to.push(b);
            self.cap.push(cc);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }
}

/// Dinic's algorithm. Deterministic for a fixed arc order.
pub fn max_flow(network: &FlowNetwork) -> MaxFlow {
    let n = network.nodes;
    let (s, t) = (network.source, network.sink);
    let inf = network.infinite_capacity();
    let eps = 1e-12 * inf / (n as f64 + 1.0);
    let mut g = Residual::new(n, network.arcs.len());
    for a in &network.arcs {
        if a.from != a.to {
            g.add(a.from, a.to, if a.capacity.is_finite() { a.capacity } else { inf });
        }
    }

    let mut level = vec![usize::MAX; n];
    let mut iter = vec![NIL; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut value = 0.0;
    let mut path: Vec<usize> = Vec::with_capacity(n);

    loop {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let mut e = g.head[u];
            while e != NIL {
                let v = g.to[e];
                if g.cap[e] > eps && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                e = g.next[e];
            }
        }
        if level[t] == usize::MAX {
            break;
        }
        iter.copy_from_slice(&g.head);

        // Iterative blocking-flow search along the level graph.
        path.clear();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&e| g.cap[e]).fold(f64::INFINITY, f64::min);
                for &e in &path {
                    g.cap[e] -= push;
                    g.cap[e ^ 1] += push;
                }
                value += push;
                // restart from the tail of the first saturated arc
                let cut = path.iter().position(|&e| g.cap[e] <= eps).unwrap_or(0);
                path.truncate(cut);
                u = if cut == 0 { s } else { g.to[path[cut - 1]] };
                continue;
            }
            let mut advanced = false;
            while iter[u] != NIL {
                let e = iter[u];
                let v = g.to[e];
                if g.cap[e] > eps && level[v] == level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                iter[u] = g.next[e];
            }
            if !advanced {
                if u == s {
                    break;
                }
                level[u] = usize::MAX;
                let e = path.pop().expect("non-source node has an incoming path arc");
                u = g.to[e ^ 1];
                iter[u] = g.next[iter[u]];
            }
        }
    }

    let mut source_side = vec![false; n];
    source_side[s] = true;
    queue.clear();
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        let mut e = g.head[u];
        while e != NIL {
            let v = g.to[e];
            if g.cap[e] > eps && !source_side[v] {
                source_side[v] = true;
                queue.push_back(v);
            }
            e = g.next[e];
        }
    }
    let cut_capacity = network.cut_capacity(&source_side);
    MaxFlow { value, source_side, cut_capacity }
}
