use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{BinaryMask, PlannerError, Result};

/// Pixel adjacency graph of a skeleton. Nodes are in raster order; each edge
/// is stored once as `(i, j, weight)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub nodes: Vec<(usize, usize)>,
    pub edges: Vec<(usize, usize, f64)>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
        true
    }
}

impl SkeletonGraph {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Component id per node, numbered in order of each component's first node.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.nodes.len());
        for &(i, j, _) in &self.edges {
            uf.union(i, j);
        }
        let mut ids = HashMap::new();
        let comp = (0..self.nodes.len())
            .map(|v| {
                let r = uf.find(v);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect();
        (comp, ids.len())
    }

    pub fn is_forest(&self) -> bool {
        let mut uf = UnionFind::new(self.nodes.len());
        self.edges.iter().all(|&(i, j, _)| uf.union(i, j))
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (k, &(i, j, _)) in self.edges.iter().enumerate() {
            adj[i].push((j, k));
            adj[j].push((i, k));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

/// 8-neighbour graph with unit weights for side neighbours and √2 for diagonals.
pub fn build_graph(skeleton: &BinaryMask) -> Result<SkeletonGraph> {
    let nodes: Vec<_> = skeleton.foreground().collect();
    if nodes.is_empty() {
        return Err(PlannerError::EmptyGraph);
    }
    let index: HashMap<(usize, usize), usize> = nodes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut edges = Vec::new();
    for (i, &(x, y)) in nodes.iter().enumerate() {
        // forward half of the neighbourhood so each pair appears once
        for (dx, dy) in [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)] {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 {
                continue;
            }
            if let Some(&j) = index.get(&(nx as usize, ny as usize)) {
                let w = if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                edges.push((i.min(j), i.max(j), w));
            }
        }
    }
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(SkeletonGraph { nodes, edges })
}

/// Kruskal minimum spanning forest. Equal weights are taken in lexicographic
/// order of their endpoints' pixel positions.
pub fn mst_refine(graph: &SkeletonGraph) -> Result<SkeletonGraph> {
    if graph.nodes.is_empty() {
        return Err(PlannerError::EmptyGraph);
    }
    let mut order: Vec<_> = graph.edges.clone();
    order.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut uf = UnionFind::new(graph.nodes.len());
    let mut edges: Vec<_> = order.into_iter().filter(|&(i, j, _)| uf.union(i, j)).collect();
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(SkeletonGraph {
        nodes: graph.nodes.clone(),
        edges,
    })
}

/// Farthest node from `start` over live edges; ties go to the lower index.
fn farthest(
    adj: &[Vec<(usize, usize)>],
    live: &[bool],
    weights: &[f64],
    start: usize,
) -> (usize, f64, Vec<Option<usize>>) {
    let n = adj.len();
    let mut dist = vec![f64::NAN; n];
    let mut parent = vec![None; n];
    dist[start] = 0.0;
    let mut stack = vec![start];
    let (mut best, mut best_d) = (start, 0.0);
    while let Some(v) = stack.pop() {
        if dist[v] > best_d || (dist[v] == best_d && v < best) {
            best = v;
            best_d = dist[v];
        }
        for &(u, e) in &adj[v] {
            if live[e] && dist[u].is_nan() {
                dist[u] = dist[v] + weights[e];
                parent[u] = Some(v);
                stack.push(u);
            }
        }
    }
    (best, best_d, parent)
}

/// Cuts a forest into pixel polylines by repeatedly removing the longest
/// remaining path. Every edge lands in exactly one stroke; isolated nodes
/// come out as one-point strokes.
pub fn tree_to_strokes(tree: &SkeletonGraph) -> Result<Vec<Vec<(usize, usize)>>> {
    if tree.nodes.is_empty() {
        return Err(PlannerError::EmptyGraph);
    }
    if !tree.is_forest() {
        return Err(PlannerError::Cyclic);
    }
    let adj = tree.adjacency();
    let weights: Vec<f64> = tree.edges.iter().map(|e| e.2).collect();
    let mut live = vec![true; tree.edges.len()];
    let (comp, ncomp) = tree.components();
    let mut members = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }

    let mut strokes = Vec::new();
    for nodes in members {
        if nodes.len() == 1 {
            strokes.push(vec![tree.nodes[nodes[0]]]);
            continue;
        }
        loop {
            // longest path among the pieces still holding edges
            let mut seen = vec![false; adj.len()];
            let mut best: Option<(f64, Vec<usize>)> = None;
            for &s in &nodes {
                if seen[s] || !adj[s].iter().any(|&(_, e)| live[e]) {
                    continue;
                }
                let (a, _, _) = farthest(&adj, &live, &weights, s);
                let (b, len, parent) = farthest(&adj, &live, &weights, a);
                let mut path = vec![b];
                while let Some(p) = parent[*path.last().expect("nonempty")] {
                    path.push(p);
                }
                for &v in &path {
                    seen[v] = true;
                }
                // mark the rest of this piece as visited too
                let (_, _, reach) = farthest(&adj, &live, &weights, s);
                for (v, r) in reach.iter().enumerate() {
                    if r.is_some() {
                        seen[v] = true;
                    }
                }
                path.reverse();
                if best.as_ref().map_or(true, |(l, _)| len > *l) {
                    best = Some((len, path));
                }
            }
            let Some((_, path)) = best else { break };
            for w in path.windows(2) {
                let e = adj[w[0]].iter().find(|&&(u, e)| u == w[1] && live[e]).expect("path edge").1;
                live[e] = false;
            }
            strokes.push(path.iter().map(|&v| tree.nodes[v]).collect());
        }
    }
    Ok(strokes)
}
