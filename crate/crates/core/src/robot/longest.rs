//! Longest simple path through a skeleton; its pixel order becomes the
//! scribble stroke.

use super::RobotError;
use crate::raster::{BinaryMask, PixelPath};
use std::collections::VecDeque;

/// 8-neighborhood in ring order (north first, clockwise); also the neighbor
/// visit order, so traversal ties resolve row-major.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

struct Graph {
    nodes: Vec<(u32, u32)>,
    adj: Vec<Vec<usize>>,
    edges: usize,
}

/// 8-adjacency over foreground pixels, minus diagonal links that a shared
/// foreground 4-neighbor already covers. On a unit-width skeleton the
/// pruned graph is a tree, which makes the double sweep below exact.
fn build_graph(mask: &BinaryMask) -> Graph {
    let size = mask.size();
    let nodes: Vec<(u32, u32)> = mask.iter_ones().collect();
    let mut index = vec![usize::MAX; size.pixel_count()];
    for (i, &(x, y)) in nodes.iter().enumerate() {
        index[size.index(x, y)] = i;
    }
    let mut adj = vec![Vec::new(); nodes.len()];
    let mut edges = 0;
    for (i, &(x, y)) in nodes.iter().enumerate() {
        let mut nb: Vec<(u32, u32)> = Vec::new();
        for &(dx, dy) in &RING {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if !mask.get_signed(nx, ny) {
                continue;
            }
            if dx != 0 && dy != 0 {
                let corner_a = mask.get_signed(x as i64 + dx, y as i64);
                let corner_b = mask.get_signed(x as i64, y as i64 + dy);
                if corner_a || corner_b {
                    continue;
                }
            }
            nb.push((nx as u32, ny as u32));
        }
        nb.sort_by_key(|&(px, py)| (py, px));
        adj[i] = nb
            .into_iter()
            .map(|(px, py)| index[size.index(px, py)])
            .collect();
        edges += adj[i].len();
    }
    Graph {
        nodes,
        adj,
        edges: edges / 2,
    }
}

/// BFS from `root`; returns (farthest node with row-major tie-break,
/// parents). Unreached nodes keep parent `usize::MAX`.
fn bfs_farthest(g: &Graph, adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let n = g.nodes.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::from([root]);
    dist[root] = 0;
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if dist[q] == usize::MAX {
                dist[q] = dist[p] + 1;
                parent[q] = p;
                queue.push_back(q);
            }
        }
    }
    let maxd = dist
        .iter()
        .filter(|&&d| d != usize::MAX)
        .max()
        .copied()
        .unwrap_or(0);
    let far = (0..n)
        .filter(|&i| dist[i] == maxd)
        .min_by_key(|&i| (g.nodes[i].1, g.nodes[i].0))
        .expect("root is always reached");
    (far, parent)
}

fn bfs_tree(g: &Graph, root: usize) -> Vec<Vec<usize>> {
    let n = g.nodes.len();
    let mut tree = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(p) = queue.pop_front() {
        for &q in &g.adj[p] {
            if !seen[q] {
                seen[q] = true;
                tree[p].push(q);
                tree[q].push(p);
                queue.push_back(q);
            }
        }
    }
    tree
}

/// Longest simple path over the pruned pixel graph, via a two-sweep BFS.
/// When the graph carries a cycle it is first reduced to a BFS spanning
/// tree rooted at the first row-major pixel, keeping the result
/// deterministic. Multiple components: the path stays in the component of
/// the first row-major foreground pixel.
pub fn skeleton_longest_path(skeleton: &BinaryMask) -> Result<PixelPath, RobotError> {
    let g = build_graph(skeleton);
    if g.nodes.is_empty() {
        return Err(RobotError::EmptyRegion);
    }
    // nodes come out of iter_ones row-major, so index 0 is the root
    let root = 0usize;
    let tree;
    let adj: &[Vec<usize>] = if g.edges >= g.nodes.len() {
        tree = bfs_tree(&g, root);
        &tree
    } else {
        &g.adj
    };
    let (u, _) = bfs_farthest(&g, adj, root);
    let (v, parent) = bfs_farthest(&g, adj, u);
    let mut chain = vec![v];
    while parent[*chain.last().expect("non-empty")] != usize::MAX {
        chain.push(parent[*chain.last().expect("non-empty")]);
    }
    chain.reverse();
    Ok(PixelPath::new(
        chain.into_iter().map(|i| g.nodes[i]).collect(),
    )?)
}
