//! Small graph routines over adjacency lists: SCCs, reachability, BFS paths.

use std::collections::VecDeque;

/// Strongly connected components of the subgraph induced by `keep`,
/// via iterative Tarjan. Components come out in reverse topological order.
pub fn sccs(adj: &[Vec<usize>], keep: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if !keep[root] || index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if !keep[w] {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// True if `comp` (an SCC under `keep`) contains at least one edge.
pub fn is_nontrivial(comp: &[usize], adj: &[Vec<usize>]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

/// States that can reach some state in `targets` (targets included).
pub fn backward_reach(adj: &[Vec<usize>], targets: &[bool]) -> Vec<bool> {
    let n = adj.len();
    let mut rev = vec![Vec::new(); n];
    for (v, succ) in adj.iter().enumerate() {
        for &w in succ {
            rev[w].push(v);
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| targets[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// States reachable from `from`.
pub fn forward_reach(adj: &[Vec<usize>], from: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for &s in from {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Shortest path from `from` to any state satisfying `goal`, using only
/// states allowed by `keep`. Edges are labeled; neighbours are explored in
/// the order given by `edges`. Returns the edge labels and the end state.
/// With `nonempty`, `from` itself only counts as a goal after at least one
/// step (used for cycles).
pub fn bfs_path<L: Copy>(
    n: usize,
    edges: impl Fn(usize) -> Vec<(L, usize)>,
    from: usize,
    keep: impl Fn(usize) -> bool,
    goal: impl Fn(usize) -> bool,
    nonempty: bool,
) -> Option<(Vec<L>, usize)> {
    if !nonempty && goal(from) {
        return Some((Vec::new(), from));
    }
    let mut parent: Vec<Option<(usize, L)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    queue.push_back(from);
    if !nonempty {
        seen[from] = true;
    }
    while let Some(v) = queue.pop_front() {
        for (label, w) in edges(v) {
            if !keep(w) || seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = Some((v, label));
            if goal(w) {
                let mut labels = Vec::new();
                let mut cur = w;
                loop {
                    let (p, l) = parent[cur].unwrap();
                    labels.push(l);
                    cur = p;
                    if cur == from {
                        break;
                    }
                }
                labels.reverse();
                return Some((labels, w));
            }
            queue.push_back(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tarjan_on_small_graph() {
        // 0 -> 1 -> 2 -> 0, 2 -> 3, 3 -> 3, 4 isolated
        let adj = vec![vec![1], vec![2], vec![0, 3], vec![3], vec![]];
        let keep = vec![true; 5];
        let mut comps = sccs(&adj, &keep);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3], vec![4]]);
        assert!(is_nontrivial(&[3], &adj));
        assert!(!is_nontrivial(&[4], &adj));
        let mask = vec![true, true, false, true, true];
        let mut comps = sccs(&adj, &mask);
        comps.sort();
        assert_eq!(comps, vec![vec![0], vec![1], vec![3], vec![4]]);
    }

    #[test]
    fn bfs_cycle_back_to_start() {
        let adj = [vec![1], vec![2], vec![0]];
        let edges = |v: usize| adj[v].iter().map(|&w| (w, w)).collect::<Vec<_>>();
        let (labels, end) = bfs_path(3, edges, 0, |_| true, |v| v == 0, true).unwrap();
        assert_eq!(end, 0);
        assert_eq!(labels, vec![1, 2, 0]);
    }
}
