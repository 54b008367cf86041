//! Small reachability helpers shared by the base and replicated graphs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// True when every vertex with `active[v]` can reach and be reached from every
/// other active vertex using only edges between active vertices.
///
/// `succ`/`pred` yield neighbour lists. An empty active set counts as
/// connected.
pub(crate) fn strongly_connected<S, P, I, J>(active: &[bool], succ: S, pred: P) -> bool
where
    S: Fn(usize) -> I,
    P: Fn(usize) -> J,
    I: IntoIterator<Item = usize>,
    J: IntoIterator<Item = usize>,
{
    let Some(start) = active.iter().position(|&a| a) else {
        return true;
    };
    let total = active.iter().filter(|&&a| a).count();
    reach_count(active, start, &succ) == total && reach_count(active, start, &pred) == total
}

fn reach_count<F, I>(active: &[bool], start: usize, next: &F) -> usize
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut seen = vec![false; active.len()];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for w in next(v) {
            if active[w] && !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}

/// Weakly connected components of the graph formed by `edges` over `n`
/// vertices. Only vertices touched by some edge appear; components are sorted
/// by their smallest vertex and each component's vertices are ascending.
pub(crate) fn weak_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut touched = vec![false; n];
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (a, b) in edges {
        touched[a] = true;
        touched[b] = true;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in (0..n).filter(|&v| touched[v]) {
        let r = find(&mut parent, v);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(v);
    }
    comps
}
