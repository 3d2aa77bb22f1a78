use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::LabelMap;

/// 4-connected components of equal label; returns per-pixel component ids
/// (numbered in raster order of discovery) and component sizes.
pub fn connected_components(labels: &LabelMap) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = labels.dims();
    let src = labels.as_slice();
    let mut comp = vec![u32::MAX; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        let label = src[start];
        comp[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if comp[q] == u32::MAX && src[q] == label {
                    comp[q] = id;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        sizes.push(size);
    }
    (comp, sizes)
}

/// Split every label into its 4-connected components and merge components
/// smaller than `min_size` into the neighbor sharing the longest boundary
/// (ties go to the lower component id). Output labels are contiguous, in
/// raster order of first appearance.
pub fn enforce_connectivity(labels: &LabelMap, min_size: usize) -> LabelMap {
    let (w, h) = labels.dims();
    let (comp, mut sizes) = connected_components(labels);
    let n = sizes.len();

    let mut adj: Vec<HashMap<u32, usize>> = vec![HashMap::new(); n];
    for y in 0..h {
        for x in 0..w {
            let a = comp[y * w + x];
            if x + 1 < w {
                let b = comp[y * w + x + 1];
                if a != b {
                    *adj[a as usize].entry(b).or_default() += 1;
                    *adj[b as usize].entry(a).or_default() += 1;
                }
            }
            if y + 1 < h {
                let b = comp[(y + 1) * w + x];
                if a != b {
                    *adj[a as usize].entry(b).or_default() += 1;
                    *adj[b as usize].entry(a).or_default() += 1;
                }
            }
        }
    }

    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut queue: BinaryHeap<Reverse<(usize, u32)>> = sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < min_size)
        .map(|(i, &s)| Reverse((s, i as u32)))
        .collect();

    while let Some(Reverse((size, id))) = queue.pop() {
        let i = id as usize;
        if parent[i] != id || sizes[i] != size || size >= min_size {
            continue;
        }
        let Some(target) = adj[i]
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&t, _)| t)
        else {
            continue;
        };
        let t = target as usize;
        let edges = std::mem::take(&mut adj[i]);
        for (nb, cnt) in edges {
            if nb == target {
                continue;
            }
            let nbi = nb as usize;
            adj[nbi].remove(&id);
            *adj[nbi].entry(target).or_default() += cnt;
            *adj[t].entry(nb).or_default() += cnt;
        }
        adj[t].remove(&id);
        parent[i] = target;
        sizes[t] += sizes[i];
        if sizes[t] < min_size {
            queue.push(Reverse((sizes[t], target)));
        }
    }

    // Compress merge chains.
    let root = |mut c: u32| {
        while parent[c as usize] != c {
            c = parent[c as usize];
        }
        c
    };
    let merged: Vec<u32> = comp.iter().map(|&c| root(c)).collect();
    LabelMap::new(w, h, merged).expect("dimensions unchanged").relabeled()
}
