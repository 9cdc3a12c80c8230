use crate::grid::EdgeGraph;

/// Minimum mean cycle by Karp's recurrence from a virtual super-source.
///
/// Returns the minimum cycle mean of `costs` and a witness cycle as a list of
/// edge ids in traversal order. `D_k(v)` is the cheapest walk of exactly `k`
/// edges ending at `v`; the recurrence runs `N + 1` rounds (`k = 0..=N`).
pub fn min_mean_cycle(graph: &EdgeGraph, costs: &[f64]) -> (f64, Vec<usize>) {
    let n = graph.node_count();
    let mut d = vec![f64::INFINITY; (n + 1) * n];
    let mut pred = vec![usize::MAX; (n + 1) * n];
    d[..n].fill(0.0);
    for k in 1..=n {
        let (prev, cur) = d.split_at_mut(k * n);
        let prev = &prev[(k - 1) * n..];
        for (x, slot) in cur[..n].iter_mut().enumerate() {
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            for &e in graph.incoming(x) {
                let s = graph.edge(e).source;
                let cand = prev[s] + costs[e];
                if cand < best {
                    best = cand;
                    arg = e;
                }
            }
            *slot = best;
            pred[k * n + x] = arg;
        }
    }

    let mut best_mean = f64::INFINITY;
    let mut best_node = 0;
    for v in 0..n {
        let dn = d[n * n + v];
        if !dn.is_finite() {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for k in 0..n {
            let dk = d[k * n + v];
            if dk.is_finite() {
                worst = worst.max((dn - dk) / (n - k) as f64);
            }
        }
        if worst < best_mean {
            best_mean = worst;
            best_node = v;
        }
    }

    // Walk back N edges from the optimal endpoint; the walk contains a cycle,
    // and every cycle on it attains the minimum mean up to rounding.
    let mut walk = Vec::with_capacity(n);
    let mut v = best_node;
    for k in (1..=n).rev() {
        let e = pred[k * n + v];
        walk.push(e);
        v = graph.edge(e).source;
    }
    walk.reverse();
    let cycle = best_cycle_on_walk(graph, costs, &walk);
    (best_mean, cycle)
}

/// Cheapest-mean cycle among those closed by the first repeat of each node on a walk.
fn best_cycle_on_walk(graph: &EdgeGraph, costs: &[f64], walk: &[usize]) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let starts: Vec<usize> = walk.iter().map(|&e| graph.edge(e).source).collect();
    for i in 0..walk.len() {
        for j in i..walk.len() {
            if graph.edge(walk[j]).target == starts[i] {
                let cyc = &walk[i..=j];
                let mean = cyc.iter().map(|&e| costs[e]).sum::<f64>() / cyc.len() as f64;
                if best.as_ref().is_none_or(|(m, _)| mean < *m) {
                    best = Some((mean, cyc.to_vec()));
                }
                break;
            }
        }
    }
    best.map(|(_, c)| c).unwrap_or_default()
}

/// Mean cost of a cycle given as edge ids.
pub fn cycle_mean(costs: &[f64], cycle: &[usize]) -> f64 {
    cycle.iter().map(|&e| costs[e]).sum::<f64>() / cycle.len() as f64
}
