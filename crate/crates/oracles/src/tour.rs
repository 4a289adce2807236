//! Exhaustive enumeration of closed tours with one configuration per node.

/// Result of the enumeration: optimal total, order (starting at node 0) and
/// the configuration used at every node of that order.
#[derive(Debug, Clone)]
pub struct BruteForceTour {
    pub total: f64,
    pub order: Vec<usize>,
    pub configs: Vec<usize>,
}

/// Enumerates every permutation of nodes `1..n` after node 0 and every
/// assignment of `c` configurations per node. `cost(i, ci, j, cj)` is the
/// travel cost of leaving node `i` in configuration `ci` towards node `j`
/// entered in configuration `cj`.
pub fn brute_force<F>(n: usize, c: usize, cost: F) -> BruteForceTour
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    assert!(n >= 2);
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = BruteForceTour { total: f64::INFINITY, order: Vec::new(), configs: Vec::new() };
    permute(&mut rest, 0, &mut |perm| {
        let order: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
        let total = fixed_order(&order, c, &cost);
        if total.0 < best.total {
            best = BruteForceTour { total: total.0, order, configs: total.1 };
        }
    });
    best
}

/// Best configuration assignment for a fixed cyclic order, by enumerating all
/// `c^n` assignments.
pub fn fixed_order<F>(order: &[usize], c: usize, cost: &F) -> (f64, Vec<usize>)
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    let n = order.len();
    let mut cfg = vec![0usize; n];
    let mut best = (f64::INFINITY, cfg.clone());
    loop {
        let mut total = 0.0;
        for t in 0..n {
            let u = (t + 1) % n;
            total += cost(order[t], cfg[t], order[u], cfg[u]);
        }
        if total < best.0 {
            best = (total, cfg.clone());
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            cfg[pos] += 1;
            if cfg[pos] < c {
                break;
            }
            cfg[pos] = 0;
            pos += 1;
        }
    }
}

fn permute<G: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, visit: &mut G) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
