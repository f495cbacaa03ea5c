// SPDX-License-Identifier: Apache-2.0

use super::{DesignPoint, Objective};

/// `p` dominates `q` when it is at least as accurate and at most as costly,
/// strictly better in one of the two.
pub fn dominates(p: (f64, f64), q: (f64, f64)) -> bool {
    p.0 >= q.0 && p.1 <= q.1 && (p.0 > q.0 || p.1 < q.1)
}

/// Indices of the non-dominated `(accuracy, cost)` pairs, ordered by
/// ascending cost then original index. Exact duplicates are all kept.
pub fn pareto(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .1
            .total_cmp(&points[b].1)
            .then(points[b].0.total_cmp(&points[a].0))
            .then(a.cmp(&b))
    });
    let mut front = Vec::new();
    let mut best_cheaper = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let cost = points[order[i]].1;
        let group_end = order[i..].iter().position(|&j| points[j].1 != cost).map_or(order.len(), |n| i + n);
        let top = points[order[i]].0;
        if top > best_cheaper {
            front.extend(order[i..group_end].iter().copied().filter(|&j| points[j].0 == top));
            best_cheaper = top;
        }
        i = group_end;
    }
    front
}

/// Quadratic reference filter, in input order.
pub fn pareto_bruteforce(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|&q| dominates(q, points[i])))
        .collect()
}

pub fn pareto_points<'a>(points: &'a [DesignPoint], objective: Objective) -> Vec<&'a DesignPoint> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.accuracy, objective.cost(&p.metrics))).collect();
    pareto(&pairs).into_iter().map(|i| &points[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    #[test]
    fn hand_example() {
        let pts = [(0.94, 9.0), (0.85, 120.0), (0.90, 5.0)];
        assert_eq!(sorted(pareto(&pts)), vec![0, 2]);
        assert_eq!(pareto(&[(0.5, 1.0)]), vec![0]);
        assert!(pareto(&[]).is_empty());
    }

    #[test]
    fn duplicates_survive_together() {
        let pts = [(0.9, 3.0), (0.9, 3.0), (0.8, 3.0), (0.9, 4.0)];
        assert_eq!(pareto(&pts), vec![0, 1]);
        assert_eq!(pareto_bruteforce(&pts), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn matches_bruteforce(pts in prop::collection::vec((0u8..20, 0u8..20), 1..120)) {
            // coarse grid forces plenty of ties
            let pts: Vec<(f64, f64)> = pts.into_iter().map(|(a, c)| (a as f64 / 20.0, c as f64)).collect();
            prop_assert_eq!(sorted(pareto(&pts)), pareto_bruteforce(&pts));
        }
    }
}
