//! Cake-cutting score: number of constant-value blocks in a pattern.

use crate::hadamard::Pattern2D;

/// Counts maximal 4-connected regions of equal value.
pub fn count_blocks(values: &[i8], side: usize) -> usize {
    debug_assert_eq!(values.len(), side * side);
    let mut seen = vec![false; values.len()];
    let mut stack = Vec::new();
    let mut blocks = 0;
    for start in 0..values.len() {
        if seen[start] {
            continue;
        }
        blocks += 1;
        let v = values[start];
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx / side, idx % side);
            let mut visit = |n: usize| {
                if !seen[n] && values[n] == v {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(idx - side);
            }
            if i + 1 < side {
                visit(idx + side);
            }
            if j > 0 {
                visit(idx - 1);
            }
            if j + 1 < side {
                visit(idx + 1);
            }
        }
    }
    blocks
}

pub fn score_cake_cutting(p: &Pattern2D) -> f64 {
    count_blocks(p.values(), p.side()) as f64
}
