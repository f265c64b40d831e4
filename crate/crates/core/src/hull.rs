//! Monotone-chain lower convex hull over points already sorted by x.

use std::cmp::Ordering;

/// Indices of the lower convex hull of `len` points sorted by increasing x.
///
/// `turn(a, b, c)` must return the sign of the cross product
/// `(b − a) × (c − a)`: `Greater` when `b` lies strictly below the chord
/// from `a` to `c`. Collinear middle points are dropped unless
/// `keep_collinear` is set.
pub(crate) fn lower_hull<F>(len: usize, keep_collinear: bool, turn: F) -> Vec<usize>
where
    F: Fn(usize, usize, usize) -> Ordering,
{
    let mut stack: Vec<usize> = Vec::with_capacity(len.min(1024));
    for i in 0..len {
        while stack.len() >= 2 {
            let (a, b) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            let pop = match turn(a, b, i) {
                Ordering::Greater => false,
                Ordering::Equal => !keep_collinear,
                Ordering::Less => true,
            };
            if !pop {
                break;
            }
            stack.pop();
        }
        stack.push(i);
    }
    stack
}
