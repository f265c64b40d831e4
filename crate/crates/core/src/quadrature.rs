//! Fixed-node composite Simpson rule.

/// Node count used for every kernel integral. Must be odd.
pub const SIMPSON_NODES: usize = 2001;

/// Composite Simpson approximation of `∫_a^b f` on `nodes` equally spaced
/// points. `nodes` is rounded up to the next odd number (minimum 3).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    let nodes = if nodes < 3 { 3 } else { nodes | 1 };
    let intervals = nodes - 1;
    let step = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + step * i as f64);
    }
    sum * step / 3.0
}
