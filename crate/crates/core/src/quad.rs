//! Composite Simpson quadrature used by the internal cross-checks.

/// Integrate `f` over `[a, b]` with `n` subintervals (rounded up to even).
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let x = a + h * k as f64;
        sum += f(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}
