//! Four-point Lagrange interpolation on the uniform radial grid, with the
//! even reflection `φ(-s) = φ(s)` at the tip and a constant continuation past
//! `S_max`.

/// Value at arc length `s ≥ 0` of nodal data with spacing `h`.
pub(crate) fn cubic_even(values: &[f64], h: f64, s: f64) -> f64 {
    let n = values.len();
    let last = (n - 1) as f64 * h;
    if s >= last {
        return values[n - 1];
    }
    let x = s / h;
    let j = x.floor() as isize;
    // stencil j-1..=j+2, shifted inward at the far end
    let start = (j - 1).min(n as isize - 4);
    let node = |k: isize| values[k.unsigned_abs()];
    let mut acc = 0.0;
    for a in 0..4 {
        let ka = start + a;
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                let kb = start + b;
                w *= (x - kb as f64) / (ka - kb) as f64;
            }
        }
        acc += w * node(ka);
    }
    acc
}
