use alloc::vec::Vec;

/// Leading-order large-step BE front iteration
/// `(R_{n+1} − R_n)/k = −1/R_{n+1} − b₁k²/(ε²R_{n+1}³)`.
///
/// Starts with `R0` and stops after the first radius `≤ 1`, after `n_steps`
/// steps, or when the implicit equation has no positive root (the front
/// collapses within the step). Each step is a scalar Newton solve to 1e−14.
pub fn radius_iteration_be(r0: f64, k: f64, epsilon: f64, b1: f64, n_steps: usize) -> Vec<f64> {
    let c = b1 * k * k * k / (epsilon * epsilon);
    let mut out = Vec::with_capacity(n_steps.min(1 << 16) + 1);
    out.push(r0);
    let mut r_n = r0;
    for _ in 0..n_steps {
        if !(r_n > 1.0) {
            break;
        }
        match implicit_radius(r_n, k, c) {
            Some(r) => {
                out.push(r);
                r_n = r;
            }
            None => break,
        }
    }
    out
}

/// Leading-order Eyre iteration `(R_{n+1} − R_n)/ε² = −c_E/R_{n+1}`: a BE
/// radius iteration with effective step `c_E ε²` independent of `k`.
pub fn radius_iteration_eyre(r0: f64, epsilon: f64, c_e: f64, n_steps: usize) -> Vec<f64> {
    radius_iteration_be(r0, c_e * epsilon * epsilon, epsilon, 0.0, n_steps)
}

/// Steps taken until the radius first drops to `≤ 1`.
pub fn iteration_count(radii: &[f64]) -> Option<usize> {
    radii.iter().position(|&r| r <= 1.0)
}

/// Largest root of `φ(R) = R − R_n + k/R + c/R³` below `R_n`.
fn implicit_radius(r_n: f64, k: f64, c: f64) -> Option<f64> {
    let phi = |r: f64| r - r_n + k / r + c / (r * r * r);
    let dphi = |r: f64| 1.0 - k / (r * r) - 3.0 * c / (r * r * r * r);
    // φ is convex on (0, ∞); its minimizer bounds the largest root from below.
    let mut lo = 1e-300_f64.max(r_n * 1e-12);
    let mut hi = r_n;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_min = hi;
    if phi(r_min) > 0.0 {
        return None;
    }
    // Newton from R_n decreases monotonically onto the root (φ convex, φ(R_n) ≥ 0).
    let mut r = r_n;
    for _ in 0..100 {
        let step = phi(r) / dphi(r);
        let next = (r - step).max(r_min);
        if (next - r).abs() <= 1e-14 * r.abs().max(1.0) {
            return Some(next);
        }
        r = next;
    }
    Some(r)
}
