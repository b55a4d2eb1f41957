//! Shape functions on axis-aligned elements, evaluated at reference
//! coordinates in `[0, 1]^d`. Local node `a` sits at corner
//! `(a & 1, (a >> 1) & 1, (a >> 2) & 1)`.

/// Bilinear shape functions and their physical gradients.
pub fn q1_2d(xi: [f64; 2], h: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let f = |b: usize, t: f64| if b == 1 { t } else { 1.0 - t };
    let df = |b: usize| if b == 1 { 1.0 } else { -1.0 };
    let mut n = [0.0; 4];
    let mut g = [[0.0; 2]; 4];
    for a in 0..4 {
        let (bx, by) = (a & 1, a >> 1);
        n[a] = f(bx, xi[0]) * f(by, xi[1]);
        g[a] = [df(bx) * f(by, xi[1]) / h[0], f(bx, xi[0]) * df(by) / h[1]];
    }
    (n, g)
}

/// Trilinear shape functions and their physical gradients.
pub fn q1_3d(xi: [f64; 3], h: [f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let f = |b: usize, t: f64| if b == 1 { t } else { 1.0 - t };
    let df = |b: usize| if b == 1 { 1.0 } else { -1.0 };
    let mut n = [0.0; 8];
    let mut g = [[0.0; 3]; 8];
    for a in 0..8 {
        let (bx, by, bz) = (a & 1, (a >> 1) & 1, a >> 2);
        let (fx, fy, fz) = (f(bx, xi[0]), f(by, xi[1]), f(bz, xi[2]));
        n[a] = fx * fy * fz;
        g[a] = [df(bx) * fy * fz / h[0], fx * df(by) * fz / h[1], fx * fy * df(bz) / h[2]];
    }
    (n, g)
}

/// Prism element that is bilinear in `(y₁, y₂)` and quadratic in `x₃`.
/// Local node `a = ax + 2 ay + 4 az`, `az ∈ {0, 1, 2}` (bottom, middle, top).
pub fn q1q2_3d(xi: [f64; 3], h: [f64; 3]) -> ([f64; 12], [[f64; 3]; 12]) {
    let f = |b: usize, t: f64| if b == 1 { t } else { 1.0 - t };
    let df = |b: usize| if b == 1 { 1.0 } else { -1.0 };
    let t = xi[2];
    let lz = [2.0 * (t - 0.5) * (t - 1.0), 4.0 * t * (1.0 - t), 2.0 * t * (t - 0.5)];
    let dlz = [4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0];
    let mut n = [0.0; 12];
    let mut g = [[0.0; 3]; 12];
    for a in 0..12 {
        let (bx, by, bz) = (a & 1, (a >> 1) & 1, a >> 2);
        let (fx, fy) = (f(bx, xi[0]), f(by, xi[1]));
        n[a] = fx * fy * lz[bz];
        g[a] = [df(bx) * fy * lz[bz] / h[0], fx * df(by) * lz[bz] / h[1], fx * fy * dlz[bz] / h[2]];
    }
    (n, g)
}

/// Cubic Hermite basis on an interval of length `h`: returns value, first
/// and second physical derivatives of the function attached to end `node`
/// (0 or 1) carrying the value (`kind = 0`) or the slope (`kind = 1`).
pub fn hermite_1d(node: usize, kind: usize, t: f64, h: f64) -> [f64; 3] {
    let (v, d1, d2) = match (node, kind) {
        (0, 0) => (1.0 - 3.0 * t * t + 2.0 * t * t * t, -6.0 * t + 6.0 * t * t, -6.0 + 12.0 * t),
        (1, 0) => (3.0 * t * t - 2.0 * t * t * t, 6.0 * t - 6.0 * t * t, 6.0 - 12.0 * t),
        (0, _) => (h * (t - 2.0 * t * t + t * t * t), h * (1.0 - 4.0 * t + 3.0 * t * t), h * (-4.0 + 6.0 * t)),
        _ => (h * (-t * t + t * t * t), h * (-2.0 * t + 3.0 * t * t), h * (-2.0 + 6.0 * t)),
    };
    [v, d1 / h, d2 / (h * h)]
}

/// Bogner–Fox–Schmit element values. Local DOF `4a + k` belongs to node `a`
/// with kind `k ∈ {w, ∂₁w, ∂₂w, ∂₁₂w}`.
#[derive(Debug, Clone, Copy)]
pub struct BfsEval {
    pub val: [f64; 16],
    pub grad: [[f64; 2]; 16],
    /// `(∂₁₁, ∂₁₂, ∂₂₁, ∂₂₂)`.
    pub hess: [[f64; 4]; 16],
}

pub fn bfs(xi: [f64; 2], h: [f64; 2]) -> BfsEval {
    let mut e = BfsEval { val: [0.0; 16], grad: [[0.0; 2]; 16], hess: [[0.0; 4]; 16] };
    for a in 0..4 {
        for k in 0..4 {
            let x = hermite_1d(a & 1, k & 1, xi[0], h[0]);
            let y = hermite_1d(a >> 1, k >> 1, xi[1], h[1]);
            let i = 4 * a + k;
            e.val[i] = x[0] * y[0];
            e.grad[i] = [x[1] * y[0], x[0] * y[1]];
            let mixed = x[1] * y[1];
            e.hess[i] = [x[2] * y[0], mixed, mixed, x[0] * y[2]];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_nodal_values() {
        let h = 0.3;
        for node in 0..2 {
            for kind in 0..2 {
                for (end, t) in [(0, 0.0), (1, 1.0)] {
                    let r = hermite_1d(node, kind, t, h);
                    let want_v = if node == end && kind == 0 { 1.0 } else { 0.0 };
                    let want_d = if node == end && kind == 1 { 1.0 } else { 0.0 };
                    assert!((r[0] - want_v).abs() < 1e-15);
                    assert!((r[1] - want_d).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bfs_reproduces_bicubic() {
        let (hx, hy) = (0.5, 0.25);
        let p = |x: f64, y: f64| 1.0 + x - 2.0 * y + x * x * y * y * y - 3.0 * x * x * x * y;
        let px = |x: f64, y: f64| 1.0 + 2.0 * x * y * y * y - 9.0 * x * x * y;
        let py = |x: f64, y: f64| -2.0 + 3.0 * x * x * y * y - 3.0 * x * x * x;
        let pxy = |x: f64, y: f64| 6.0 * x * y * y - 9.0 * x * x;
        let pxx = |x: f64, y: f64| 2.0 * y * y * y - 18.0 * x * y;
        let (x0, y0) = (0.2, -0.1);
        let mut coef = [0.0; 16];
        for a in 0..4 {
            let (x, y) = (x0 + (a & 1) as f64 * hx, y0 + (a >> 1) as f64 * hy);
            coef[4 * a..4 * a + 4].copy_from_slice(&[p(x, y), px(x, y), py(x, y), pxy(x, y)]);
        }
        for xi in [[0.3, 0.7], [0.9, 0.1]] {
            let e = bfs(xi, [hx, hy]);
            let (x, y) = (x0 + xi[0] * hx, y0 + xi[1] * hy);
            let v: f64 = (0..16).map(|i| coef[i] * e.val[i]).sum();
            let vxx: f64 = (0..16).map(|i| coef[i] * e.hess[i][0]).sum();
            let vxy: f64 = (0..16).map(|i| coef[i] * e.hess[i][1]).sum();
            assert!((v - p(x, y)).abs() < 1e-13);
            assert!((vxx - pxx(x, y)).abs() < 1e-11);
            assert!((vxy - pxy(x, y)).abs() < 1e-11);
        }
    }

    #[test]
    fn q1_partition_of_unity() {
        let (n, g) = q1_3d([0.2, 0.6, 0.9], [0.1, 0.2, 0.5]);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for d in 0..3 {
            assert!(g.iter().map(|x| x[d]).sum::<f64>().abs() < 1e-13);
        }
        let (n, g) = q1q2_3d([0.3, 0.8, 0.35], [0.1, 0.2, 0.5]);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for d in 0..3 {
            assert!(g.iter().map(|x| x[d]).sum::<f64>().abs() < 1e-12);
        }
        let (n, _) = q1_2d([0.0, 1.0], [1.0, 1.0]);
        assert_eq!(n, [0.0, 0.0, 1.0, 0.0]);
    }
}
