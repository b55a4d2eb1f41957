//! Independent reference computations used by the acceptance checks.

use piezoplate_core::material::{ElasticTensor, PermittivityTensor, Tensor4};

pub type M3 = [[f64; 3]; 3];

fn det3(m: &M3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inv3(m: &M3) -> M3 {
    let c = |i: usize, j: usize| {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let (x, y) = ((j + 1) % 3, (j + 2) % 3);
        m[a][x] * m[b][y] - m[a][y] * m[b][x]
    };
    let det = det3(m);
    std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / det))
}

pub fn quad3(m: &M3, v: &[f64; 3]) -> f64 {
    (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| v[i] * m[i][j] * v[j]).sum()
}

/// In-plane tensor in the orthonormal basis `(11, 22, √2·12)`.
pub fn mandel(r: &Tensor4) -> M3 {
    let s = std::f64::consts::SQRT_2;
    let idx = [(0, 1.0), (3, 1.0), (1, s)];
    std::array::from_fn(|i| std::array::from_fn(|j| idx[i].1 * idx[j].1 * r[idx[i].0][idx[j].0]))
}

pub fn weighted_mean(ms: &[M3], w: &[f64]) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| ms.iter().zip(w).map(|(m, w)| w * m[i][j]).sum()))
}

/// Arithmetic (Voigt) and harmonic (Reuss) means of phase tensors.
pub fn voigt_reuss(ms: &[M3], w: &[f64]) -> (M3, M3) {
    let inv: Vec<M3> = ms.iter().map(inv3).collect();
    (weighted_mean(ms, w), inv3(&weighted_mean(&inv, w)))
}

fn bilinear(r: &ElasticTensor, x: &M3, y: &M3) -> f64 {
    let mut e = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    e += r.0[i][j][k][l] * x[i][j] * y[k][l];
                }
            }
        }
    }
    e
}

/// `R s:s + c l·l`.
pub fn electromechanical_energy(r: &ElasticTensor, c: &PermittivityTensor, s: &M3, l: &[f64; 3]) -> f64 {
    let mut e = bilinear(r, s, s);
    for i in 0..3 {
        for j in 0..3 {
            e += c.0[i][j] * l[i] * l[j];
        }
    }
    e
}

/// Elastic energy of the in-plane strain `k`, minimized over the
/// transverse components (Cramer's rule on the 3×3 Schur block).
pub fn plane_energy(r: &ElasticTensor, k: &[[f64; 2]; 2]) -> f64 {
    let basis = |t: usize| -> M3 {
        let mut b = [[0.0; 3]; 3];
        let (i, j) = [(0, 2), (1, 2), (2, 2)][t];
        b[i][j] = 1.0;
        b[j][i] = 1.0;
        b
    };
    let mut s0 = [[0.0; 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            s0[a][b] = k[a][b];
        }
    }
    let m: M3 = std::array::from_fn(|i| std::array::from_fn(|j| bilinear(r, &basis(i), &basis(j))));
    let rhs: [f64; 3] = std::array::from_fn(|i| -bilinear(r, &basis(i), &s0));
    let d = det3(&m);
    let mut s = s0;
    for t in 0..3 {
        let mut mt = m;
        for (i, row) in mt.iter_mut().enumerate() {
            row[t] = rhs[i];
        }
        let x = det3(&mt) / d;
        let b = basis(t);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += x * b[i][j];
            }
        }
    }
    bilinear(r, &s, &s)
}

/// Harmonic mean with weights.
pub fn harmonic_mean(v: &[f64], w: &[f64]) -> f64 {
    1.0 / v.iter().zip(w).map(|(v, w)| w / v).sum::<f64>()
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                }
            }
        })
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

fn poly_der(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn poly_eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |s, c| s * x + c)
}

fn legendre(n: usize) -> Vec<f64> {
    let (mut p0, mut p1) = (vec![1.0], vec![0.0, 1.0]);
    if n == 0 {
        return p0;
    }
    for k in 2..=n {
        let mut p2 = vec![0.0; k + 1];
        for (i, c) in p1.iter().enumerate() {
            p2[i + 1] += (2 * k - 1) as f64 * c / k as f64;
        }
        for (i, c) in p0.iter().enumerate() {
            p2[i] -= (k - 1) as f64 * c / k as f64;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap_or(k);
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        x[k] = (b[k] - (k + 1..n).map(|j| a[k][j] * x[j]).sum::<f64>()) / a[k][k];
    }
    x
}

/// Center deflection of the clamped square under `D Δ²w = p`, in units of
/// `p L⁴ / D`, from a Ritz expansion in `(1 - ξ²)² P_2m(ξ) (1 - η²)² P_2n(η)`.
pub fn clamped_square_center(terms: usize) -> f64 {
    let m = terms;
    let bump = [1.0, 0.0, -2.0, 0.0, 1.0];
    let phi: Vec<Vec<f64>> = (0..m).map(|k| poly_mul(&bump, &legendre(2 * k))).collect();
    let d1: Vec<Vec<f64>> = phi.iter().map(|p| poly_der(p)).collect();
    let d2: Vec<Vec<f64>> = d1.iter().map(|p| poly_der(p)).collect();
    let gl = gauss_legendre(40);
    let gram = |f: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..m).map(|j| gl.iter().map(|(x, w)| w * poly_eval(&f[i], *x) * poly_eval(&f[j], *x)).sum()).collect()
            })
            .collect()
    };
    let (a, b, c) = (gram(&d2), gram(&d1), gram(&phi));
    let mean: Vec<f64> = (0..m).map(|i| gl.iter().map(|(x, w)| w * poly_eval(&phi[i], *x)).sum()).collect();
    // ∫(Δw)² = A⊗C + 2B⊗B + C⊗A on [-1, 1]², i.e. L = 2, D = p = 1.
    let idx = |i: usize, j: usize| i * m + j;
    let mut k = vec![vec![0.0; m * m]; m * m];
    let mut f = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            f[idx(i, j)] = mean[i] * mean[j];
            for r in 0..m {
                for s in 0..m {
                    k[idx(i, j)][idx(r, s)] = a[i][r] * c[j][s] + 2.0 * b[i][r] * b[j][s] + c[i][r] * a[j][s];
                }
            }
        }
    }
    let x = gauss_solve(k, f);
    let w0: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| x[idx(i, j)] * poly_eval(&phi[i], 0.0) * poly_eval(&phi[j], 0.0))
        .sum();
    w0 / 16.0
}

/// Richardson order estimate from three successive values on meshes
/// refined by `ratio`.
pub fn richardson_rate(a: f64, b: f64, c: f64, ratio: f64) -> f64 {
    ((a - b) / (b - c)).abs().ln() / ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ritz_reference_value() {
        let v = clamped_square_center(8);
        assert!((v - clamped_square_center(6)).abs() < 1e-8);
        assert!((v - 0.00126532).abs() < 1e-7, "{v}");
    }

    #[test]
    fn isotropic_plane_stress() {
        let r = ElasticTensor::isotropic(1.0, 1.0);
        assert!((plane_energy(&r, &[[1.0, 0.0], [0.0, 0.0]]) - 8.0 / 3.0).abs() < 1e-14);
    }
}
