use alloc::vec::Vec;

const G1: ([f64; 1], [f64; 1]) = ([0.0], [2.0]);
const G2: ([f64; 2], [f64; 2]) = ([-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], [1.0, 1.0]);
const G3: ([f64; 3], [f64; 3]) = (
    [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
    [0.555_555_555_555_555_6, 0.888_888_888_888_888_9, 0.555_555_555_555_555_6],
);
const G4: ([f64; 4], [f64; 4]) = (
    [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6],
    [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9],
);
const G5: ([f64; 5], [f64; 5]) = (
    [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664],
    [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ],
);

/// Gauss–Legendre rule with `n ∈ 1..=5` points on `[0, 1]` (weights sum
/// to 1). Exact for polynomials of degree `2n - 1`.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    let (x, w): (&[f64], &[f64]) = match n {
        1 => (&G1.0, &G1.1),
        2 => (&G2.0, &G2.1),
        3 => (&G3.0, &G3.1),
        4 => (&G4.0, &G4.1),
        5 => (&G5.0, &G5.1),
        _ => panic!("gauss rule with {n} points is not tabulated"),
    };
    x.iter().zip(w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

/// Tensor rule on `[0, 1]²`.
pub fn gauss_2d(n: usize) -> Vec<([f64; 2], f64)> {
    let g = gauss(n);
    let mut out = Vec::with_capacity(n * n);
    for &(y, wy) in &g {
        for &(x, wx) in &g {
            out.push(([x, y], wx * wy));
        }
    }
    out
}

/// Tensor rule on `[0, 1]³` with `n_xy` points in the first two
/// directions and `n_z` in the third.
pub fn gauss_3d(n_xy: usize, n_z: usize) -> Vec<([f64; 3], f64)> {
    let g = gauss(n_xy);
    let gz = gauss(n_z);
    let mut out = Vec::with_capacity(n_xy * n_xy * n_z);
    for &(z, wz) in &gz {
        for &(y, wy) in &g {
            for &(x, wx) in &g {
                out.push(([x, y, z], wx * wy * wz));
            }
        }
    }
    out
}
