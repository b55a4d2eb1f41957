use piezoplate_core::cell2d::EffectiveTensorsThin;
use piezoplate_core::cell3d::{homogenize_comparable, ComparableField};
use piezoplate_core::femcore::{gauss_2d, Edge, PeriodicMesh2D, PeriodicMesh3D, Phase, PlateMesh};
use piezoplate_core::material::*;
use piezoplate_core::plate::*;
use piezoplate_core::poly::Polynomial;
use proptest::prelude::*;

fn isotropic_thin() -> EffectiveTensorsThin {
    let m = Material::isotropic_elastic(1.0, 1.0);
    let ct = condense(&m.global_tensor().unwrap(), 0.0).unwrap();
    EffectiveTensorsThin {
        r_n_h: ct.r_n_inplane(),
        r_m_h: ct.r_m_inplane(),
        d_m3_h: [0.0; 4],
        e_m3_h: [0.0; 4],
        c_m33_h: 1.0,
        vol_y1: 0.25,
    }
}

fn piezo_material() -> Material {
    let mut d = [0.0; 18];
    d[12] = -0.8;
    d[13] = -0.6;
    d[14] = 1.7;
    d[4] = 0.5;
    Material {
        elastic: ElasticTensor::isotropic(1.3, 0.9),
        piezo: PiezoTensor::from_voigt(&d),
        permittivity: PermittivityTensor::from_voigt(&[1.2, 1.1, 1.5, 0.0, 0.0, 0.1]),
    }
}

/// Thin tensors of a homogeneous piezoelectric plate (`|Y₁| = 1`).
fn piezo_thin() -> EffectiveTensorsThin {
    let ct = condense(&piezo_material().global_tensor().unwrap(), 0.0).unwrap();
    EffectiveTensorsThin {
        r_n_h: ct.r_n_inplane(),
        r_m_h: ct.r_m_inplane(),
        d_m3_h: ct.d_m(),
        e_m3_h: ct.d_m_lower(),
        c_m33_h: ct.c_m33(),
        vol_y1: 1.0,
    }
}

fn unit_square(n: usize, clamped: &[Edge]) -> PlateMesh {
    PlateMesh::new(n, n, 1.0, 1.0, clamped).unwrap()
}

fn mixed_loads() -> Loads {
    let mut l = Loads::transverse(0.7);
    l.f[0] = Polynomial::monomial(0.3, [1, 0, 0]);
    l.g_top[1] = Polynomial::constant(-0.2);
    l.h = Polynomial::constant(1.0).add(&Polynomial::monomial(0.5, [0, 1, 0]));
    l
}

fn assert_energy_identity(s: &PlateSolution) {
    assert!((s.energy - s.work).abs() <= 1e-10 * s.work.abs().max(1e-30), "{} vs {}", s.energy, s.work);
    assert!(s.residual <= 1e-10);
}

// Ritz solution of the clamped square plate with polynomial bases
// (1 - ξ²)² P_2m(ξ), integrated by Gauss-Legendre quadrature.

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
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

/// Center deflection of the clamped square `[0, L]²` under `D Δ²w = p`,
/// in units of `p L⁴ / D`.
fn clamped_center_coefficient(m: usize) -> f64 {
    let bump = [1.0, 0.0, -2.0, 0.0, 1.0];
    let phi: Vec<Vec<f64>> = (0..m).map(|k| poly_mul(&bump, &legendre(2 * k))).collect();
    let d1: Vec<Vec<f64>> = phi.iter().map(|p| poly_der(p)).collect();
    let d2: Vec<Vec<f64>> = d1.iter().map(|p| poly_der(p)).collect();
    let gl = gauss_legendre(40);
    let gram = |f: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..m).map(|j| gl.iter().map(|(x, w)| w * poly_eval(&f[i], *x) * poly_eval(&f[j], *x)).sum()).collect())
            .collect()
    };
    let (a, b, c) = (gram(&d2), gram(&d1), gram(&phi));
    let mean: Vec<f64> = (0..m).map(|i| gl.iter().map(|(x, w)| w * poly_eval(&phi[i], *x)).sum()).collect();
    // On [-1, 1]² with L = 2: ∫(Δw)² = A⊗C + 2B⊗B + C⊗A, load p = 1, D = 1.
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
    let x = dense_solve(k, f);
    let w0: f64 =
        (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| x[idx(i, j)] * poly_eval(&phi[i], 0.0) * poly_eval(&phi[j], 0.0)).sum();
    w0 / 16.0
}

#[test]
fn ritz_oracle_is_converged() {
    let a = clamped_center_coefficient(6);
    let b = clamped_center_coefficient(8);
    assert!((a - b).abs() < 1e-8, "{a} {b}");
    assert!((b - 0.001265).abs() < 1e-6, "{b}");
}

#[test]
fn clamped_plate_center_deflection() {
    let e5 = isotropic_thin();
    let q = 1.0;
    let d = 2.0 / 3.0 * e5.r_n_h[0][0];
    let reference = clamped_center_coefficient(8) * 2.0 * q / d;
    let mut w = Vec::new();
    for n in [16, 32, 64] {
        let mesh = unit_square(n, &Edge::ALL);
        let s = solve_dirichlet_thin(&e5, &Loads::transverse(q), &mesh).unwrap();
        assert_energy_identity(&s);
        w.push(s.deflection_at(&mesh, [0.5, 0.5]));
    }
    let err = (w[2] - reference).abs() / reference;
    assert!(err < 0.01, "{} vs {reference}", w[2]);
    let rate = ((w[0] - w[1]) / (w[1] - w[2])).abs().log2();
    assert!(rate >= 1.8, "rate {rate}");
}

#[test]
fn dirichlet_thin_decouples() {
    let e5 = piezo_thin();
    let mesh = unit_square(6, &[Edge::Left, Edge::Bottom]);
    let mut a = Loads::transverse(1.0);
    a.f[0] = Polynomial::constant(0.4);
    let mut b = a.clone();
    b.phi_c = Polynomial::monomial(2.0, [1, 1, 0]);
    let (sa, sb) = (solve_dirichlet_thin(&e5, &a, &mesh).unwrap(), solve_dirichlet_thin(&e5, &b, &mesh).unwrap());
    assert_eq!(sa.deflection, sb.deflection);
    assert!(sa.membrane.iter().zip(&sb.membrane).any(|(x, y)| (x - y).abs() > 1e-6));
    let mut c = a.clone();
    c.f[2] = Polynomial::constant(-3.0);
    let sc = solve_dirichlet_thin(&e5, &c, &mesh).unwrap();
    assert_eq!(sa.membrane, sc.membrane);
}

#[test]
fn zero_loads_give_zero() {
    let e5 = piezo_thin();
    let mesh = unit_square(4, &Edge::ALL);
    let s = solve_nonlocal_mixed_thin(&e5, 0.3, 0.1, &Loads::default(), &mesh).unwrap();
    assert!(s.max_difference(&PlateSolution { membrane: vec![0.0; s.membrane.len()], deflection: vec![0.0; s.deflection.len()], voltage: vec![0.0; s.voltage.len()], ..s.clone() }) == 0.0);
}

#[test]
fn local_equals_nonlocal_at_zero_g1() {
    let e5 = piezo_thin();
    let mesh = unit_square(8, &[Edge::Left]);
    let loads = mixed_loads();
    let g = 0.5;
    let local = solve_local_mixed_thin(&e5, g, &loads, &mesh).unwrap();
    assert_energy_identity(&local);
    let nl0 = solve_nonlocal_mixed_thin(&e5, g, 0.0, &loads, &mesh).unwrap();
    assert!(local.max_difference(&nl0) < 1e-8, "{}", local.max_difference(&nl0));
    let mut last = f64::INFINITY;
    for k in 2..=8 {
        let s = solve_nonlocal_mixed_thin(&e5, g, 10f64.powi(-k), &loads, &mesh).unwrap();
        assert_energy_identity(&s);
        let d = local.max_difference(&s);
        assert!(d < last, "G1=1e-{k}: {d} !< {last}");
        last = d;
    }
    assert!(last < 1e-5, "{last}");
}

#[test]
fn constant_source_gives_constant_voltage() {
    let mut e5 = isotropic_thin();
    e5.vol_y1 = 0.25;
    let (g, h) = (0.7, 1.3);
    let mut loads = Loads::default();
    loads.h = Polynomial::constant(h);
    let expected = e5.vol_y1 * h / (e5.c_m33_h + 2.0 * e5.vol_y1 * g);
    let mesh = unit_square(5, &Edge::ALL);
    let local = solve_local_mixed_thin(&e5, g, &loads, &mesh).unwrap();
    let nonlocal = solve_nonlocal_mixed_thin(&e5, g, 0.2, &loads, &mesh).unwrap();
    for v in local.voltage.iter().chain(&nonlocal.voltage) {
        assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
    }
    assert!(local.membrane.iter().chain(&nonlocal.membrane).all(|v| v.abs() < 1e-12));
}

#[test]
fn pointwise_voltage_recovery() {
    let mut e5 = EffectiveTensorsThin::zero();
    e5.vol_y1 = 0.25;
    e5.c_m33_h = 1.0;
    assert!((recover_voltage_local(&e5, 0.0, &[0.0; 4], 1.0).unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(recover_voltage_local(&e5, 0.0, &[0.0; 4], 0.0).unwrap(), 0.0);
    e5.e_m3_h = [0.3, 0.1, 0.1, -0.2];
    let s = [0.2, -0.4, -0.4, 0.9];
    let a = recover_voltage_local(&e5, 0.5, &s, 0.8).unwrap();
    let b = recover_voltage_local(&e5, 0.5, &s.map(|v| 2.0 * v), 1.6).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-14);
    e5.c_m33_h = 0.0;
    assert!(recover_voltage_local(&e5, 0.0, &s, 1.0).is_err());
}

#[test]
fn load_constraints_are_enforced() {
    let e5 = piezo_thin();
    let mesh = unit_square(4, &Edge::ALL);
    let mut l = Loads::default();
    l.h = Polynomial::constant(1.0);
    assert!(solve_dirichlet_thin(&e5, &l, &mesh).is_err());
    let mut l = Loads::default();
    l.phi_c = Polynomial::constant(1.0);
    assert!(solve_local_mixed_thin(&e5, 0.1, &l, &mesh).is_err());
    assert!(solve_nonlocal_mixed_thin(&e5, 0.1, -1.0, &Loads::default(), &mesh).is_err());
}

fn l2_membrane_error(s: &PlateSolution, mesh: &PlateMesh, exact: impl Fn(f64, f64) -> [f64; 2]) -> f64 {
    let h = mesh.h();
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let o = mesh.element_origin(e);
        for (xi, w) in gauss_2d(4) {
            let x = [o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]];
            let (u, ue) = (s.membrane_at(mesh, x), exact(x[0], x[1]));
            acc += w * h[0] * h[1] * ((u[0] - ue[0]).powi(2) + (u[1] - ue[1]).powi(2));
        }
    }
    acc.sqrt()
}

#[test]
fn manufactured_membrane_converges_quadratically() {
    // ū = (x(1-x)y(1-y), 0) with R_M isotropic (8/3, 2/3, 1).
    let e5 = isotropic_thin();
    let p = |c: f64, i: u32, j: u32| Polynomial::monomial(c, [i, j, 0]);
    let mut loads = Loads::default();
    loads.f[0] = p(16.0 / 3.0, 0, 1).add(&p(-16.0 / 3.0, 0, 2)).add(&p(2.0, 1, 0)).add(&p(-2.0, 2, 0));
    loads.f[1] = p(-5.0 / 3.0, 0, 0).add(&p(10.0 / 3.0, 1, 0)).add(&p(10.0 / 3.0, 0, 1)).add(&p(-20.0 / 3.0, 1, 1));
    let exact = |x: f64, y: f64| [x * (1.0 - x) * y * (1.0 - y), 0.0];
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let mesh = unit_square(n, &Edge::ALL);
            l2_membrane_error(&solve_dirichlet_thin(&e5, &loads, &mesh).unwrap(), &mesh, exact)
        })
        .collect();
    for k in 0..2 {
        let rate = (errs[k] / errs[k + 1]).log2();
        assert!(rate > 1.8, "rate {rate} from {errs:?}");
    }
}

#[test]
fn manufactured_deflection_converges() {
    // u₃ = X(x)X(y), X = t²(1-t)², under (2/3)R_N with D = 16/9.
    let e5 = isotropic_thin();
    let dd = 2.0 / 3.0 * e5.r_n_h[0][0];
    let x_poly = |c: f64, v: usize| -> Polynomial {
        let mut pw = [0u32; 3];
        let coef = [0.0, 0.0, 1.0, -2.0, 1.0];
        let mut out = Polynomial::zero();
        for (k, a) in coef.iter().enumerate() {
            pw[v] = k as u32;
            out = out.add(&Polynomial::monomial(c * a, pw));
        }
        out
    };
    let x2_poly = |c: f64, v: usize| -> Polynomial {
        let mut pw = [0u32; 3];
        let coef = [2.0, -12.0, 12.0];
        let mut out = Polynomial::zero();
        for (k, a) in coef.iter().enumerate() {
            pw[v] = k as u32;
            out = out.add(&Polynomial::monomial(c * a, pw));
        }
        out
    };
    // Δ²u = 24 X(y) + 2 X''(x) X''(y) + 24 X(x); f₃ = D Δ²u / 2.
    let mut f3 = x_poly(24.0, 1).add(&x_poly(24.0, 0));
    let cross = x2_poly(1.0, 0);
    let cross_y = x2_poly(1.0, 1);
    let mut prod = Polynomial::zero();
    for (a, pa) in &cross.terms {
        for (b, pb) in &cross_y.terms {
            prod = prod.add(&Polynomial::monomial(2.0 * a * b, [pa[0] + pb[0], pa[1] + pb[1], 0]));
        }
    }
    f3 = f3.add(&prod).scaled(dd / 2.0);
    let mut loads = Loads::default();
    loads.f[2] = f3;
    let xf = |t: f64| t * t * (1.0 - t) * (1.0 - t);
    let x2f = |t: f64| 2.0 - 12.0 * t + 12.0 * t * t;
    let x1f = |t: f64| 2.0 * t - 6.0 * t * t + 4.0 * t * t * t;
    let errs: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let mesh = unit_square(n, &Edge::ALL);
            let s = solve_dirichlet_thin(&e5, &loads, &mesh).unwrap();
            let h = mesh.h();
            let mut acc = 0.0;
            for e in 0..mesh.n_elements() {
                let o = mesh.element_origin(e);
                for (xi, w) in gauss_2d(4) {
                    let (x, y) = (o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]);
                    let hs = s.deflection_hessian_at(&mesh, [x, y]);
                    let he = [x2f(x) * xf(y), x1f(x) * x1f(y), x1f(x) * x1f(y), xf(x) * x2f(y)];
                    acc += w * h[0] * h[1] * (0..4).map(|p| (hs[p] - he[p]).powi(2)).sum::<f64>();
                }
            }
            acc.sqrt()
        })
        .collect();
    for k in 0..2 {
        let rate = (errs[k] / errs[k + 1]).log2();
        assert!(rate > 1.8, "rate {rate} from {errs:?}");
    }
}

fn constant_comparable() -> piezoplate_core::cell3d::EffectiveTensorsComparable {
    let cols = PeriodicMesh2D::from_phases(4, vec![Phase::Inclusion; 16]).unwrap();
    let mesh = PeriodicMesh3D::extrude(cols, 4).unwrap();
    let field = ComparableField::uniform(&mesh, piezo_material().global_tensor().unwrap());
    homogenize_comparable(&field, &mesh).unwrap().1
}

#[test]
fn comparable_dirichlet_matches_thin_for_constant_coefficients() {
    let (e5, e6) = (piezo_thin(), constant_comparable());
    let mesh = unit_square(6, &[Edge::Left, Edge::Top]);
    let mut loads = Loads::transverse(0.8);
    loads.f[1] = Polynomial::monomial(0.5, [0, 1, 0]);
    let thin = solve_dirichlet_thin(&e5, &loads, &mesh).unwrap();
    let comp = solve_dirichlet_comparable(&e6, &loads, &mesh, FlexionPiezoRow::AsPrinted).unwrap();
    assert!(thin.max_difference(&comp) < 1e-8, "{}", thin.max_difference(&comp));
    loads.phi_c = Polynomial::monomial(1.0, [2, 0, 0]).add(&Polynomial::monomial(0.5, [1, 1, 0]));
    let thin = solve_dirichlet_thin(&e5, &loads, &mesh).unwrap();
    let comp = solve_dirichlet_comparable(&e6, &loads, &mesh, FlexionPiezoRow::FlexionBlock).unwrap();
    assert_energy_identity(&comp);
    assert!(thin.max_difference(&comp) < 1e-8, "{}", thin.max_difference(&comp));
    // The printed reading loads the flexion row with d_MM3 φ_c.
    let printed = solve_dirichlet_comparable(&e6, &loads, &mesh, FlexionPiezoRow::AsPrinted).unwrap();
    assert!(thin.max_difference(&printed) > 1e-3);
    assert_eq!(printed.membrane.len(), comp.membrane.len());
}

#[test]
fn comparable_mixed_matches_thin_for_constant_coefficients() {
    let (e5, e6) = (piezo_thin(), constant_comparable());
    let mesh = unit_square(6, &[Edge::Bottom]);
    let loads = mixed_loads();
    let g = 0.4;
    let thin = solve_local_mixed_thin(&e5, g, &loads, &mesh).unwrap();
    let comp = solve_mixed_comparable(&e6, g, 0.0, &loads, &mesh).unwrap();
    assert_energy_identity(&comp);
    assert!(thin.max_difference(&comp) < 1e-8, "{}", thin.max_difference(&comp));
    let thin = solve_nonlocal_mixed_thin(&e5, g, 0.05, &loads, &mesh).unwrap();
    let comp = solve_mixed_comparable(&e6, g, 0.05, &loads, &mesh).unwrap();
    assert!(thin.max_difference(&comp) < 1e-8, "{}", thin.max_difference(&comp));
}

fn small_poly() -> impl Strategy<Value = Polynomial> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| {
        Polynomial::constant(a).add(&Polynomial::monomial(b, [1, 0, 0])).add(&Polynomial::monomial(c, [0, 1, 1]))
    })
}

fn loads_strategy(electric_dirichlet: bool) -> impl Strategy<Value = Loads> {
    (prop::array::uniform3(small_poly()), prop::array::uniform3(small_poly()), small_poly()).prop_map(
        move |(f, g, e)| {
            let mut l = Loads { f, g_top: g.clone(), g_edge: g, ..Loads::default() };
            if electric_dirichlet {
                l.phi_c = e;
            } else {
                l.h = e;
            }
            l
        },
    )
}

fn combined_error(a: &PlateSolution, b: &PlateSolution, c: &PlateSolution, s: f64, t: f64) -> f64 {
    let d = |x: &[f64], y: &[f64], z: &[f64]| {
        x.iter().zip(y).zip(z).fold(0.0f64, |m, ((x, y), z)| m.max((s * x + t * y - z).abs()))
    };
    let scale = c.membrane.iter().chain(&c.deflection).chain(&c.voltage).fold(1.0f64, |m, v| m.max(v.abs()));
    d(&a.membrane, &b.membrane, &c.membrane)
        .max(d(&a.deflection, &b.deflection, &c.deflection))
        .max(d(&a.voltage, &b.voltage, &c.voltage))
        / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dirichlet_superposition(a in loads_strategy(true), b in loads_strategy(true), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let e5 = piezo_thin();
        let mesh = unit_square(4, &[Edge::Left]);
        let sol = |l: &Loads| solve_dirichlet_thin(&e5, l, &mesh).unwrap();
        let (sa, sb) = (sol(&a), sol(&b));
        let sc = sol(&a.scaled(s).add(&b.scaled(t)));
        assert_energy_identity(&sc);
        prop_assert!(combined_error(&sa, &sb, &sc, s, t) < 1e-10);
    }

    #[test]
    fn nonlocal_superposition(a in loads_strategy(false), b in loads_strategy(false), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        let e5 = piezo_thin();
        let mesh = unit_square(4, &[Edge::Right, Edge::Top]);
        let sol = |l: &Loads| solve_nonlocal_mixed_thin(&e5, 0.3, 0.02, l, &mesh).unwrap();
        let (sa, sb) = (sol(&a), sol(&b));
        let sc = sol(&a.scaled(s).add(&b.scaled(t)));
        assert_energy_identity(&sc);
        prop_assert!(combined_error(&sa, &sb, &sc, s, t) < 1e-10);
    }
}
