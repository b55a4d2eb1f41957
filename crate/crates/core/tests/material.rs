use piezoplate_core::cell2d::EffectiveTensorsThin;
use piezoplate_core::material::*;
use proptest::prelude::*;
use std::time::Instant;

type Mat3 = [[f64; 3]; 3];

fn sym3() -> impl Strategy<Value = Mat3> {
    prop::array::uniform6(-1.0..1.0f64).prop_map(|v| [[v[0], v[5], v[4]], [v[5], v[1], v[3]], [v[4], v[3], v[2]]])
}

/// Voigt stiffness `A Aᵀ + I/2`.
fn elastic() -> impl Strategy<Value = ElasticTensor> {
    prop::array::uniform32(-1.0..1.0f64).prop_map(|a| {
        let mut c = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                c[i][j] = (0..5).map(|k| a[(6 * i + k) % 32] * a[(6 * j + k) % 32]).sum::<f64>();
            }
            c[i][i] += 0.5;
        }
        let mut up = [0.0; 21];
        let mut n = 0;
        for i in 0..6 {
            for j in i..6 {
                up[n] = c[i][j];
                n += 1;
            }
        }
        ElasticTensor::from_voigt(&up)
    })
}

fn piezo() -> impl Strategy<Value = PiezoTensor> {
    prop::array::uniform18(-2.0..2.0f64).prop_map(|d| PiezoTensor::from_voigt(&d))
}

fn permittivity() -> impl Strategy<Value = PermittivityTensor> {
    prop::array::uniform9(-1.0..1.0f64).prop_map(|a| {
        let mut c = [0.0; 6];
        let idx = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
        for (k, (i, j)) in idx.iter().enumerate() {
            c[k] = (0..3).map(|m| a[3 * i + m] * a[3 * j + m]).sum::<f64>() + if i == j { 0.3 } else { 0.0 };
        }
        PermittivityTensor::from_voigt(&c)
    })
}

fn energy_oracle(r: &ElasticTensor, c: &PermittivityTensor, s: &Mat3, l: &[f64; 3]) -> f64 {
    let mut e = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    e += r.0[i][j][k][m] * s[k][m] * s[i][j];
                }
            }
            e += c.0[i][j] * l[i] * l[j];
        }
    }
    e
}

/// Elastic energy minimized over the transverse strain components.
fn plane_energy(r: &ElasticTensor, k: &[[f64; 2]; 2]) -> f64 {
    let basis = |t: usize| -> Mat3 {
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
    let bil = |x: &Mat3, y: &Mat3| energy_oracle_bilinear(r, x, y);
    let m: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| bil(&basis(i), &basis(j))));
    let rhs: [f64; 3] = std::array::from_fn(|i| -bil(&basis(i), &s0));
    let det = |m: &Mat3| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let mut s = s0;
    for t in 0..3 {
        let mut mt = m;
        for i in 0..3 {
            mt[i][t] = rhs[i];
        }
        let x = det(&mt) / d;
        let b = basis(t);
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += x * b[i][j];
            }
        }
    }
    bil(&s, &s)
}

fn energy_oracle_bilinear(r: &ElasticTensor, x: &Mat3, y: &Mat3) -> f64 {
    let mut e = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    e += r.0[i][j][k][m] * x[i][j] * y[k][m];
                }
            }
        }
    }
    e
}

fn contract(r: &Tensor4, k: &[[f64; 2]; 2]) -> f64 {
    let kv = [k[0][0], k[0][1], k[1][0], k[1][1]];
    (0..4).flat_map(|p| (0..4).map(move |q| (p, q))).map(|(p, q)| kv[p] * r[p][q] * kv[q]).sum()
}

#[test]
fn isotropic_condensation_matches_schur_oracle() {
    let m = Material {
        elastic: ElasticTensor::isotropic(1.0, 1.0),
        piezo: PiezoTensor::zero(),
        permittivity: PermittivityTensor::identity(),
    };
    let g = m.global_tensor().unwrap();
    let start = Instant::now();
    let ct = condense(&g, 0.0).unwrap();
    let elapsed = start.elapsed();
    let rn = ct.r_n_inplane();
    let e11 = [[1.0, 0.0], [0.0, 0.0]];
    let e12 = [[0.0, 0.5], [0.5, 0.0]];
    let e11_22 = [[1.0, 0.0], [0.0, 1.0]];
    let o1111 = plane_energy(&m.elastic, &e11);
    let o1212 = plane_energy(&m.elastic, &e12);
    let o1122 = 0.5 * (plane_energy(&m.elastic, &e11_22) - 2.0 * o1111);
    assert!((o1111 - 8.0 / 3.0).abs() < 1e-14 && (o1122 - 2.0 / 3.0).abs() < 1e-14 && (o1212 - 1.0).abs() < 1e-14);
    assert!((rn[0][0] - o1111).abs() < 1e-12);
    assert!((rn[0][3] - o1122).abs() < 1e-12);
    assert!((rn[1][1] - o1212).abs() < 1e-12);
    assert!((ct.c_m33() - 1.0).abs() < 1e-12);
    assert!(elapsed.as_secs_f64() < 1e-3, "{elapsed:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn packed_energy_cancels_piezo_terms(r in elastic(), d in piezo(), c in permittivity(), s in sym3(), l in prop::array::uniform3(-1.0..1.0f64)) {
        let g = assemble_global_tensor(&r, &d, &c).unwrap();
        let q = g.quadratic_form(&MVector::from_strain_field(&s, &l));
        let oracle = energy_oracle(&r, &c, &s, &l);
        prop_assert!((q - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{} vs {}", q, oracle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn elastic_condensation_minimizes_energy(r in elastic(), k in prop::array::uniform3(-1.0..1.0f64)) {
        let g = assemble_global_tensor(&r, &PiezoTensor::zero(), &PermittivityTensor::zero()).unwrap();
        let ct = condense(&g, 0.0).unwrap();
        let kk = [[k[0], k[2]], [k[2], k[1]]];
        let oracle = plane_energy(&r, &kk);
        prop_assert!((contract(&ct.r_n_inplane(), &kk) - oracle).abs() < 1e-10 * oracle.max(1.0));
        prop_assert!((contract(&ct.r_m_inplane(), &kk) - oracle).abs() < 1e-10 * oracle.max(1.0));
    }

    #[test]
    fn local_reduction_is_coercive_and_monotone(r in elastic(), d in piezo(), c in permittivity(), k in prop::array::uniform3(-1.0..1.0f64), vol in 0.05..1.0f64) {
        let g = assemble_global_tensor(&r, &d, &c).unwrap();
        let ct = condense(&g, 0.0).unwrap();
        let e5 = EffectiveTensorsThin {
            r_n_h: ct.r_n_inplane(),
            r_m_h: ct.r_m_inplane(),
            d_m3_h: ct.d_m(),
            e_m3_h: ct.d_m_lower(),
            c_m33_h: ct.c_m33(),
            vol_y1: vol,
        };
        let kk = [[k[0], k[2]], [k[2], k[1]]];
        let base = contract(&e5.r_m_h, &kk);
        let mut last = f64::INFINITY;
        for gg in [0.0, 0.1, 1.0, 10.0, 1e3] {
            let rl = local_reduction(&e5, gg).unwrap();
            let v = contract(&rl, &kk);
            prop_assert!(v >= base - 1e-12 && v > 0.0);
            prop_assert!(v <= last + 1e-12);
            last = v;
        }
    }
}

#[test]
fn negative_circuit_denominator_is_rejected() {
    let mut e5 = EffectiveTensorsThin::zero();
    e5.c_m33_h = 1.0;
    e5.vol_y1 = 0.5;
    assert!(local_reduction(&e5, -1.0).is_err());
}
