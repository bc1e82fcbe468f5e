mod common;

use cartan_symmetry::cartan::{
    cartan_connection_eval, frame_lift, lie_derivative_cartan, sample_frames, tangency_residual,
    tangent_basis, FramePoint, TotalSpace,
};
use cartan_symmetry::catalog;
use cartan_symmetry::geometry::{GeometryKind, GeometrySpec};
use cartan_symmetry::jet::jet_matrix_inverse;
use cartan_symmetry::Error;
use common::*;
use proptest::prelude::*;

fn cartan_geometries() -> Vec<&'static catalog::GeometryEntry> {
    catalog::builtin()
        .geometries
        .iter()
        .filter(|g| g.spec.kind().has_cartan_model())
        .collect()
}

fn frames_at(geom: &GeometrySpec, point: usize, count: usize, seed: u64) -> Vec<FramePoint> {
    let x = geom
        .chart()
        .sample_points(point + 1, seed)
        .unwrap()
        .swap_remove(point);
    sample_frames(geom.metric(), &x, count, seed).unwrap()
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    (0..n * n)
        .map(|k| (0..n).map(|m| a[(k / n) * n + m] * b[m * n + k % n]).sum())
        .collect()
}

/// Push-forward of a total-space vector under `f ↦ f·h`.
fn push_right(v: &[f64], h: &[f64], n: usize) -> Vec<f64> {
    let space = TotalSpace { n };
    let mut out = v.to_vec();
    for mu in 0..n {
        for a in 0..n {
            out[space.f(mu, a)] = (0..n).map(|b| v[space.f(mu, b)] * h[b * n + a]).sum();
        }
    }
    out
}

fn probe_vectors(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let big = TotalSpace { n }.dim();
    (0..4).map(|k| random_point(seed, k, big)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cartan_connection_is_right_equivariant(g in 0usize..100, point in 0usize..8, seed in 0u64..1000) {
        let geoms = cartan_geometries();
        let entry = geoms[g % geoms.len()];
        let frames = frames_at(&entry.spec, point, 2, seed);
        let (p, q) = (&frames[0], &frames[1]);
        let n = p.dim();
        // h = f_p⁻¹ f_q, so that p·h = q and h lies in the structure group.
        let h = mat_mul(&jet_matrix_inverse(&p.frame, n).unwrap(), &q.frame, n);
        let hinv = jet_matrix_inverse(&h, n).unwrap();
        let ph = p.act(&h);
        let at_p = cartan_connection_eval(&entry.spec, p).unwrap();
        let at_ph = cartan_connection_eval(&entry.spec, &ph).unwrap();
        for v in probe_vectors(n, seed) {
            let (e0, w0) = at_p.apply(&v);
            let (e1, w1) = at_ph.apply(&push_right(&v, &h, n));
            for a in 0..n {
                let want: f64 = (0..n).map(|b| hinv[a * n + b] * e0[b]).sum();
                prop_assert!((e1[a] - want).abs() < 1e-9 * (1.0 + want.abs()), "{}: e", entry.name);
            }
            let want = mat_mul(&mat_mul(&hinv, &w0, n), &h, n);
            for (got, want) in w1.iter().zip(&want) {
                prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{}: ω", entry.name);
            }
        }
    }

    #[test]
    fn solder_part_has_no_fibre_components(g in 0usize..100, point in 0usize..8, seed in 0u64..1000) {
        let geoms = cartan_geometries();
        let entry = geoms[g % geoms.len()];
        let p = &frames_at(&entry.spec, point, 1, seed)[0];
        let n = p.dim();
        let space = TotalSpace { n };
        let value = cartan_connection_eval(&entry.spec, p).unwrap();
        let finv = jet_matrix_inverse(&p.frame, n).unwrap();
        for (a, row) in value.e_part.iter().enumerate() {
            for mu in 0..n {
                prop_assert!((row[space.x(mu)].value - finv[a * n + mu]).abs() < 1e-12);
                for b in 0..n {
                    prop_assert_eq!(row[space.f(mu, b)].value, 0.0);
                }
            }
        }
    }

    #[test]
    fn lift_projects_to_the_field_and_is_linear(
        pair in 0usize..1000,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        seed in 0u64..1000,
    ) {
        let pairs = catalog::builtin().matrix_pairs();
        let (g, v1) = pairs[pair % pairs.len()];
        let same: Vec<_> = pairs.iter().filter(|(h, _)| h.name == g.name).collect();
        let v2 = same[(pair / pairs.len()) % same.len()].1;
        let x1 = v1.bind(g.spec.chart()).unwrap();
        let x2 = v2.bind(g.spec.chart()).unwrap();
        let combo = x1.combine(a, &x2, b).unwrap();
        let p = &frames_at(&g.spec, 0, 1, seed)[0];
        let n = p.dim();
        let base: Vec<f64> = x1.eval(&p.x).unwrap().iter().map(|j| j.value).collect();
        let l1 = frame_lift(&x1, p).unwrap();
        let l2 = frame_lift(&x2, p).unwrap();
        let lc = frame_lift(&combo, p).unwrap();
        for mu in 0..n {
            prop_assert_eq!(l1[mu].value, base[mu]);
        }
        for ((c, u), w) in lc.iter().zip(&l1).zip(&l2) {
            let want = a * u.value + b * w.value;
            prop_assert!((c.value - want).abs() < 1e-12 * (1.0 + want.abs()));
            for ((cg, ug), wg) in c.grad.iter().zip(&u.grad).zip(&w.grad) {
                let want = a * ug + b * wg;
                prop_assert!((cg - want).abs() < 1e-12 * (1.0 + want.abs()));
            }
        }
    }
}

#[test]
fn connection_is_lorentz_valued_on_the_orthonormal_bundle() {
    for entry in cartan_geometries() {
        let Some(g) = entry.spec.metric() else {
            continue;
        };
        let eta = g.signature().eta(g.dim());
        let n = g.dim();
        for point in 0..5 {
            for p in frames_at(&entry.spec, point, 3, 7) {
                let value = cartan_connection_eval(&entry.spec, &p).unwrap();
                let basis = tangent_basis(&entry.spec, &p).unwrap();
                assert_eq!(basis.len(), n + n * (n - 1) / 2);
                for v in basis {
                    let (_, w) = value.apply(&v);
                    for a in 0..n {
                        for b in 0..n {
                            let r = eta[a] * w[a * n + b] + eta[b] * w[b * n + a];
                            assert!(r.abs() < 1e-10, "{}: {r:e}", entry.name);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn tangent_basis_of_poincare_model_is_tangent_to_the_bundle() {
    for entry in cartan_geometries() {
        let Some(g) = entry.spec.metric() else {
            continue;
        };
        let n = g.dim();
        let space = TotalSpace { n };
        for p in frames_at(&entry.spec, 1, 3, 9) {
            for v in tangent_basis(&entry.spec, &p).unwrap() {
                // d/ds of g(x + s δx)(f + s δf, f + s δf) at s = 0, by central differences.
                let at = |s: f64| {
                    let x: Vec<f64> = (0..n).map(|m| p.x[m] + s * v[space.x(m)]).collect();
                    let frame: Vec<f64> = (0..n * n)
                        .map(|k| p.frame[k] + s * v[space.f(k / n, k % n)])
                        .collect();
                    let gv = g.eval_values(&x).unwrap();
                    (0..n * n)
                        .map(|k| {
                            let (a, b) = (k / n, k % n);
                            let mut acc = 0.0;
                            for mu in 0..n {
                                for nu in 0..n {
                                    acc += gv[mu * n + nu] * frame[mu * n + a] * frame[nu * n + b];
                                }
                            }
                            acc
                        })
                        .collect::<Vec<f64>>()
                };
                let d: Vec<f64> = (0..n * n)
                    .map(|k| richardson(|h| (at(h)[k] - at(-h)[k]) / (2.0 * h), 1e-3))
                    .collect();
                let worst = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(worst < 1e-8, "{}: {worst:e}", entry.name);
            }
        }
    }
}

#[test]
fn killing_lifts_are_tangent_and_dilations_are_not() {
    let mink = common::geometry("minkowski4");
    let g = mink.spec.metric().unwrap();
    for p in frames_at(&mink.spec, 2, 4, 1) {
        for name in ["trans_t", "rot_xy", "boost_tz"] {
            let xi = vector(name).bind(mink.spec.chart()).unwrap();
            let r = tangency_residual(g, &xi, &p).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-12), "{name}");
        }
        let xi = vector("dilation").bind(mink.spec.chart()).unwrap();
        let r = tangency_residual(g, &xi, &p).unwrap();
        assert!(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 0.1);
    }
}

#[test]
fn off_bundle_frames_are_rejected_for_metric_geometries() {
    let mink = common::geometry("minkowski4");
    let mut frame = vec![0.0; 16];
    for k in 0..4 {
        frame[k * 5] = 2.0;
    }
    let p = FramePoint::new(vec![0.0; 4], frame).unwrap();
    assert!(matches!(
        cartan_connection_eval(&mink.spec, &p),
        Err(Error::NotOnBundle { .. })
    ));
}

#[test]
fn lie_derivative_of_affine_cartan_connection_matches_differences() {
    let h = 1e-3;
    for entry in cartan_geometries() {
        if entry.spec.kind() != GeometryKind::Affine {
            continue;
        }
        let n = entry.spec.chart().dim();
        let space = TotalSpace { n };
        let big = space.dim();
        let components = |p: &FramePoint| -> Vec<Vec<f64>> {
            cartan_connection_eval(&entry.spec, p)
                .unwrap()
                .components()
                .map(|row| row.iter().map(|c| c.value).collect())
                .collect()
        };
        let shift = |p: &FramePoint, dir: &[f64], s: f64| FramePoint {
            x: (0..n).map(|m| p.x[m] + s * dir[space.x(m)]).collect(),
            frame: (0..n * n)
                .map(|k| p.frame[k] + s * dir[space.f(k / n, k % n)])
                .collect(),
        };
        for v in catalog::builtin().vectors_for(&entry.spec) {
            let xi = v.bind(entry.spec.chart()).unwrap();
            for p in frames_at(&entry.spec, 0, 2, 3) {
                let lift: Vec<f64> = frame_lift(&xi, &p)
                    .unwrap()
                    .iter()
                    .map(|c| c.value)
                    .collect();
                let lift_at = |q: &FramePoint| -> Vec<f64> {
                    frame_lift(&xi, q)
                        .unwrap()
                        .iter()
                        .map(|c| c.value)
                        .collect()
                };
                let fd = |f: &dyn Fn(f64) -> Vec<f64>, k: usize| {
                    richardson(|s| (f(s)[k] - f(-s)[k]) / (2.0 * s), h)
                };
                let a0 = components(&p);
                // X(A_J): derivative of A along the lift.
                let along = |s: f64| -> Vec<f64> { components(&shift(&p, &lift, s)).concat() };
                // ∂_J X^I for every coordinate direction J.
                let dlift: Vec<Vec<f64>> = (0..big)
                    .map(|j| {
                        let dir: Vec<f64> =
                            (0..big).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
                        let f = |s: f64| lift_at(&shift(&p, &dir, s));
                        (0..big).map(|i| fd(&f, i)).collect()
                    })
                    .collect();
                let lie = lie_derivative_cartan(&entry.spec, &xi, &p).unwrap();
                let scale = a0.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
                for (row, (comp, a)) in lie.rows.iter().zip(&a0).enumerate() {
                    for j in 0..big {
                        let transport = fd(&along, row * big + j);
                        let twist: f64 = (0..big).map(|i| a[i] * dlift[j][i]).sum();
                        let want = transport + twist;
                        assert!(
                            (comp[j] - want).abs() / scale < 1e-6,
                            "{}/{}: component {row}, slot {j}: {} vs {want}",
                            entry.name,
                            v.name,
                            comp[j]
                        );
                    }
                }
            }
        }
    }
}
