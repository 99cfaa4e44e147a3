mod common;

use fdhbf::beamforming::{algorithm1_digital_precoder, assemble_block_diagonal};
use fdhbf::canceller::{analog_si, enumerate_routings, CancellerConfig, TapImpairments};
use fdhbf::channel::{steering_vector, ArrayGeometry};
use fdhbf::codebook::BeamCodebook;
use fdhbf::numerics::{log2_det_hpd, svd, waterfill};
use fdhbf::CMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        CMatrix::from_vec(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
            .unwrap()
    })
}

fn shaped() -> impl Strategy<Value = CMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| matrix(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn svd_reconstructs_and_orders(m in shaped()) {
        let s = svd(&m).unwrap();
        prop_assert!((&s.reconstruct() - &m).frobenius_norm() < 1e-10);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        let vv = s.right_vectors.adjoint_mul(&s.right_vectors);
        prop_assert!((&vv - &CMatrix::identity(m.cols())).max_abs() < 1e-10);
        let uu = s.left_vectors.adjoint_mul(&s.left_vectors);
        prop_assert!((&uu - &CMatrix::identity(m.rows())).max_abs() < 1e-10);
    }

    #[test]
    fn waterfill_kkt(gains in prop::collection::vec(1e-3f64..1e3, 1..6), power in 1e-3f64..1e3) {
        let wf = waterfill(&gains, power).unwrap();
        let total: f64 = wf.powers.iter().sum();
        prop_assert!((total - power).abs() <= 1e-9 * power);
        for (g, p) in gains.iter().zip(&wf.powers) {
            prop_assert!(*p >= 0.0);
            if *p > 0.0 {
                prop_assert!((p + 1.0 / g - wf.water_level).abs() <= 1e-9 * wf.water_level);
            } else {
                prop_assert!(1.0 / g >= wf.water_level * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn log_det_of_gram_is_sum_of_log_singular_values(m in (1usize..5).prop_flat_map(|n| matrix(n, n))) {
        let mut g = m.adjoint_mul(&m);
        g.add_diagonal(1.0);
        let ld = log2_det_hpd(&g).unwrap().log2;
        let sv: f64 = svd(&m).unwrap().singular_values.iter().map(|s| (1.0 + s * s).log2()).sum();
        prop_assert!((ld - sv).abs() < 1e-9);
    }

    #[test]
    fn steering_vectors_have_unit_norm(n in 1usize..1025, spacing in 0.1f64..2.0, angle in -3.2f64..3.2) {
        let g = ArrayGeometry::ula(n, spacing).unwrap();
        let a: Vec<Complex64> = steering_vector(&g, angle);
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analog_beamformer_structure(n_a in 1usize..9, idx in prop::collection::vec(0usize..64, 1..5)) {
        let cb = BeamCodebook::<f64>::dft(n_a).unwrap();
        let beams: Vec<Vec<Complex64>> = idx.iter().map(|&i| cb.beam(i % n_a).to_vec()).collect();
        let v = assemble_block_diagonal(&beams).unwrap();
        for r in 0..v.rows() {
            for c in 0..v.cols() {
                let z = v[(r, c)];
                if r / n_a == c {
                    prop_assert!((z.norm_sqr() - 1.0 / n_a as f64).abs() < 1e-12);
                } else {
                    prop_assert_eq!(z, Complex64::new(0.0, 0.0));
                }
            }
            prop_assert!(v.row(r).iter().filter(|z| z.norm() > 0.0).count() == 1);
        }
    }

    #[test]
    fn ideal_taps_null_routed_entries(si in matrix(2, 4), n_taps in 0usize..=8, pick in 0usize..1000) {
        let routings = enumerate_routings(4, 2, n_taps).unwrap();
        let routing = routings[pick % routings.len()].clone();
        let c = CancellerConfig::realize(routing.clone(), &si, TapImpairments::ideal()).unwrap();
        let h = &si + &c.c;
        for t in routing.taps() {
            prop_assert_eq!(h[(t.rx, t.tx)], Complex64::new(0.0, 0.0));
        }
        for rx in 0..2 {
            for tx in 0..4 {
                if !routing.taps().iter().any(|t| t.rx == rx && t.tx == tx) {
                    prop_assert_eq!(h[(rx, tx)], si[(rx, tx)]);
                }
            }
        }
    }

    #[test]
    fn quantized_taps_stay_within_bound(
        si in matrix(2, 4),
        step in 0.01f64..2.0,
        bits in 1u32..14,
    ) {
        let imp = TapImpairments::quantized(step, bits);
        let c = CancellerConfig::realize(
            enumerate_routings(4, 2, 8).unwrap().remove(0),
            &si,
            imp,
        )
        .unwrap();
        let h = &si + &c.c;
        let bound = imp.relative_error_bound();
        for rx in 0..2 {
            for tx in 0..4 {
                prop_assert!(h[(rx, tx)].norm() <= si[(rx, tx)].norm() * bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn feasible_precoders_meet_budgets(
        h_tilde in matrix(2, 4),
        h_eff in matrix(4, 4),
        p_exp in -1.0f64..2.0,
        rho_exp in -12.0f64..0.0,
    ) {
        let p = 10f64.powf(p_exp);
        let rho = 10f64.powf(rho_exp);
        let d = algorithm1_digital_precoder(&h_tilde, &h_eff, p, rho, 1e-2, 4).unwrap();
        prop_assert!((d.v_bb.frobenius_norm_sqr() - p).abs() <= 1e-9 * p);
        if d.feasible {
            prop_assert!(d.max_residual_si <= rho);
            prop_assert!(common::worst_row_power(&h_tilde, &d.v_bb) <= rho * (1.0 + 1e-9));
        }
        // 2x4 always leaves a two-dimensional null space.
        prop_assert!(d.alpha >= 2 && d.feasible);
    }

    #[test]
    fn analog_si_matches_dense_product(h in matrix(4, 8), t0 in 0usize..4, t1 in 0usize..4, r0 in 0usize..2, r1 in 0usize..2) {
        let cb_tx = BeamCodebook::<f64>::dft(4).unwrap();
        let cb_rx = BeamCodebook::<f64>::dft(2).unwrap();
        let v = assemble_block_diagonal(&[cb_tx.beam(t0).to_vec(), cb_tx.beam(t1).to_vec()]).unwrap();
        let u = assemble_block_diagonal(&[cb_rx.beam(r0).to_vec(), cb_rx.beam(r1).to_vec()]).unwrap();
        let s = analog_si(&u, &h, &v).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut z = Complex64::new(0.0, 0.0);
                for a in 0..4 {
                    for b in 0..8 {
                        z += u[(a, i)].conj() * h[(a, b)] * v[(b, j)];
                    }
                }
                prop_assert!((s[(i, j)] - z).norm() < 1e-12);
            }
        }
    }
}

/// Refining both hardware grids (halving the dB step, adding a phase bit)
/// lowers the average residual over many routed entries, and every entry
/// respects the finer bound.
#[test]
fn finer_impairments_reduce_residual_on_average() {
    let mut r = common::rng(21);
    let routing = enumerate_routings(4, 2, 8).unwrap().remove(0);
    let levels = [(1.0, 4), (0.5, 5), (0.25, 6), (0.125, 7)];
    let mut totals = vec![0.0; levels.len()];
    for _ in 0..500 {
        let si = common::random_matrix(2, 4, 1.0, &mut r);
        for (k, &(step, bits)) in levels.iter().enumerate() {
            let imp = TapImpairments::quantized(step, bits);
            let c = CancellerConfig::realize(routing.clone(), &si, imp).unwrap();
            let h = &si + &c.c;
            for rx in 0..2 {
                for tx in 0..4 {
                    let rel = h[(rx, tx)].norm() / si[(rx, tx)].norm();
                    assert!(rel <= imp.relative_error_bound() * (1.0 + 1e-9));
                    totals[k] += rel;
                }
            }
        }
    }
    assert!(totals.windows(2).all(|w| w[1] < w[0]), "{totals:?}");
}
