mod common;

use std::sync::Arc;

use common::{max_abs_diff, max_abs_diff_real, random_real_probe, rng, ProductSpace};
use multiphase::baselines::{
    allocation_objective, equal_split, ie_optimal, se_asymptotic, single_phase_bound,
};
use multiphase::cq_bounds::{
    bound_total_variance, cq_matrix, diagonalizing_delta, optimize_delta, DeltaGauge,
};
use multiphase::exact_qfi::{qfi_mixed, qfi_pure, sld_and_residual};
use multiphase::fock::{build_basis, moments, BasisKind, NumberMoments};
use multiphase::linalg::min_eigenvalue;
use multiphase::loss_channel::{apply_loss, apply_loss_with_phases, DensityOperator, LossChannel};
use multiphase::probes::{generalized_noon, ie_two_mode};
use multiphase::PureState;
use nalgebra::DMatrix;
use rand::Rng;

fn probes(seed: u64, d: usize, n: u32, count: usize) -> Vec<PureState> {
    let mut r = rng(seed);
    let mut out = vec![generalized_noon(d as u32, n)];
    out.extend((0..count).map(|_| random_real_probe(&mut r, d, n)));
    out
}

#[test]
fn moments_match_dense_sums() {
    let mut r = rng(1);
    for d in 1..=3usize {
        for n in 1..=4u32 {
            let probe = random_real_probe(&mut r, d, n);
            let basis = build_basis(d + 1, n, BasisKind::FixedTotal);
            let v = probe.to_dense(&basis).unwrap();
            for i in 1..=d {
                let ni = basis.number_diagonal(i).unwrap();
                for j in 1..=d {
                    let nj = basis.number_diagonal(j).unwrap();
                    let mut mean = 0.0;
                    let mut second = 0.0;
                    for k in 0..basis.len() {
                        mean += v[k].norm_sqr() * ni[k];
                        second += v[k].norm_sqr() * ni[k] * nj[k];
                    }
                    let m = moments(&probe, i, j).unwrap();
                    assert!((m.mean_i - mean).abs() < 1e-12);
                    assert!((m.second_ij - second).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn loss_matches_kronecker_kraus_oracle() {
    let mut r = rng(2);
    for (d, n) in [(1usize, 4u32), (2, 3), (2, 4)] {
        let probe = random_real_probe(&mut r, d, n);
        let space = ProductSpace { modes: d + 1, cap: n };
        let v = space.ket(&probe);
        for eta in [0.0, 0.3, 0.9, 1.0] {
            let etas = vec![eta; d + 1];
            let oracle = space.restrict(&space.lose(&(&v * v.adjoint()), &etas), n);
            let rho = apply_loss(&probe, &LossChannel::uniform(d + 1, eta, n).unwrap()).unwrap();
            assert!(max_abs_diff(rho.matrix(), oracle.matrix()) < 1e-13, "d={d} eta={eta}");
        }
    }
}

#[test]
fn loss_preserves_trace_and_positivity() {
    let mut r = rng(3);
    for _ in 0..10 {
        let probe = random_real_probe(&mut r, 2, 4);
        for eta in [0.0, 0.3, 0.9, 1.0] {
            let rho = apply_loss(&probe, &LossChannel::uniform(3, eta, 4).unwrap()).unwrap();
            rho.validate(1e-12).unwrap();
        }
    }
}

#[test]
fn loss_composes_multiplicatively() {
    let mut r = rng(4);
    let probe = random_real_probe(&mut r, 2, 3);
    let space = ProductSpace { modes: 3, cap: 3 };
    let v = space.ket(&probe);
    let rho0 = &v * v.adjoint();
    for (e1, e2) in [(0.5, 0.8), (0.9, 0.3), (1.0, 0.6)] {
        let twice = space.lose(&space.lose(&rho0, &[e1; 3]), &[e2; 3]);
        let once = space.lose(&rho0, &[e1 * e2; 3]);
        assert!(max_abs_diff(&twice, &once) < 1e-13);
        let direct = apply_loss(&probe, &LossChannel::uniform(3, e1 * e2, 3).unwrap()).unwrap();
        assert!(max_abs_diff(space.restrict(&twice, 3).matrix(), direct.matrix()) < 1e-13);
    }
}

#[test]
fn phases_commute_with_loss() {
    let mut r = rng(5);
    let probe = random_real_probe(&mut r, 2, 4);
    let channel = LossChannel::new(vec![0.8, 0.6, 0.9], 4).unwrap();
    let base = apply_loss(&probe, &channel).unwrap();
    for _ in 0..5 {
        let theta = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let inside = apply_loss_with_phases(&probe, &channel, &theta).unwrap();
        let outside = base.rotated(&theta).unwrap();
        assert!(max_abs_diff(inside.matrix(), outside.matrix()) < 1e-12);
    }
}

#[test]
fn lossless_cq_equals_pure_qfi() {
    for probe in probes(6, 2, 4, 5).iter().chain(probes(7, 3, 3, 5).iter()) {
        let d = probe.phases();
        let pure = qfi_pure(probe);
        for delta in [-0.5, 0.0, 3.0] {
            let b = cq_matrix(probe, &vec![1.0; d], &DeltaGauge::uniform(d, delta).unwrap()).unwrap();
            assert!(max_abs_diff_real(b.matrix(), pure.matrix()) < 1e-12);
        }
        let basis = Arc::new(build_basis(d + 1, probe.max_photons(), BasisKind::AtMostTotal));
        let mixed = qfi_mixed(&DensityOperator::pure(basis, probe).unwrap(), d).unwrap();
        assert!(max_abs_diff_real(mixed.matrix(), pure.matrix()) < 1e-9);
    }
}

#[test]
fn moment_cq_matches_operator_expectations() {
    let mut r = rng(8);
    let probe = random_real_probe(&mut r, 2, 4);
    let basis = build_basis(3, 4, BasisKind::FixedTotal);
    let v = probe.to_dense(&basis).unwrap();
    let p: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
    let n: Vec<Vec<f64>> = (1..=2).map(|i| basis.number_diagonal(i).unwrap()).collect();
    let expect = |f: &dyn Fn(usize) -> f64| (0..basis.len()).map(|k| p[k] * f(k)).sum::<f64>();
    let eta = [0.7, 0.85];
    let delta = [1.5, 4.0];
    let b = cq_matrix(&probe, &eta, &DeltaGauge::new(delta.to_vec()).unwrap()).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let ai = 1.0 - (1.0 + delta[i]) * (1.0 - eta[i]);
            let aj = 1.0 - (1.0 + delta[j]) * (1.0 - eta[j]);
            let mi = expect(&|k| n[i][k]);
            let mj = expect(&|k| n[j][k]);
            let cov = expect(&|k| n[i][k] * n[j][k]) - mi * mj;
            let mut want = 4.0 * ai * aj * cov;
            if i == j {
                want += 4.0 * (1.0 + delta[i]).powi(2) * eta[i] * (1.0 - eta[i]) * mi;
            }
            assert!((b.matrix()[(i, j)] - want).abs() < 1e-12);
        }
    }
}

#[test]
fn diagonal_gauge_removes_correlations() {
    for probe in probes(9, 3, 3, 5) {
        for eta in [0.3, 0.5, 0.9] {
            let delta = DeltaGauge::uniform(3, diagonalizing_delta(eta).unwrap()).unwrap();
            let b = cq_matrix(&probe, &[eta; 3], &delta).unwrap();
            let m = NumberMoments::of(&probe);
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(b.matrix()[(i, j)].abs() < 1e-12);
                    }
                }
                let want = (1.0 - eta) / (4.0 * eta) / m.mean[i];
                assert!((1.0 / b.matrix()[(i, i)] - want).abs() < 1e-12 * want);
            }
        }
    }
}

#[test]
fn cq_dominates_exact_qfi() {
    for probe in probes(10, 2, 3, 5) {
        for eta in [0.5, 0.9] {
            let rho = apply_loss(&probe, &LossChannel::new(vec![1.0, eta, eta], 3).unwrap()).unwrap();
            let exact = qfi_mixed(&rho, 2).unwrap();
            let opt = optimize_delta(&probe, &[eta; 2], true).unwrap();
            for delta in [0.0, eta / (1.0 - eta), opt.delta().values()[0]] {
                let b = cq_matrix(&probe, &[eta; 2], &DeltaGauge::uniform(2, delta).unwrap()).unwrap();
                let gap = b.matrix() - exact.matrix();
                assert!(min_eigenvalue(&gap) > -1e-9, "delta={delta}");
            }
        }
    }
}

#[test]
fn exact_qfi_is_phase_covariant() {
    let mut r = rng(11);
    let probe = random_real_probe(&mut r, 2, 3);
    let rho = apply_loss(&probe, &LossChannel::uniform(3, 0.7, 3).unwrap()).unwrap();
    let base = qfi_mixed(&rho, 2).unwrap();
    for _ in 0..4 {
        let theta = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let turned = qfi_mixed(&rho.rotated(&theta).unwrap(), 2).unwrap();
        assert!(max_abs_diff_real(turned.matrix(), base.matrix()) < 1e-9);
    }
}

#[test]
fn exact_qfi_grows_with_transmissivity() {
    for probe in probes(12, 2, 3, 3) {
        let mut previous = 0.0;
        for k in 1..=10 {
            let eta = f64::from(k) / 10.0;
            let rho = apply_loss(&probe, &LossChannel::uniform(3, eta, 3).unwrap()).unwrap();
            let trace = qfi_mixed(&rho, 2).unwrap().matrix().trace();
            assert!(trace >= previous - 1e-9);
            previous = trace;
        }
    }
}

#[test]
fn sld_reproduces_spectral_qfi() {
    for probe in probes(13, 2, 3, 3) {
        let rho = apply_loss(&probe, &LossChannel::uniform(3, 0.6, 3).unwrap()).unwrap();
        let qfi = qfi_mixed(&rho, 2).unwrap();
        let (slds, residual) = sld_and_residual(&rho, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let t = (rho.matrix() * &slds[i] * &slds[j]).trace().re;
                assert!((t - qfi.matrix()[(i, j)]).abs() < 1e-8);
            }
        }
        assert!((residual - qfi.saturation_residual()).abs() < 1e-9);
    }
}

#[test]
fn closed_form_single_phase_matches_optimizer() {
    let mut r = rng(14);
    for m in 1..=6u32 {
        let coeffs: Vec<f64> = (0..=m).map(|_| r.gen_range(0.1..1.0)).collect();
        let probe = ie_two_mode(m, &coeffs).unwrap();
        let nm = NumberMoments::of(&probe);
        for eta in [0.2, 0.5, 0.9] {
            let closed = single_phase_bound(nm.mean[0], nm.variance(0), eta).unwrap();
            let numeric = 1.0 / bound_total_variance(&optimize_delta(&probe, &[eta], true).unwrap()).unwrap();
            assert!((closed - numeric).abs() < 1e-9 * closed, "m={m} eta={eta}");
        }
    }
}

#[test]
fn ie_optimum_beats_simplex_grid() {
    let steps = 24u32;
    for m in 1..=4u32 {
        for eta in [0.3, 0.6, 0.9] {
            let best = ie_optimal(m, eta).unwrap();
            let mut grid = 0.0f64;
            let mut p = vec![0u32; m as usize + 1];
            simplex(&mut p, 0, steps, &mut |p| {
                let w: Vec<f64> = p.iter().map(|&x| f64::from(x) / f64::from(steps)).collect();
                let mean: f64 = w.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
                let second: f64 = w.iter().enumerate().map(|(k, w)| (k * k) as f64 * w).sum();
                if let Ok(c) = single_phase_bound(mean, second - mean * mean, eta) {
                    grid = grid.max(c);
                }
            });
            assert!(best.fisher >= grid - 1e-12);
            assert!(best.fisher <= grid * 1.02);
            let nm = NumberMoments::of(&best.probe);
            let direct = single_phase_bound(nm.mean[0], nm.variance(0), eta).unwrap();
            assert!((direct - best.fisher).abs() < 1e-10 * direct);
        }
    }
}

fn simplex(p: &mut Vec<u32>, k: usize, left: u32, visit: &mut dyn FnMut(&[u32])) {
    if k + 1 == p.len() {
        p[k] = left;
        visit(p);
        return;
    }
    for x in 0..=left {
        p[k] = x;
        simplex(p, k + 1, left - x, visit);
    }
}

#[test]
fn equal_split_is_optimal_by_exhaustion() {
    for d in 2..=4u32 {
        for n in (d..=12).filter(|n| n % d == 0) {
            let m = equal_split(d, n).unwrap();
            for t in [1.0, 2.0] {
                let even = allocation_objective(&vec![m; d as usize], t);
                let mut parts = vec![0u32; d as usize];
                compositions(&mut parts, 0, n, &mut |a| {
                    assert!(allocation_objective(a, t) >= even - 1e-12);
                });
            }
        }
    }
}

fn compositions(p: &mut Vec<u32>, k: usize, left: u32, visit: &mut dyn FnMut(&[u32])) {
    let rest = (p.len() - k - 1) as u32;
    if rest == 0 {
        p[k] = left;
        visit(p);
        return;
    }
    for x in 1..=(left - rest) {
        p[k] = x;
        compositions(p, k + 1, left - x, visit);
    }
}

#[test]
fn asymptotic_floor_below_diagonal_gauge() {
    for d in 2..=6u32 {
        for n in [10u32, 100, 1000] {
            for eta in [0.5, 0.9] {
                let probe = generalized_noon(d, n);
                let delta = DeltaGauge::uniform(d as usize, diagonalizing_delta(eta).unwrap()).unwrap();
                let diag = bound_total_variance(&cq_matrix(&probe, &vec![eta; d as usize], &delta).unwrap()).unwrap();
                assert!(se_asymptotic(d, n, eta).unwrap() <= diag * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn pure_qfi_is_four_times_covariance() {
    let probe = generalized_noon(3, 5);
    let nm = NumberMoments::of(&probe);
    let expected: DMatrix<f64> = 4.0 * nm.covariance;
    assert!(max_abs_diff_real(qfi_pure(&probe).matrix(), &expected) < 1e-15);
}
