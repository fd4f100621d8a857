#![allow(dead_code)]

use std::sync::Arc;

use multiphase::fock::{build_basis, BasisKind, FockBasis, ModeOccupation};
use multiphase::loss_channel::{kraus_operator, DensityOperator};
use multiphase::probes::custom_probe;
use multiphase::{PureState, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Gaussian real amplitudes over the fixed-total basis of d+1 modes.
pub fn random_real_probe(rng: &mut ChaCha8Rng, d: usize, n: u32) -> PureState {
    let basis = build_basis(d + 1, n, BasisKind::FixedTotal);
    let terms: Vec<(ModeOccupation, f64)> = basis
        .states()
        .iter()
        .map(|s| (s.clone(), rng.sample::<f64, _>(StandardNormal)))
        .collect();
    custom_probe(&basis, &terms).unwrap()
}

pub fn random_complex_ket(rng: &mut ChaCha8Rng, basis: &FockBasis) -> Vec<(ModeOccupation, C64)> {
    basis
        .states()
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (s.clone(), C64::new(re, im))
        })
        .collect()
}

/// Tensor-product space with `cap + 1` levels per mode.
pub struct ProductSpace {
    pub modes: usize,
    pub cap: u32,
}

impl ProductSpace {
    pub fn dim(&self) -> usize {
        (self.cap as usize + 1).pow(self.modes as u32)
    }

    pub fn index(&self, occ: &ModeOccupation) -> usize {
        occ.counts().iter().fold(0, |acc, &n| acc * (self.cap as usize + 1) + n as usize)
    }

    pub fn occupation(&self, mut k: usize) -> ModeOccupation {
        let base = self.cap as usize + 1;
        let mut counts = vec![0u32; self.modes];
        for m in (0..self.modes).rev() {
            counts[m] = (k % base) as u32;
            k /= base;
        }
        ModeOccupation::new(counts)
    }

    pub fn ket(&self, state: &PureState) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        for (occ, &a) in state.ket().terms() {
            v[self.index(occ)] = a;
        }
        v
    }

    /// Σ_l (⊗_m K_{l_m}) ρ (⊗_m K_{l_m})† built from the dense single-mode
    /// Kraus matrices.
    pub fn lose(&self, rho: &DMatrix<C64>, eta: &[f64]) -> DMatrix<C64> {
        let single = build_basis(1, self.cap, BasisKind::AtMostTotal);
        let levels = self.cap as usize + 1;
        let kraus: Vec<Vec<DMatrix<f64>>> = eta
            .iter()
            .map(|&e| (0..=self.cap).map(|l| kraus_operator(e, l, &single).unwrap()).collect())
            .collect();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for pattern in 0..levels.pow(self.modes as u32) {
            let ls = self.occupation(pattern);
            let mut k = DMatrix::<f64>::identity(1, 1);
            for m in 0..self.modes {
                k = k.kronecker(&kraus[m][ls.get(m) as usize]);
            }
            let k = k.map(|x| C64::new(x, 0.0));
            out += &k * rho * k.adjoint();
        }
        out
    }

    /// Restricts a product-space operator to an at-most-total basis.
    pub fn restrict(&self, rho: &DMatrix<C64>, n_max: u32) -> DensityOperator {
        let basis = Arc::new(build_basis(self.modes, n_max, BasisKind::AtMostTotal));
        let idx: Vec<usize> = basis.states().iter().map(|s| self.index(s)).collect();
        let m = DMatrix::from_fn(basis.len(), basis.len(), |r, c| rho[(idx[r], idx[c])]);
        DensityOperator::new(basis, m).unwrap()
    }
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
