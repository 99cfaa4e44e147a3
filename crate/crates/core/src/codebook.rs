//! DFT analog beam codebooks.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Constant-modulus unit-norm analog beams of a fixed length.
#[derive(Debug, Clone)]
pub struct BeamCodebook<T: Real> {
    beam_length: usize,
    beams: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BeamCodebook<T> {
    /// Full `n`-point DFT codebook: beam `k` has entries `exp(-j2πkl/n)/√n`.
    pub fn dft(n: usize) -> Result<Self> {
        Self::dft_subsampled(n, 1)
    }

    /// Every `step`-th column of the `n`-point DFT matrix.
    pub fn dft_subsampled(n: usize, step: usize) -> Result<Self> {
        if n == 0 {
            return invalid("codebook beam length must be at least 1");
        }
        if step == 0 {
            return invalid("codebook subsampling step must be at least 1");
        }
        let scale = T::one() / T::count(n).sqrt();
        let beams = (0..n)
            .step_by(step)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        // Reduce k·l mod n first so the phase stays accurate for large n.
                        let idx = (k * l) % n;
                        let phase = -T::TAU() * T::count(idx) / T::count(n);
                        Complex::from_polar(scale, phase)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            beam_length: n,
            beams,
        })
    }

    /// Codebook from explicit beams; each must be nonempty and equally long.
    pub fn from_beams(beams: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let Some(first) = beams.first() else {
            return invalid("codebook must contain at least one beam");
        };
        let beam_length = first.len();
        if beam_length == 0 || beams.iter().any(|b| b.len() != beam_length) {
            return invalid("codebook beams must be nonempty and equally long");
        }
        Ok(Self { beam_length, beams })
    }

    pub fn beam_length(&self) -> usize {
        self.beam_length
    }

    pub fn cardinality(&self) -> usize {
        self.beams.len()
    }

    pub fn beam(&self, k: usize) -> &[Complex<T>] {
        &self.beams[k]
    }

    pub fn beams(&self) -> &[Vec<Complex<T>>] {
        &self.beams
    }

    /// Beams stacked as columns.
    pub fn as_matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.beam_length, self.beams.len(), |i, j| self.beams[j][i])
    }
}

/// `n`-point DFT codebook.
pub fn dft_codebook<T: Real>(n: usize) -> Result<BeamCodebook<T>> {
    BeamCodebook::dft(n)
}
