use num_complex::Complex;

use crate::codebook::BeamCodebook;
use crate::error::{invalid, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Partially-connected analog beamformer: chain `i` drives its own subarray
/// with a codebook beam, giving a block-diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer<T: Real> {
    /// Codebook index per RF chain.
    pub beam_indices: Vec<usize>,
    pub per_chain_beams: Vec<Vec<Complex<T>>>,
    pub assembled: ComplexMatrix<T>,
}

impl<T: Real> AnalogBeamformer<T> {
    pub fn from_codebook(codebook: &BeamCodebook<T>, beam_indices: &[usize]) -> Result<Self> {
        if let Some(&b) = beam_indices.iter().find(|&&b| b >= codebook.cardinality()) {
            return invalid(format!(
                "beam index {b} outside codebook of {}",
                codebook.cardinality()
            ));
        }
        let per_chain_beams: Vec<Vec<Complex<T>>> = beam_indices
            .iter()
            .map(|&b| codebook.beam(b).to_vec())
            .collect();
        let assembled = assemble_block_diagonal(&per_chain_beams)?;
        Ok(Self {
            beam_indices: beam_indices.to_vec(),
            per_chain_beams,
            assembled,
        })
    }
}

/// Stacks equal-length beams on the diagonal: beam `i` occupies rows
/// `i·L..(i+1)·L` of column `i`, everything else is zero.
pub fn assemble_block_diagonal<T: Real>(beams: &[Vec<Complex<T>>]) -> Result<ComplexMatrix<T>> {
    let Some(first) = beams.first() else {
        return invalid("analog beamformer needs at least one beam");
    };
    let len = first.len();
    if len == 0 || beams.iter().any(|b| b.len() != len) {
        return invalid("analog beams must be nonempty and equally long");
    }
    let mut m = ComplexMatrix::zeros(len * beams.len(), beams.len());
    for (i, b) in beams.iter().enumerate() {
        for (l, &z) in b.iter().enumerate() {
            m[(i * len + l, i)] = z;
        }
    }
    Ok(m)
}
