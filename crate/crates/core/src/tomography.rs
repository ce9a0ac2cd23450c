//! Reconstruction of a multi-region state over spacetime from interference
//! terms.
//!
//! Interventions are restricted to unitaries, so the operator basis is the
//! Weyl–Heisenberg (clock and shift) family rather than Gell-Mann matrices.
//! With `B` ranging over tensor products of Weyl unitaries,
//!
//! ```text
//! ρ = (1/D) Σ_B I(B) B†,    I(B) = Tr[B ρ],    D = Π dᵢ.
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::interferometer::{self, interference_from_qsot, Intervention, ProbeConfig};
use crate::linops::{ComplexMatrix, UnitaryMatrix, C64, COMPARISON_TOL, I, ONE, ZERO};
use crate::qsot::{Provenance, Qsot};
use crate::quantum::Dynamics;

/// Error estimates above this mark a noisy reconstruction as unreliable.
pub const LOW_CONFIDENCE_THRESHOLD: f64 = 0.05;

/// `W_{p,q} = Σ_k ω^{pk} |k⊕q⟩⟨k|` with `ω = e^{2πi/d}`, listed in
/// lexicographic `(p, q)` order. For `d = 2` this is `{1, X, Z, XZ}`.
pub fn weyl_basis(d: usize) -> Vec<UnitaryMatrix> {
    weyl_labels(d)
        .into_iter()
        .map(|(p, q)| weyl_operator(d, p, q))
        .collect()
}

/// The `(p, q)` labels matching [`weyl_basis`].
pub fn weyl_labels(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|p| (0..d).map(move |q| (p, q))).collect()
}

pub fn weyl_operator(d: usize, p: usize, q: usize) -> UnitaryMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut m = ComplexMatrix::zeros(vec![d]).expect("d ≥ 1");
    for k in 0..d {
        // reduce the exponent first so the phases are exact roots of unity
        let e = (p * k) % d;
        m[((k + q) % d, k)] = C64::from_polar(1.0, omega * e as f64);
    }
    UnitaryMatrix::with_tolerance(m, COMPARISON_TOL).expect("shift times clock is unitary")
}

/// Something that answers "what is the interference term for these
/// per-region unitaries?".
pub trait InterferenceOracle: Sync {
    fn region_dims(&self) -> Vec<usize>;
    fn interference(&self, iv: &Intervention) -> Result<C64>;
}

/// Oracle backed by a known QSOT.
#[derive(Clone, Debug)]
pub struct QsotOracle(pub Qsot);

impl InterferenceOracle for QsotOracle {
    fn region_dims(&self) -> Vec<usize> {
        self.0.region_dims().to_vec()
    }

    fn interference(&self, iv: &Intervention) -> Result<C64> {
        interference_from_qsot(&self.0, iv)
    }
}

/// Oracle that runs the state-vector interferometer simulation for a
/// weighted ensemble of two-region dynamics.
#[derive(Clone, Debug)]
pub struct DynamicsOracle {
    weights: Vec<f64>,
    ensemble: Vec<Dynamics>,
}

impl DynamicsOracle {
    pub fn new(weights: Vec<f64>, ensemble: Vec<Dynamics>) -> Result<Self> {
        if weights.len() != ensemble.len() || ensemble.is_empty() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} dynamics",
                weights.len(),
                ensemble.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("{weights:?}")));
        }
        let dims = (ensemble[0].channel().in_dim(), ensemble[0].channel().out_dim());
        for d in &ensemble {
            let here = (d.channel().in_dim(), d.channel().out_dim());
            if here != dims {
                return Err(dim_mismatch(format!("{dims:?}"), format!("{here:?}")));
            }
        }
        Ok(Self { weights, ensemble })
    }

    pub fn single(d: Dynamics) -> Self {
        Self {
            weights: vec![1.0],
            ensemble: vec![d],
        }
    }
}

impl InterferenceOracle for DynamicsOracle {
    fn region_dims(&self) -> Vec<usize> {
        let c = self.ensemble[0].channel();
        vec![c.in_dim(), c.out_dim()]
    }

    fn interference(&self, iv: &Intervention) -> Result<C64> {
        if iv.regions() != 2 {
            return Err(dim_mismatch("2 regions", iv.regions()));
        }
        let probe = ProbeConfig::max_visibility();
        let mut acc = ZERO;
        for (w, d) in self.weights.iter().zip(&self.ensemble) {
            let rec = interferometer::simulate_temporal(d, &iv.unitaries()[0], &iv.unitaries()[1], &probe)?;
            acc += rec.interference * *w;
        }
        Ok(acc)
    }
}

/// One basis tuple: a Weyl label `(p, q)` per region.
pub type BasisLabel = Vec<(usize, usize)>;

fn basis_tuples(dims: &[usize]) -> Vec<BasisLabel> {
    let mut tuples: Vec<BasisLabel> = vec![Vec::new()];
    for &d in dims {
        let labels = weyl_labels(d);
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                labels.iter().map(move |l| {
                    let mut t = t.clone();
                    t.push(*l);
                    t
                })
            })
            .collect();
    }
    tuples
}

fn intervention_for(dims: &[usize], label: &BasisLabel) -> Intervention {
    Intervention::new(
        dims.iter()
            .zip(label)
            .map(|(&d, &(p, q))| weyl_operator(d, p, q))
            .collect(),
    )
}

/// `(1/D) Σ_B I(B) B†`.
fn assemble(dims: &[usize], labels: &[BasisLabel], values: &[C64]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    let mut acc = ComplexMatrix::zeros(dims.to_vec())?;
    for (label, value) in labels.iter().zip(values) {
        let b = intervention_for(dims, label).operator();
        acc += &b.dagger().scale(*value);
    }
    Ok(acc.scale_real(1.0 / total as f64))
}

fn check_oracle_dims(oracle: &impl InterferenceOracle, dims: &[usize]) -> Result<()> {
    let od = oracle.region_dims();
    if od != dims {
        return Err(dim_mismatch(format!("{dims:?}"), format!("oracle dims {od:?}")));
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidDims(format!("region dims {dims:?}; each must be ≥ 2")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// Weyl labels per region, lexicographic in (region, p, q).
    pub basis_order: Vec<BasisLabel>,
    pub raw_interference: Vec<C64>,
    pub qsot: Qsot,
    /// Largest `|Tr[B ρ̂] − I(B)|` over the basis.
    pub residual: f64,
}

/// Exact reconstruction from one oracle call per basis tuple.
pub fn reconstruct(oracle: &impl InterferenceOracle, dims: &[usize]) -> Result<ReconstructionReport> {
    check_oracle_dims(oracle, dims)?;
    let labels = basis_tuples(dims);
    let values: Vec<C64> = labels
        .par_iter()
        .map(|l| oracle.interference(&intervention_for(dims, l)))
        .collect::<Result<_>>()?;
    let m = assemble(dims, &labels, &values)?;
    let qsot = Qsot::new(m, Provenance::Reconstructed)?;
    let mut residual = 0.0f64;
    for (l, v) in labels.iter().zip(&values) {
        let back = interference_from_qsot(&qsot, &intervention_for(dims, l))?;
        residual = residual.max((back - v).norm());
    }
    Ok(ReconstructionReport {
        basis_order: labels,
        raw_interference: values,
        qsot,
        residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoisyReconstruction {
    pub basis_order: Vec<BasisLabel>,
    pub estimated_interference: Vec<C64>,
    pub qsot: Qsot,
    /// Largest one-sigma entrywise uncertainty of the assembled matrix.
    pub error_estimate: f64,
    pub low_confidence: bool,
    pub shots_per_setting: u64,
}

/// Estimate of `Re z` from `n₊` counts at `V` and `−V` with the
/// max-visibility probe, plus its binomial variance.
fn signed_estimate(n_pos: u64, n_neg: u64, shots: u64) -> (f64, f64) {
    let n = shots as f64;
    let (f1, f2) = (n_pos as f64 / n, n_neg as f64 / n);
    // smoothed frequencies keep the variance away from zero at tiny budgets
    let (s1, s2) = ((n_pos as f64 + 0.5) / (n + 1.0), (n_neg as f64 + 0.5) / (n + 1.0));
    let var = (s1 * (1.0 - s1) + s2 * (1.0 - s2)) / n;
    (f1 - f2, var)
}

/// Finite-statistics reconstruction with the max-visibility probe.
///
/// Each basis tuple other than the identity costs four runs of
/// `shots_per_setting` shots, with the first-region unitary multiplied by
/// `1, −1, i, −i`. Since `p₊ = (1 + Re I)/2`, the `±1` pair estimates
/// `Re I` and the `±i` pair estimates `−Im I`. The identity tuple is fixed
/// to `I = 1` by normalization.
///
/// Every setting draws from its own ChaCha stream keyed by a base seed taken
/// from `rng`, so results do not depend on thread scheduling.
pub fn reconstruct_noisy(
    oracle: &impl InterferenceOracle,
    dims: &[usize],
    shots_per_setting: u64,
    rng: &mut impl Rng,
) -> Result<NoisyReconstruction> {
    if shots_per_setting == 0 {
        return Err(Error::ZeroShots);
    }
    check_oracle_dims(oracle, dims)?;
    let probe = ProbeConfig::max_visibility();
    let base_seed: u64 = rng.random();
    let labels = basis_tuples(dims);

    let estimates: Vec<(C64, f64)> = labels
        .par_iter()
        .enumerate()
        .map(|(idx, label)| -> Result<(C64, f64)> {
            if label.iter().all(|&(p, q)| p == 0 && q == 0) {
                return Ok((ONE, 0.0));
            }
            let mut local = ChaCha8Rng::seed_from_u64(base_seed);
            local.set_stream(idx as u64);
            let iv = intervention_for(dims, label);
            let mut counts = [0u64; 4];
            for (slot, phase) in [ONE, -ONE, I, -I].into_iter().enumerate() {
                let z = oracle.interference(&iv.with_first_phase(phase))?;
                let rec = interferometer::InterferenceRecord::from_probe(&probe, z);
                counts[slot] = interferometer::sample(&rec, shots_per_setting, &mut local)?.0;
            }
            let (re, var_re) = signed_estimate(counts[0], counts[1], shots_per_setting);
            let (neg_im, var_im) = signed_estimate(counts[2], counts[3], shots_per_setting);
            Ok((C64::new(re, -neg_im), var_re + var_im))
        })
        .collect::<Result<_>>()?;

    let values: Vec<C64> = estimates.iter().map(|e| e.0).collect();
    let m = assemble(dims, &labels, &values)?;
    let qsot = Qsot::new(m, Provenance::Reconstructed)?;

    // Each Weyl tuple has exactly one unit-modulus entry per row, so every
    // matrix entry collects D of the estimates, each weighted by 1/D.
    let total: usize = dims.iter().product();
    let mut entry_var = vec![0.0f64; total * total];
    for (label, (_, var)) in labels.iter().zip(&estimates) {
        let b = intervention_for(dims, label).operator();
        for i in 0..total {
            for j in 0..total {
                if b.get(j, i).norm() > 0.5 {
                    entry_var[i * total + j] += var;
                }
            }
        }
    }
    let d2 = (total * total) as f64;
    let error_estimate = entry_var.iter().fold(0.0f64, |m, v| m.max((v / d2).sqrt()));
    Ok(NoisyReconstruction {
        basis_order: labels,
        estimated_interference: values,
        qsot,
        error_estimate,
        low_confidence: error_estimate > LOW_CONFIDENCE_THRESHOLD,
        shots_per_setting,
    })
}
