//! Quantum states over time: the left, right and Fullwood–Parzygnat
//! products, mixtures, Markov chains and the synchronization gap.
//!
//! For a dynamics `(ρ, E)` with `E: A → B`,
//!
//! ```text
//! E ⋆_L ρ  = (ρ ⊗ 1_B) J[E]
//! E ⋆_R ρ  = J[E] (ρ ⊗ 1_B)
//! E ⋆_FP ρ = (E ⋆_L ρ + E ⋆_R ρ) / 2
//! ```
//!
//! When the state argument already spans several regions `A₁…A_k`, the
//! channel acts on the last one: `E ⋆_L σ = (σ ⊗ 1_B)(1_{A₁…A_{k-1}} ⊗ J[E])`.
//! Region index therefore equals time index, left to right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linops::{frobenius_distance, ComplexMatrix, COMPARISON_TOL, ONE};
use crate::quantum::{DensityOperator, Dynamics, QuantumChannel};

/// How a [`Qsot`] was obtained. Purely informational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Left,
    Right,
    Fp,
    Mixture,
    Reconstructed,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Left,
    Right,
    Fp,
}

impl ProductKind {
    pub const ALL: [ProductKind; 3] = [ProductKind::Left, ProductKind::Right, ProductKind::Fp];

    pub fn provenance(self) -> Provenance {
        match self {
            ProductKind::Left => Provenance::Left,
            ProductKind::Right => Provenance::Right,
            ProductKind::Fp => Provenance::Fp,
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductKind::Left => "left",
            ProductKind::Right => "right",
            ProductKind::Fp => "fp",
        })
    }
}

impl FromStr for ProductKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(ProductKind::Left),
            "right" | "r" => Ok(ProductKind::Right),
            "fp" | "sym" | "symmetric" => Ok(ProductKind::Fp),
            other => Err(Error::Malformed(format!("unknown product kind '{other}'"))),
        }
    }
}

/// A unit-trace operator over one or more spacetime regions.
///
/// Neither Hermiticity nor positivity is required in general; the left and
/// right products are not Hermitian. Operators tagged [`Provenance::Fp`]
/// are checked for Hermiticity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QsotJson", into = "QsotJson")]
pub struct Qsot {
    matrix: ComplexMatrix,
    provenance: Provenance,
}

impl Qsot {
    pub fn new(matrix: ComplexMatrix, provenance: Provenance) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - ONE).norm() > COMPARISON_TOL {
            return Err(Error::InvalidTrace(format!("{tr}")));
        }
        if provenance == Provenance::Fp {
            let h = matrix.hermiticity_error();
            if h > COMPARISON_TOL {
                return Err(Error::NotHermitian(h));
            }
        }
        Ok(Self { matrix, provenance })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn regions(&self) -> usize {
        self.matrix.dims().len()
    }

    pub fn region_dims(&self) -> &[usize] {
        self.matrix.dims()
    }

    /// Marginal on the listed regions.
    pub fn marginal(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        self.matrix.partial_trace(keep)
    }
}

impl AsRef<ComplexMatrix> for Qsot {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[derive(Serialize, Deserialize)]
struct QsotJson {
    #[serde(flatten)]
    matrix: ComplexMatrix,
    provenance: Provenance,
    regions: usize,
}

impl TryFrom<QsotJson> for Qsot {
    type Error = Error;
    fn try_from(q: QsotJson) -> Result<Self> {
        if q.regions != q.matrix.dims().len() {
            return Err(Error::Malformed(format!(
                "'regions' is {} but dims list has {} entries",
                q.regions,
                q.matrix.dims().len()
            )));
        }
        Qsot::new(q.matrix, q.provenance)
    }
}

impl From<Qsot> for QsotJson {
    fn from(q: Qsot) -> Self {
        QsotJson {
            regions: q.regions(),
            provenance: q.provenance,
            matrix: q.matrix,
        }
    }
}

/// `(σ ⊗ 1_B)` and `(1_{A₁…A_{k-1}} ⊗ J[E])` for a state over `k` regions.
fn product_factors(e: &QuantumChannel, state: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let dims = state.dims();
    let last = *dims.last().expect("dims nonempty");
    if last != e.in_dim() {
        return Err(dim_mismatch(
            format!("last region of dimension {}", e.in_dim()),
            format!("dims {dims:?}"),
        ));
    }
    let lifted = state.tensor(&ComplexMatrix::eye(e.out_dim()));
    let j = e.jamiolkowski();
    let embedded = if dims.len() > 1 {
        ComplexMatrix::identity(dims[..dims.len() - 1].to_vec())?.tensor(&j)
    } else {
        j
    };
    Ok((lifted, embedded))
}

/// `E ⋆ σ` as a plain linear operation; `σ` may be any operator (even
/// non-Hermitian or traceless) whose last region matches the channel input.
pub fn product(kind: ProductKind, e: &QuantumChannel, state: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (lifted, j) = product_factors(e, state)?;
    let out = match kind {
        ProductKind::Left => lifted.matmul(&j)?,
        ProductKind::Right => j.matmul(&lifted)?,
        ProductKind::Fp => {
            let l = lifted.matmul(&j)?;
            let r = j.matmul(&lifted)?;
            (&l + &r).scale_real(0.5)
        }
    };
    out.with_dims(
        state
            .dims()
            .iter()
            .copied()
            .chain(std::iter::once(e.out_dim()))
            .collect(),
    )
}

pub fn star(kind: ProductKind, e: &QuantumChannel, state: &impl AsRef<ComplexMatrix>) -> Result<Qsot> {
    let m = product(kind, e, state.as_ref())?;
    let tag = tag_for(kind, &m.hermiticity_error());
    Qsot::new(m, tag)
}

/// FP products of a non-Hermitian multi-region state are not Hermitian;
/// those are tagged `Other` rather than `Fp`.
fn tag_for(kind: ProductKind, hermiticity_error: &f64) -> Provenance {
    if kind == ProductKind::Fp && *hermiticity_error > COMPARISON_TOL {
        Provenance::Other
    } else {
        kind.provenance()
    }
}

pub fn star_left(e: &QuantumChannel, state: &impl AsRef<ComplexMatrix>) -> Result<Qsot> {
    star(ProductKind::Left, e, state)
}

pub fn star_right(e: &QuantumChannel, state: &impl AsRef<ComplexMatrix>) -> Result<Qsot> {
    star(ProductKind::Right, e, state)
}

pub fn star_fp(e: &QuantumChannel, state: &impl AsRef<ComplexMatrix>) -> Result<Qsot> {
    star(ProductKind::Fp, e, state)
}

fn check_weights(weights: &[f64], count: usize) -> Result<()> {
    if weights.len() != count {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} items",
            weights.len(),
            count
        )));
    }
    if count == 0 {
        return Err(Error::InvalidWeights("empty ensemble".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("negative or NaN weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

/// Convex combination `Σ wᵢ qᵢ`.
pub fn mix(weights: &[f64], qsots: &[Qsot]) -> Result<Qsot> {
    check_weights(weights, qsots.len())?;
    let dims = qsots[0].region_dims().to_vec();
    let mut acc = ComplexMatrix::zeros(dims.clone())?;
    for (w, q) in weights.iter().zip(qsots) {
        if q.region_dims() != dims.as_slice() {
            return Err(dim_mismatch(format!("{dims:?}"), format!("{:?}", q.region_dims())));
        }
        acc += &q.matrix.scale_real(*w);
    }
    Qsot::new(acc, Provenance::Mixture)
}

/// `E_n ⋆ (E_{n-1} ⋆ ⋯ (E₁ ⋆ ρ))`, one region per time step.
pub fn markov_chain(rho: &DensityOperator, channels: &[QuantumChannel], kind: ProductKind) -> Result<Qsot> {
    let mut state = rho.matrix().clone();
    for e in channels {
        state = product(kind, e, &state)?;
    }
    let tag = tag_for(kind, &state.hermiticity_error());
    Qsot::new(state, tag)
}

/// `‖(E⊗F) ⋆ (ρ⊗σ) − (E⋆ρ) ⊗ (F⋆σ)‖_F` with both sides in region order
/// `(X, Y, X', Y')`.
pub fn synchronization_gap(
    e: &QuantumChannel,
    f: &QuantumChannel,
    rho: &DensityOperator,
    sigma: &DensityOperator,
    kind: ProductKind,
) -> Result<f64> {
    if e.in_dim() != rho.dim() {
        return Err(dim_mismatch(e.in_dim(), rho.dim()));
    }
    if f.in_dim() != sigma.dim() {
        return Err(dim_mismatch(f.in_dim(), sigma.dim()));
    }
    let (dx, dy, dx2, dy2) = (e.in_dim(), f.in_dim(), e.out_dim(), f.out_dim());
    let joint_in = rho.tensor(sigma).matrix().clone().with_dims(vec![dx * dy])?;
    let joint = product(kind, &e.tensor(f), &joint_in)?.with_dims(vec![dx, dy, dx2, dy2])?;
    let separate = product(kind, e, rho.matrix())?
        .tensor(&product(kind, f, sigma.matrix())?)
        .permute(&[0, 2, 1, 3])?;
    frobenius_distance(&joint, &separate)
}

/// A factorizable QSOT on `(A⊗flag, B⊗flag)` whose flag-traced marginal is
/// a given mixture of factorizable QSOTs.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub dynamics: Dynamics,
    pub qsot: Qsot,
    pub in_dim: usize,
    pub out_dim: usize,
    pub flag_dim: usize,
}

impl Factorization {
    /// Traces out both flag registers.
    pub fn flag_marginal(&self) -> Result<ComplexMatrix> {
        self.qsot
            .matrix()
            .clone()
            .with_dims(vec![self.in_dim, self.flag_dim, self.out_dim, self.flag_dim])?
            .partial_trace(&[0, 2])
    }
}

/// Builds `(Σᵢ Fᵢ⊗|i⟩⟨i|·|i⟩⟨i|) ⋆ (Σⱼ pⱼ ρⱼ⊗|j⟩⟨j|)`.
pub fn factorize_in_larger_space(
    weights: &[f64],
    ensemble: &[Dynamics],
    kind: ProductKind,
) -> Result<Factorization> {
    check_weights(weights, ensemble.len())?;
    let n = ensemble.len();
    let din = ensemble[0].channel().in_dim();
    let dout = ensemble[0].channel().out_dim();
    for d in ensemble {
        if d.channel().in_dim() != din || d.channel().out_dim() != dout {
            return Err(dim_mismatch(
                format!("channel {din}->{dout}"),
                format!("{}->{}", d.channel().in_dim(), d.channel().out_dim()),
            ));
        }
    }
    let mut state = ComplexMatrix::zeros(vec![din * n])?;
    let mut kraus = Vec::new();
    for (i, (w, d)) in weights.iter().zip(ensemble).enumerate() {
        let flag = ComplexMatrix::unit(vec![n], i, i)?;
        state += &d.initial().matrix().tensor(&flag).scale_real(*w);
        let flag_rect = crate::linops::RectMatrix::from_square(&flag);
        kraus.extend(d.channel().kraus().iter().map(|k| k.tensor(&flag_rect)));
    }
    let channel = QuantumChannel::new(din * n, dout * n, kraus)?;
    let initial = DensityOperator::new(state.hermitian_part())?;
    let dynamics = Dynamics::new(initial, channel)?;
    let qsot = star(kind, dynamics.channel(), dynamics.initial())?;
    Ok(Factorization {
        dynamics,
        qsot,
        in_dim: din,
        out_dim: dout,
        flag_dim: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{random_density_matrix, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ket0() -> DensityOperator {
        DensityOperator::basis(2, 0).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::basis(2, 1).unwrap()
    }

    fn real(rows: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(vec![2, 2], rows).unwrap()
    }

    #[test]
    fn left_product_of_identity_on_ket0() {
        let q = star_left(&QuantumChannel::identity(2), &ket0()).unwrap();
        let want = real(&[1., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0.]);
        assert_eq!(q.matrix(), &want);
        // marginal over B is ρ, over A is E(ρ) = ρ
        assert_eq!(q.marginal(&[0]).unwrap(), *ket0().matrix());
        assert_eq!(q.marginal(&[1]).unwrap(), *ket0().matrix());
    }

    #[test]
    fn left_product_of_pauli_y_on_ket1() {
        let q = star_left(&QuantumChannel::pauli_y(), &ket1()).unwrap();
        let mut want = ComplexMatrix::zeros(vec![2, 2]).unwrap();
        want[(2, 2)] = ONE;
        want[(3, 0)] = -ONE;
        assert!(q.matrix().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn right_product_is_adjoint_of_left() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = QuantumChannel::random(2, 3, 2, &mut rng);
        let rho = DensityOperator::random(2, &mut rng);
        let l = star_left(&e, &rho).unwrap();
        let r = star_right(&e, &rho).unwrap();
        assert!(r.matrix().max_abs_diff(&l.matrix().dagger()).unwrap() < 1e-14);
    }

    #[test]
    fn fp_of_identity_on_maximally_mixed_equals_left() {
        let e = QuantumChannel::identity(2);
        let pi = DensityOperator::maximally_mixed(2);
        let fp = star_fp(&e, &pi).unwrap();
        let l = star_left(&e, &pi).unwrap();
        assert!(fp.matrix().max_abs_diff(l.matrix()).unwrap() < 1e-15);
        // (ρ⊗1)·SWAP is Hermitian only when ρ ∝ 1, so an unbalanced
        // diagonal state already separates the two products.
        let rho = DensityOperator::new(ComplexMatrix::from_real(vec![2], &[0.3, 0., 0., 0.7]).unwrap()).unwrap();
        let gap = frobenius_distance(star_fp(&e, &rho).unwrap().matrix(), star_left(&e, &rho).unwrap().matrix()).unwrap();
        assert!((gap - 0.4 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fp_of_dephasing_on_maximally_mixed() {
        for theta in [PI / 6.0, PI / 3.0, PI / 2.0, 1.0] {
            let q = star_fp(&QuantumChannel::dephasing(theta), &DensityOperator::maximally_mixed(2)).unwrap();
            let c = theta.cos();
            let want = real(&[1., 0., 0., 0., 0., 0., c, 0., 0., c, 0., 0., 0., 0., 0., 1.]).scale_real(0.5);
            assert!(q.matrix().max_abs_diff(&want).unwrap() < 1e-15, "θ = {theta}");
        }
    }

    #[test]
    fn marginality_for_all_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let din = rng.random_range(2..=3);
            let dout = rng.random_range(2..=3);
            let rho = DensityOperator::random(din, &mut rng);
            let e = QuantumChannel::random(din, dout, rng.random_range(1..=3), &mut rng);
            let evolved = e.apply(rho.matrix()).unwrap();
            for kind in ProductKind::ALL {
                let q = star(kind, &e, &rho).unwrap();
                assert!(q.marginal(&[0]).unwrap().max_abs_diff(rho.matrix()).unwrap() < 1e-11);
                assert!(q.marginal(&[1]).unwrap().max_abs_diff(&evolved).unwrap() < 1e-11);
            }
        }
    }

    #[test]
    fn fp_is_hermitian_part_of_left() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rho = DensityOperator::random(3, &mut rng);
            let e = QuantumChannel::random(3, 2, 2, &mut rng);
            let fp = star_fp(&e, &rho).unwrap();
            let l = star_left(&e, &rho).unwrap();
            assert!(fp.matrix().max_abs_diff(&l.matrix().hermitian_part()).unwrap() < 1e-13);
        }
    }

    #[test]
    fn mix_validates_weights() {
        let q = star_left(&QuantumChannel::identity(2), &ket0()).unwrap();
        assert!(matches!(mix(&[0.5, 0.4], &[q.clone(), q.clone()]), Err(Error::InvalidWeights(_))));
        assert!(matches!(mix(&[1.5, -0.5], &[q.clone(), q.clone()]), Err(Error::InvalidWeights(_))));
        let same = mix(&[1.0], &[q.clone()]).unwrap();
        assert_eq!(same.matrix(), q.matrix());
        assert_eq!(same.provenance(), Provenance::Mixture);
    }

    #[test]
    fn markov_chain_single_step_is_star() {
        let rho = DensityOperator::random(2, &mut ChaCha8Rng::seed_from_u64(4));
        let e = QuantumChannel::identity(2);
        let chain = markov_chain(&rho, &[e.clone()], ProductKind::Left).unwrap();
        assert_eq!(chain.matrix(), star_left(&e, &rho).unwrap().matrix());
    }

    #[test]
    fn markov_chain_pairwise_marginals() {
        let x = QuantumChannel::pauli_x();
        let chain = markov_chain(&ket0(), &[x.clone(), x.clone()], ProductKind::Left).unwrap();
        assert_eq!(chain.region_dims(), &[2, 2, 2]);
        // d^{2n} parameters for n = 3 regions of a qubit
        assert_eq!(chain.matrix().data().len(), 2usize.pow(6));
        let first = star_left(&x, &ket0()).unwrap();
        assert!(chain.marginal(&[0, 1]).unwrap().max_abs_diff(first.matrix()).unwrap() < 1e-15);
        let evolved = DensityOperator::new(x.apply(ket0().matrix()).unwrap()).unwrap();
        let second = star_left(&x, &evolved).unwrap();
        assert!(chain.marginal(&[1, 2]).unwrap().max_abs_diff(second.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn markov_chain_marginals_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in ProductKind::ALL {
            let rho = DensityOperator::random(2, &mut rng);
            let e1 = QuantumChannel::random(2, 3, 2, &mut rng);
            let e2 = QuantumChannel::random(3, 2, 2, &mut rng);
            let chain = markov_chain(&rho, &[e1.clone(), e2.clone()], kind).unwrap();
            let first = star(kind, &e1, &rho).unwrap();
            assert!(chain.marginal(&[0, 1]).unwrap().max_abs_diff(first.matrix()).unwrap() < 1e-13);
            let mid = DensityOperator::new(e1.apply(rho.matrix()).unwrap().hermitian_part()).unwrap();
            let second = star(kind, &e2, &mid).unwrap();
            assert!(chain.marginal(&[1, 2]).unwrap().max_abs_diff(second.matrix()).unwrap() < 1e-13);
        }
    }

    #[test]
    fn synchronization_gap_vanishes_for_left_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let e = QuantumChannel::random(2, 2, 2, &mut rng);
            let f = QuantumChannel::random(2, 3, 2, &mut rng);
            let rho = DensityOperator::random(2, &mut rng);
            let sigma = DensityOperator::random(2, &mut rng);
            assert!(synchronization_gap(&e, &f, &rho, &sigma, ProductKind::Left).unwrap() < 1e-12);
        }
    }

    #[test]
    fn synchronization_gap_for_fp_pauli_x() {
        // value from an independent dense evaluation: 0.5
        let x = QuantumChannel::pauli_x();
        let gap = synchronization_gap(&x, &x, &ket0(), &ket0(), ProductKind::Fp).unwrap();
        assert!((gap - 0.5).abs() < 1e-14);
    }

    #[test]
    fn synchronization_gap_for_fp_identity() {
        let id = QuantumChannel::identity(2);
        let pi = DensityOperator::maximally_mixed(2);
        assert!(synchronization_gap(&id, &id, &pi, &pi, ProductKind::Fp).unwrap() < 1e-15);
        // dense evaluation: diag(0.2, 0.8) and diag(0.6, 0.4) give 0.06
        let a = DensityOperator::new(ComplexMatrix::from_real(vec![2], &[0.2, 0., 0., 0.8]).unwrap()).unwrap();
        let b = DensityOperator::new(ComplexMatrix::from_real(vec![2], &[0.6, 0., 0., 0.4]).unwrap()).unwrap();
        let gap = synchronization_gap(&id, &id, &a, &b, ProductKind::Fp).unwrap();
        assert!((gap - 0.06).abs() < 1e-14, "gap = {gap}");
    }

    #[test]
    fn factorization_single_element_has_trivial_flag() {
        let d = Dynamics::new(ket0(), QuantumChannel::pauli_x()).unwrap();
        let fac = factorize_in_larger_space(&[1.0], &[d.clone()], ProductKind::Left).unwrap();
        assert_eq!(fac.flag_dim, 1);
        let direct = star_left(d.channel(), d.initial()).unwrap();
        assert!(fac.qsot.matrix().max_abs_diff(direct.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn factorization_marginal_matches_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ens: Vec<Dynamics> = (0..3).map(|_| Dynamics::random(2, 3, 2, &mut rng)).collect();
        let w = [0.2, 0.5, 0.3];
        for kind in ProductKind::ALL {
            let fac = factorize_in_larger_space(&w, &ens, kind).unwrap();
            let parts: Vec<Qsot> = ens.iter().map(|d| star(kind, d.channel(), d.initial()).unwrap()).collect();
            let mixed = mix(&w, &parts).unwrap();
            assert!(fac.flag_marginal().unwrap().max_abs_diff(mixed.matrix()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn qsot_json_round_trip_and_regions_check() {
        let q = star_left(&QuantumChannel::pauli_y(), &DensityOperator::plus()).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert!(s.contains("\"provenance\":\"left\""));
        assert!(s.contains("\"regions\":2"));
        let back: Qsot = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        let bad = s.replace("\"regions\":2", "\"regions\":3");
        assert!(serde_json::from_str::<Qsot>(&bad).is_err());
    }

    #[test]
    fn qsot_rejects_wrong_trace() {
        let m = random_density_matrix(2, &mut ChaCha8Rng::seed_from_u64(8)).scale(C64::new(2.0, 0.0));
        assert!(matches!(Qsot::new(m, Provenance::Other), Err(Error::InvalidTrace(_))));
    }

    #[test]
    fn product_rejects_dimension_mismatch() {
        let e = QuantumChannel::identity(3);
        assert!(matches!(star_left(&e, &ket0()), Err(Error::DimensionMismatch { .. })));
    }
}
