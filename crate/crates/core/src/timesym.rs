//! Time-reversal symmetry: the compass-qubit protocol and the separation
//! property of the symmetric product.
//!
//! Under time-reversal-symmetric interferometry only `E ⋆_FP ρ` is
//! accessible. A compass qubit `C` that travels alongside the system with
//! the identity channel, together with the interventions
//!
//! ```text
//! Ṽ = V ⊗ |1⟩⟨0| + V† ⊗ |0⟩⟨1|      on A ⊗ C_A
//! W̃ = W ⊗ |0⟩⟨1| + W† ⊗ |1⟩⟨0|      on B ⊗ C_B
//! ```
//!
//! turns the interference term into `Re Tr[(V⊗W)(E ⋆_L ρ)]`, which is enough
//! to recover the left product. Compass states are ordered `(A, C_A | B, C_B)`.

use rayon::prelude::*;

use crate::error::{dim_mismatch, Error, Result};
use crate::interferometer::{interference_from_qsot, Intervention};
use crate::linops::{frobenius_distance, ComplexMatrix, UnitaryMatrix, C64, COMPARISON_TOL, I, ZERO};
use crate::qsot::{mix, product, star, ProductKind, Provenance, Qsot};
use crate::quantum::{DensityOperator, Dynamics, QuantumChannel};
use crate::tomography::weyl_basis;

/// A dynamics, or a weighted ensemble of dynamics, run with a compass qubit
/// prepared in `|0⟩` and carried by the identity channel.
#[derive(Clone, Debug)]
pub struct CompassSetup {
    weights: Vec<f64>,
    ensemble: Vec<Dynamics>,
}

impl CompassSetup {
    pub fn new(dynamics: Dynamics) -> Self {
        Self {
            weights: vec![1.0],
            ensemble: vec![dynamics],
        }
    }

    /// An ensemble; each branch gets its own compass and the results are
    /// mixed.
    pub fn mixture(weights: Vec<f64>, ensemble: Vec<Dynamics>) -> Result<Self> {
        if weights.len() != ensemble.len() || ensemble.is_empty() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} dynamics",
                weights.len(),
                ensemble.len()
            )));
        }
        let (a, b) = (ensemble[0].channel().in_dim(), ensemble[0].channel().out_dim());
        if let Some(d) = ensemble
            .iter()
            .find(|d| d.channel().in_dim() != a || d.channel().out_dim() != b)
        {
            return Err(dim_mismatch(
                format!("{a}->{b}"),
                format!("{}->{}", d.channel().in_dim(), d.channel().out_dim()),
            ));
        }
        Ok(Self { weights, ensemble })
    }

    pub fn in_dim(&self) -> usize {
        self.ensemble[0].channel().in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.ensemble[0].channel().out_dim()
    }

    fn mixed(&self, per_branch: impl Fn(&Dynamics) -> Result<Qsot>) -> Result<Qsot> {
        let parts: Vec<Qsot> = self.ensemble.iter().map(per_branch).collect::<Result<_>>()?;
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().expect("one part"));
        }
        mix(&self.weights, &parts)
    }

    /// `Σ wᵢ Eᵢ ⋆_L ρᵢ`, the object the protocol recovers.
    pub fn left_product(&self) -> Result<Qsot> {
        self.mixed(|d| star(ProductKind::Left, d.channel(), d.initial()))
    }

    /// `Σ wᵢ Eᵢ ⋆_FP ρᵢ`.
    pub fn fp_product(&self) -> Result<Qsot> {
        self.mixed(|d| star(ProductKind::Fp, d.channel(), d.initial()))
    }
}

/// `(E ⊗ id_C) ⋆_FP (ρ ⊗ |0⟩⟨0|_C)` on regions `(A C_A, B C_B)`.
pub fn compass_qsot(s: &CompassSetup) -> Result<Qsot> {
    let compass = DensityOperator::basis(2, 0)?;
    s.mixed(|d| {
        let channel = d.channel().tensor(&QuantumChannel::identity(2));
        let state = d.initial().tensor(&compass).matrix().clone();
        let n = state.dim();
        star(ProductKind::Fp, &channel, &state.with_dims(vec![n])?)
    })
}

/// Traces the compass registers out of a compass QSOT.
pub fn compass_marginal(q: &Qsot, in_dim: usize, out_dim: usize) -> Result<ComplexMatrix> {
    q.matrix()
        .clone()
        .with_dims(vec![in_dim, 2, out_dim, 2])?
        .partial_trace(&[0, 2])
}

fn outer(d: usize, row: usize, col: usize) -> ComplexMatrix {
    ComplexMatrix::unit(vec![d], row, col).expect("index in range")
}

/// `(Ṽ, W̃)` acting on `A⊗C_A` and `B⊗C_B`.
pub fn compass_interventions(v: &UnitaryMatrix, w: &UnitaryMatrix) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    let vt = &v.matrix().tensor(&outer(2, 1, 0)) + &v.dagger().matrix().tensor(&outer(2, 0, 1));
    let wt = &w.matrix().tensor(&outer(2, 0, 1)) + &w.dagger().matrix().tensor(&outer(2, 1, 0));
    let flat = |m: ComplexMatrix| {
        let n = m.dim();
        m.with_dims(vec![n])
    };
    Ok((UnitaryMatrix::new(flat(vt)?)?, UnitaryMatrix::new(flat(wt)?)?))
}

/// Interference term of the compass QSOT under `(Ṽ, W̃)`. Checked to be real
/// and equal to `Re Tr[(V⊗W)(E ⋆_L ρ)]`.
pub fn compass_interference(s: &CompassSetup, v: &UnitaryMatrix, w: &UnitaryMatrix) -> Result<f64> {
    let q = compass_qsot(s)?;
    compass_interference_with(s, &q, v, w)
}

fn compass_interference_with(s: &CompassSetup, q: &Qsot, v: &UnitaryMatrix, w: &UnitaryMatrix) -> Result<f64> {
    if v.dim() != s.in_dim() || w.dim() != s.out_dim() {
        return Err(dim_mismatch(
            format!("V, W of dimensions {}, {}", s.in_dim(), s.out_dim()),
            format!("{}, {}", v.dim(), w.dim()),
        ));
    }
    let (vt, wt) = compass_interventions(v, w)?;
    let z = interference_from_qsot(q, &Intervention::pair(vt, wt))?;
    if z.im.abs() > COMPARISON_TOL {
        return Err(Error::ComputationFault(format!("compass interference has imaginary part {}", z.im)));
    }
    let left = s.left_product()?;
    let expected = interference_from_qsot(&left, &Intervention::pair(v.clone(), w.clone()))?.re;
    if (z.re - expected).abs() > COMPARISON_TOL {
        return Err(Error::ComputationFault(format!(
            "compass interference {} differs from Re Tr[(V⊗W)L] = {expected}",
            z.re
        )));
    }
    Ok(z.re)
}

/// All `d_A² · d_B²` pairs of Weyl unitaries.
pub fn weyl_pair_basis(in_dim: usize, out_dim: usize) -> Vec<(UnitaryMatrix, UnitaryMatrix)> {
    let wa = weyl_basis(in_dim);
    let wb = weyl_basis(out_dim);
    wa.iter()
        .flat_map(|v| wb.iter().map(move |w| (v.clone(), w.clone())))
        .collect()
}

/// Recovers `E ⋆_L ρ` from compass runs.
///
/// For each pair the runs `(V, W)` and `(iV, W)` give `Re t` and `−Im t`
/// with `t = Tr[(V⊗W) L]`. With `B_k = V_k ⊗ W_k` and `G_kl = Tr[B_k B_l†]`,
/// writing `L = Σ_l c_l B_l†` gives `t = G c`; `c` is obtained from the
/// pseudo-inverse of `G`, after checking that `G` has full operator rank.
pub fn compass_recover_left(s: &CompassSetup, basis: &[(UnitaryMatrix, UnitaryMatrix)]) -> Result<Qsot> {
    let (da, db) = (s.in_dim(), s.out_dim());
    let needed = (da * db) * (da * db);
    if basis.is_empty() {
        return Err(Error::NonSpanningBasis { rank: 0, needed });
    }
    let q = compass_qsot(s)?;
    let t: Vec<C64> = basis
        .par_iter()
        .map(|(v, w)| -> Result<C64> {
            let re = compass_interference_with(s, &q, v, w)?;
            let neg_im = compass_interference_with(s, &q, &v.phased(I), w)?;
            Ok(C64::new(re, -neg_im))
        })
        .collect::<Result<_>>()?;

    let ops: Vec<ComplexMatrix> = basis.iter().map(|(v, w)| v.matrix().tensor(w.matrix())).collect();
    let m = ops.len();
    let gram = ComplexMatrix::from_fn(vec![m], |k, l| {
        ops[k].trace_product(&ops[l].dagger()).expect("same dims")
    })?;
    let (vals, vecs) = gram.eigh();
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-9 * top.max(1.0)).collect();
    if keep.len() < needed {
        return Err(Error::NonSpanningBasis {
            rank: keep.len(),
            needed,
        });
    }
    // c = Σ_i |u_i⟩⟨u_i| t / λ_i over the retained spectrum
    let mut c = vec![ZERO; m];
    for &i in &keep {
        let u = vecs.column(i);
        let proj: C64 = u.iter().zip(&t).map(|(a, b)| a.conj() * b).sum::<C64>() / vals[i];
        for (ck, uk) in c.iter_mut().zip(&u) {
            *ck += proj * uk;
        }
    }
    let mut acc = ComplexMatrix::zeros(vec![da, db])?;
    for (ck, op) in c.iter().zip(&ops) {
        acc += &op.dagger().with_dims(vec![da, db])?.scale(*ck);
    }
    Qsot::new(acc, Provenance::Reconstructed)
}

/// `(‖J[E₁] − J[E₂]‖_F, ‖E₁⋆_FP ρ − E₂⋆_FP ρ‖_F)`.
pub fn fp_separation(e1: &QuantumChannel, e2: &QuantumChannel, rho: &DensityOperator) -> Result<(f64, f64)> {
    let dj = frobenius_distance(&e1.jamiolkowski(), &e2.jamiolkowski())?;
    let a = product(ProductKind::Fp, e1, rho.matrix())?;
    let b = product(ProductKind::Fp, e2, rho.matrix())?;
    Ok((dj, frobenius_distance(&a, &b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{pauli, random_unitary};
    use crate::qsot::{star_fp, star_left};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn u(m: ComplexMatrix) -> UnitaryMatrix {
        UnitaryMatrix::new(m).unwrap()
    }

    fn setup(rho: DensityOperator, e: QuantumChannel) -> CompassSetup {
        CompassSetup::new(Dynamics::new(rho, e).unwrap())
    }

    #[test]
    fn compass_marginal_is_fp_product() {
        let s = setup(DensityOperator::basis(2, 0).unwrap(), QuantumChannel::identity(2));
        let q = compass_qsot(&s).unwrap();
        let fp = star_fp(&QuantumChannel::identity(2), &DensityOperator::basis(2, 0).unwrap()).unwrap();
        let m = compass_marginal(&q, 2, 2).unwrap();
        assert!(m.max_abs_diff(fp.matrix()).unwrap() < 1e-14);
        assert!(q.matrix().is_hermitian(1e-14));
    }

    #[test]
    fn compass_interventions_examples() {
        let (vt, _) = compass_interventions(&UnitaryMatrix::identity(2), &UnitaryMatrix::identity(2)).unwrap();
        let want = pauli::id().tensor(&pauli::x());
        assert!(vt.max_abs_diff(&want.with_dims(vec![4]).unwrap()).unwrap() < 1e-15);
        let (vt, _) = compass_interventions(&u(pauli::z()), &UnitaryMatrix::identity(2)).unwrap();
        let want = pauli::z().tensor(&pauli::x());
        assert!(vt.max_abs_diff(&want.with_dims(vec![4]).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn compass_with_identities_gives_one() {
        let s = setup(DensityOperator::basis(2, 0).unwrap(), QuantumChannel::identity(2));
        let z = compass_interference(&s, &UnitaryMatrix::identity(2), &UnitaryMatrix::identity(2)).unwrap();
        assert!((z - 1.0).abs() < 1e-14);
    }

    #[test]
    fn recovers_left_product_of_random_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (da, db) in [(2, 2), (2, 3), (3, 2)] {
            let d = Dynamics::random(da, db, 2, &mut rng);
            let want = star_left(d.channel(), d.initial()).unwrap();
            let s = CompassSetup::new(d);
            let got = compass_recover_left(&s, &weyl_pair_basis(da, db)).unwrap();
            assert!(got.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn recovers_swap_over_two_for_identity_on_maximally_mixed() {
        let s = setup(DensityOperator::maximally_mixed(2), QuantumChannel::identity(2));
        let got = compass_recover_left(&s, &weyl_pair_basis(2, 2)).unwrap();
        let mut swap = ComplexMatrix::zeros(vec![2, 2]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = C64::new(0.5, 0.0);
            }
        }
        assert!(got.matrix().max_abs_diff(&swap).unwrap() < 1e-12);
    }

    #[test]
    fn incomplete_basis_is_rejected() {
        let s = setup(DensityOperator::maximally_mixed(2), QuantumChannel::identity(2));
        let basis: Vec<_> = weyl_pair_basis(2, 2).into_iter().take(15).collect();
        assert!(matches!(
            compass_recover_left(&s, &basis),
            Err(Error::NonSpanningBasis { rank: 15, needed: 16 })
        ));
    }

    #[test]
    fn overcomplete_basis_still_recovers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = Dynamics::random(2, 2, 1, &mut rng);
        let want = star_left(d.channel(), d.initial()).unwrap();
        let mut basis = weyl_pair_basis(2, 2);
        basis.push((random_unitary(2, &mut rng), random_unitary(2, &mut rng)));
        let got = compass_recover_left(&CompassSetup::new(d), &basis).unwrap();
        assert!(got.matrix().max_abs_diff(want.matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn distinct_channels_have_distinct_fp_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let rho = DensityOperator::random(2, &mut rng);
            let e1 = QuantumChannel::random(2, 2, 2, &mut rng);
            let e2 = QuantumChannel::random(2, 2, 2, &mut rng);
            let (dj, dfp) = fp_separation(&e1, &e2, &rho).unwrap();
            assert!(dj > 1e-3 && dfp > 1e-12);
        }
    }
}
