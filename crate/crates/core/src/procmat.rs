//! Process matrices for two labs.
//!
//! Alice's lab maps `A → A'` and Bob's maps `B → B'`; unprimed spaces are
//! lab inputs, primed spaces lab outputs. A process matrix `W` lives on
//! `A ⊗ A' ⊗ B ⊗ B'` (always in that order) and gives
//!
//! ```text
//! Pr(M) = Tr[J[M] W],    J[M] = (id ⊗ M)(SWAP)
//! ```
//!
//! for a map `M: AB → A'B'`. Its first-order part `W⁽¹⁾ = Tr_AB[SWAP · W]`
//! coincides with the left product for a causally ordered process.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linops::{ComplexMatrix, RectMatrix, UnitaryMatrix, C64, COMPARISON_TOL, ONE};
use crate::quantum::{inverse_jamiolkowski, Dynamics, LinearMap, QuantumChannel};
use crate::tomography::weyl_basis;

pub const SPACES: [&str; 4] = ["A", "A'", "B", "B'"];

/// Operator on `A ⊗ A' ⊗ B ⊗ B'`, Hermitian and normalized on product
/// channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessJson", into = "ProcessJson")]
pub struct ProcessMatrix {
    matrix: ComplexMatrix,
}

impl ProcessMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dims().len() != 4 {
            return Err(dim_mismatch("dims [A, A', B, B']", format!("{:?}", matrix.dims())));
        }
        let h = matrix.hermiticity_error();
        if h > COMPARISON_TOL {
            return Err(Error::NotHermitian(h));
        }
        let w = Self { matrix };
        let dev = w.normalization_error()?;
        if dev > COMPARISON_TOL {
            return Err(Error::InvalidTrace(format!(
                "Tr[J[M] W] deviates from 1 by {dev:.3e} on a product channel"
            )));
        }
        Ok(w)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `[d_A, d_A', d_B, d_B']`.
    pub fn dims(&self) -> [usize; 4] {
        let d = self.matrix.dims();
        [d[0], d[1], d[2], d[3]]
    }

    /// Largest `|Tr[J[M_A ⊗ M_B] W] − 1|` over a fixed family of product
    /// channels: replacement channels onto basis states, and Weyl unitary
    /// channels when a lab's input and output dimensions agree.
    pub fn normalization_error(&self) -> Result<f64> {
        let [da, da2, db, db2] = self.dims();
        let alice = test_channels(da, da2)?;
        let bob = test_channels(db, db2)?;
        let mut worst = 0.0f64;
        for a in &alice {
            for b in &bob {
                let m = LinearMap::from_channel(a).tensor(&LinearMap::from_channel(b));
                worst = worst.max((born(self, &m)? - ONE).norm());
            }
        }
        Ok(worst)
    }
}

fn test_channels(din: usize, dout: usize) -> Result<Vec<QuantumChannel>> {
    let mut out = Vec::new();
    for k in 0..dout {
        // X ↦ Tr[X] |k⟩⟨k|
        let kraus = (0..din)
            .map(|i| RectMatrix::from_fn(dout, din, |r, c| if r == k && c == i { ONE } else { C64::new(0.0, 0.0) }))
            .collect::<Result<Vec<_>>>()?;
        out.push(QuantumChannel::new(din, dout, kraus)?);
    }
    if din == dout {
        out.extend(weyl_basis(din).iter().map(QuantumChannel::unitary));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ProcessJson {
    spaces: Vec<String>,
    #[serde(flatten)]
    matrix: ComplexMatrix,
}

impl TryFrom<ProcessJson> for ProcessMatrix {
    type Error = Error;
    fn try_from(p: ProcessJson) -> Result<Self> {
        if p.spaces != SPACES {
            return Err(Error::Malformed(format!("expected spaces {SPACES:?}, found {:?}", p.spaces)));
        }
        ProcessMatrix::new(p.matrix)
    }
}

impl From<ProcessMatrix> for ProcessJson {
    fn from(w: ProcessMatrix) -> Self {
        ProcessJson {
            spaces: SPACES.iter().map(|s| s.to_string()).collect(),
            matrix: w.matrix,
        }
    }
}

/// `Tr[J[M] W]` for `M: AB → A'B'`.
pub fn born(w: &ProcessMatrix, m: &LinearMap) -> Result<C64> {
    let [da, da2, db, db2] = w.dims();
    if m.in_dim() != da * db || m.out_dim() != da2 * db2 {
        return Err(dim_mismatch(
            format!("map {}x{} -> {}x{}", da, db, da2, db2),
            format!("{} -> {}", m.in_dim(), m.out_dim()),
        ));
    }
    let j = m
        .jamiolkowski()
        .clone()
        .with_dims(vec![da, db, da2, db2])?
        .permute(&[0, 2, 1, 3])?;
    j.trace_product(&w.matrix)
}

/// Process matrix of `ρ` on `A`, Alice's output `A'` fed through `E` into
/// Bob's input `B`, and a free output `B'` of the same dimension as `B`.
///
/// Built by linear inversion over matrix units. For a unit `E_ab = |a⟩⟨b|`
/// the Born rule reads `Tr[E_ab W] = W[b, a]`, so each entry of `W` is the
/// composition functional `p̃(M_A, M_B) = Tr[M_B(E(M_A(ρ)))]` evaluated on
/// the pair of maps whose Jamiołkowski operators are the two tensor factors
/// of `E_ab` (a unit on `AA'` and a unit on `BB'`).
pub fn ordered_process_matrix(dynamics: &Dynamics) -> Result<ProcessMatrix> {
    let rho = dynamics.initial().matrix();
    let e = dynamics.channel();
    let (da, da2, db, db2) = (rho.dim(), e.in_dim(), e.out_dim(), e.out_dim());
    let (na, nb) = (da * da2, db * db2);

    // E(M_A(ρ)) for every unit on AA'
    let mut alice_out: Vec<ComplexMatrix> = Vec::with_capacity(na * na);
    for r in 0..na {
        for s in 0..na {
            let unit = ComplexMatrix::unit(vec![na], r, s)?;
            let ma = inverse_jamiolkowski(&unit, da, da2)?;
            alice_out.push(e.apply(&ma.apply(rho)?)?);
        }
    }
    // Tr[M_B(Y)] for every unit on BB'
    let mut bob_maps: Vec<LinearMap> = Vec::with_capacity(nb * nb);
    for r in 0..nb {
        for s in 0..nb {
            bob_maps.push(inverse_jamiolkowski(&ComplexMatrix::unit(vec![nb], r, s)?, db, db2)?);
        }
    }

    let n = na * nb;
    let mut w = ComplexMatrix::zeros(vec![da, da2, db, db2])?;
    for a1 in 0..na {
        for b1 in 0..na {
            let y = &alice_out[a1 * na + b1];
            for a2 in 0..nb {
                for b2 in 0..nb {
                    let p = bob_maps[a2 * nb + b2].apply(y)?.trace();
                    let (a, b) = (a1 * nb + a2, b1 * nb + b2);
                    w[(b, a)] = p;
                }
            }
        }
    }
    debug_assert_eq!(w.dim(), n);
    ProcessMatrix::new(w.hermitian_part())
}

/// `W⁽¹⁾ = Tr_AB[SWAP_AB · W]` on `A' ⊗ B'`, where `SWAP_AB` exchanges
/// each lab's input with its output.
pub fn first_order(w: &ProcessMatrix) -> Result<ComplexMatrix> {
    let [da, da2, db, db2] = w.dims();
    if da != da2 || db != db2 {
        return Err(dim_mismatch(
            "labs with equal input and output dimensions",
            format!("{:?}", w.dims()),
        ));
    }
    let swap = swap_ab(da, db)?;
    swap.matmul(&w.matrix)?.partial_trace(&[1, 3])
}

/// Swap of `A ↔ A'` and `B ↔ B'` in the order `(A, A', B, B')`.
fn swap_ab(da: usize, db: usize) -> Result<ComplexMatrix> {
    let s = |d: usize| {
        ComplexMatrix::from_fn(vec![d, d], |r, c| {
            let (i, j) = (r / d, r % d);
            if c == j * d + i {
                ONE
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    Ok(s(da)?.tensor(&s(db)?))
}

/// Result of comparing a weak measurement's exact probability with its
/// first-order approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakCheck {
    pub exact: f64,
    pub approx: f64,
    pub error: f64,
}

/// For `M(X) = p(1 − K/2) X (1 − K†/2)` on `AB → A'B'`, compares
/// `Tr[J[M] W]` with `Re Tr[p(1 − K) W⁽¹⁾]`.
pub fn weak_measurement_check(w: &ProcessMatrix, k: &ComplexMatrix, p: f64) -> Result<WeakCheck> {
    let [da, _, db, _] = w.dims();
    if k.dim() != da * db {
        return Err(dim_mismatch(da * db, k.dim()));
    }
    let k = k.clone().with_dims(vec![da, db])?;
    let id = ComplexMatrix::identity(vec![da, db])?;
    let kraus = (&id - &k.scale_real(0.5)).scale_real(p.sqrt());
    let effect = kraus.dagger().matmul(&kraus)?;
    let top = effect.hermitian_part().max_eigenvalue();
    if top > 1.0 + COMPARISON_TOL {
        return Err(Error::PovmExceedsIdentity(top));
    }
    let m = LinearMap::from_kraus(&[RectMatrix::from_square(&kraus)])?;
    let exact = born(w, &m)?.re;
    let w1 = first_order(w)?;
    let approx = (&id - &k).scale_real(p).trace_product(&w1)?.re;
    Ok(WeakCheck {
        exact,
        approx,
        error: (exact - approx).abs(),
    })
}

/// Outcome probabilities of max-visibility interferometry with `(V, W)`
/// through the Born rule, using Kraus operators `(1 ± V⊗W)/2`.
pub fn interferometric_probabilities(
    w: &ProcessMatrix,
    v: &UnitaryMatrix,
    wu: &UnitaryMatrix,
) -> Result<(f64, f64)> {
    let vw = v.matrix().tensor(wu.matrix());
    let id = ComplexMatrix::identity(vw.dims().to_vec())?;
    let mut out = [0.0; 2];
    for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
        let kraus = (&id + &vw.scale_real(sign)).scale_real(0.5);
        let m = LinearMap::from_kraus(&[RectMatrix::from_square(&kraus)])?;
        out[slot] = born(w, &m)?.re;
    }
    Ok((out[0], out[1]))
}
