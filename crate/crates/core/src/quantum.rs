//! Density operators, channels and their dilations.
//!
//! A [`QuantumChannel`] is stored in Kraus form; the Jamiołkowski and Choi
//! operators are computed from the Kraus list on demand. Throughout the
//! crate the Jamiołkowski operator is
//!
//! ```text
//! J[E] = Σ_ij |i⟩⟨j|_A ⊗ E(|j⟩⟨i|)_B
//! ```
//!
//! which is the partial transpose on `A` of the Choi matrix. With this
//! convention `E(X) = Tr_A[(X ⊗ 1_B) J[E]]`, with no transpose on `X`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linops::{
    frobenius_distance, ComplexMatrix, RectMatrix, StateVector, UnitaryMatrix, C64,
    COMPARISON_TOL, CONSTRUCTION_TOL, I, ONE, ZERO,
};

/// Eigenvalues in `[-PSD_FLOOR, 0)` are treated as zero.
pub const PSD_FLOOR: f64 = 1e-10;

/// A Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "ComplexMatrix")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_error();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > CONSTRUCTION_TOL {
            return Err(Error::InvalidTrace(format!("{tr}")));
        }
        let min = matrix.min_eigenvalue();
        if min < -PSD_FLOOR {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self {
            matrix: psi.projector(),
        }
    }

    /// `|k⟩⟨k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        Ok(Self::pure(&StateVector::basis(vec![d], k)?))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::eye(d).scale_real(1.0 / d as f64),
        }
    }

    /// `|±⟩⟨±|` on a qubit.
    pub fn plus() -> Self {
        Self {
            matrix: ComplexMatrix::from_real(vec![2], &[0.5, 0.5, 0.5, 0.5]).unwrap(),
        }
    }

    pub fn minus() -> Self {
        Self {
            matrix: ComplexMatrix::from_real(vec![2], &[0.5, -0.5, -0.5, 0.5]).unwrap(),
        }
    }

    pub fn random(d: usize, rng: &mut impl Rng) -> Self {
        Self {
            matrix: crate::linops::random_density_matrix(d, rng),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.tensor(&other.matrix),
        }
    }
}

impl From<DensityOperator> for ComplexMatrix {
    fn from(d: DensityOperator) -> Self {
        d.matrix
    }
}

impl AsRef<ComplexMatrix> for DensityOperator {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// A completely positive, trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<RectMatrix>,
}

impl QuantumChannel {
    /// Validates shapes and `Σ K†K = 1` to within [`COMPARISON_TOL`].
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<RectMatrix>) -> Result<Self> {
        let map = Self::unchecked(in_dim, out_dim, kraus)?;
        let dev = map.trace_preservation_error();
        if dev > COMPARISON_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(map)
    }

    fn unchecked(in_dim: usize, out_dim: usize, kraus: Vec<RectMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Malformed("channel has no Kraus operators".into()));
        }
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(dim_mismatch(
                    format!("{out_dim}x{in_dim} Kraus operator"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
        })
    }

    /// Builds a channel from square Kraus operators on one system.
    pub fn from_square_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let d = kraus
            .first()
            .ok_or_else(|| Error::Malformed("channel has no Kraus operators".into()))?
            .dim();
        Self::new(d, d, kraus.iter().map(RectMatrix::from_square).collect())
    }

    pub fn unitary(u: &UnitaryMatrix) -> Self {
        let d = u.dim();
        Self::unchecked(d, d, vec![RectMatrix::from_square(u.matrix())]).expect("square unitary")
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(&UnitaryMatrix::identity(d))
    }

    pub fn pauli_x() -> Self {
        Self::unitary(&UnitaryMatrix::new(crate::linops::pauli::x()).unwrap())
    }

    pub fn pauli_y() -> Self {
        Self::unitary(&UnitaryMatrix::new(crate::linops::pauli::y()).unwrap())
    }

    pub fn pauli_z() -> Self {
        Self::unitary(&UnitaryMatrix::new(crate::linops::pauli::z()).unwrap())
    }

    /// Conjugation by `exp(-iθY/2)`.
    pub fn rotation_y(theta: f64) -> Self {
        Self::unitary(&rotation_y_unitary(theta))
    }

    /// Conjugation by `exp(-iθZ/2)`.
    pub fn rotation_z(theta: f64) -> Self {
        Self::unitary(&rotation_z_unitary(theta))
    }

    /// Equal mixture of the rotations by `θ` and `-θ` about `z`; scales the
    /// off-diagonal entries by `cos θ`.
    pub fn dephasing(theta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let k0 = rotation_z_unitary(theta).matrix().scale_real(s);
        let k1 = rotation_z_unitary(-theta).matrix().scale_real(s);
        Self::from_square_kraus(&[k0, k1]).expect("valid Kraus pair")
    }

    /// `ρ ↦ (1-p)ρ + p·Tr(ρ)·1/d`, written with the Weyl operators.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Malformed(format!("depolarizing strength {p} outside [0,1]")));
        }
        let basis = crate::tomography::weyl_basis(d);
        let d2 = (d * d) as f64;
        let kraus: Vec<ComplexMatrix> = basis
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let weight = if k == 0 { 1.0 - p + p / d2 } else { p / d2 };
                w.matrix().scale_real(weight.sqrt())
            })
            .collect();
        Self::from_square_kraus(&kraus)
    }

    /// Random channel with `rank` Kraus operators: Gaussian `G_k`
    /// normalized by `(Σ G†G)^{-1/2}`. The rank is raised to
    /// `⌈in_dim / out_dim⌉` when needed, since fewer operators cannot be
    /// trace preserving.
    pub fn random(in_dim: usize, out_dim: usize, rank: usize, rng: &mut impl Rng) -> Self {
        let rank = rank.max(in_dim.div_ceil(out_dim)).max(1);
        let gs: Vec<RectMatrix> = (0..rank)
            .map(|_| {
                RectMatrix::from_fn(out_dim, in_dim, |_, _| {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .expect("positive dims")
            })
            .collect();
        let mut s = ComplexMatrix::zeros(vec![in_dim]).expect("positive dims");
        for g in &gs {
            s += &g.gram();
        }
        let (vals, vecs) = s.eigh();
        let inv_sqrt = ComplexMatrix::from_fn(vec![in_dim], |i, j| {
            (0..in_dim)
                .map(|k| vecs.get(i, k) * vecs.get(j, k).conj() / vals[k].sqrt())
                .sum()
        })
        .expect("positive dims");
        let inv_sqrt = RectMatrix::from_square(&inv_sqrt);
        let kraus = gs
            .iter()
            .map(|g| g.matmul(&inv_sqrt).expect("shapes agree"))
            .collect();
        Self::new(in_dim, out_dim, kraus).expect("normalized by construction")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[RectMatrix] {
        &self.kraus
    }

    pub fn kraus_rank(&self) -> usize {
        self.kraus.len()
    }

    /// Frobenius norm of `Σ K†K − 1`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(vec![self.in_dim]).expect("positive dims");
        for k in &self.kraus {
            s += &k.gram();
        }
        frobenius_distance(&s, &ComplexMatrix::eye(self.in_dim)).expect("same size")
    }

    /// `Σ_k K_k ρ K_k†`. `ρ` need not be positive or Hermitian.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.in_dim {
            return Err(dim_mismatch(self.in_dim, rho.dim()));
        }
        let mut out = ComplexMatrix::zeros(vec![self.out_dim])?;
        for k in &self.kraus {
            out += &k.sandwich(rho)?;
        }
        Ok(out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if next.in_dim != self.out_dim {
            return Err(dim_mismatch(self.out_dim, next.in_dim));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b.matmul(a)?);
            }
        }
        Self::unchecked(self.in_dim, next.out_dim, kraus)
    }

    /// `self ⊗ other` acting on `in ⊗ in'`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.tensor(b));
            }
        }
        Self {
            in_dim: self.in_dim * other.in_dim,
            out_dim: self.out_dim * other.out_dim,
            kraus,
        }
    }

    /// `J[E] = Σ_ij |i⟩⟨j| ⊗ E(|j⟩⟨i|)`, with dims `[in, out]`.
    pub fn jamiolkowski(&self) -> ComplexMatrix {
        self.block_operator(true)
    }

    /// `C[E] = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, with dims `[in, out]`.
    pub fn choi(&self) -> ComplexMatrix {
        self.block_operator(false)
    }

    fn block_operator(&self, swapped: bool) -> ComplexMatrix {
        let (din, dout) = (self.in_dim, self.out_dim);
        let mut m = ComplexMatrix::zeros(vec![din, dout]).expect("positive dims");
        for i in 0..din {
            for j in 0..din {
                let (r, c) = if swapped { (j, i) } else { (i, j) };
                let unit = ComplexMatrix::unit(vec![din], r, c).expect("in range");
                let block = self.apply(&unit).expect("dims agree");
                for a in 0..dout {
                    for b in 0..dout {
                        m[(i * dout + a, j * dout + b)] = block.get(a, b);
                    }
                }
            }
        }
        m
    }

    /// Checks trace preservation and positivity of the Choi matrix.
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.trace_preservation_error() <= tol && self.choi().min_eigenvalue() >= -tol
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            in_dim: usize,
            out_dim: usize,
            kraus: Vec<RectMatrix>,
        }
        let raw = Raw::deserialize(d)?;
        QuantumChannel::new(raw.in_dim, raw.out_dim, raw.kraus).map_err(serde::de::Error::custom)
    }
}

pub fn rotation_y_unitary(theta: f64) -> UnitaryMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    UnitaryMatrix::new(ComplexMatrix::from_real(vec![2], &[c, -s, s, c]).unwrap())
        .expect("rotation is unitary")
}

pub fn rotation_z_unitary(theta: f64) -> UnitaryMatrix {
    let m = ComplexMatrix::new(
        vec![2],
        vec![(-I * theta / 2.0).exp(), ZERO, ZERO, (I * theta / 2.0).exp()],
    )
    .unwrap();
    UnitaryMatrix::new(m).expect("rotation is unitary")
}

/// A linear map between operator spaces, stored by its Jamiołkowski
/// operator. Unlike [`QuantumChannel`] it need not be completely positive
/// or trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    in_dim: usize,
    out_dim: usize,
    jamiolkowski: ComplexMatrix,
}

impl LinearMap {
    pub fn from_channel(e: &QuantumChannel) -> Self {
        Self {
            in_dim: e.in_dim,
            out_dim: e.out_dim,
            jamiolkowski: e.jamiolkowski(),
        }
    }

    /// The map `X ↦ Σ K X K†` without any normalization requirement.
    pub fn from_kraus(kraus: &[RectMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Malformed("no Kraus operators".into()))?;
        let ch = QuantumChannel::unchecked(first.cols(), first.rows(), kraus.to_vec())?;
        Ok(Self::from_channel(&ch))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn jamiolkowski(&self) -> &ComplexMatrix {
        &self.jamiolkowski
    }

    /// `Tr_A[(X ⊗ 1) J]`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.in_dim {
            return Err(dim_mismatch(self.in_dim, x.dim()));
        }
        let (din, dout) = (self.in_dim, self.out_dim);
        ComplexMatrix::from_fn(vec![dout], |a, b| {
            let mut acc = ZERO;
            for i in 0..din {
                for j in 0..din {
                    let xij = x.get(i, j);
                    if xij != ZERO {
                        acc += xij * self.jamiolkowski.get(j * dout + a, i * dout + b);
                    }
                }
            }
            acc
        })
    }

    /// `self ⊗ other`: its Jamiołkowski operator is `J ⊗ J'` with the
    /// factors reordered to `(A A', B B')`.
    pub fn tensor(&self, other: &Self) -> Self {
        let j = self
            .jamiolkowski
            .clone()
            .with_dims(vec![self.in_dim, self.out_dim])
            .expect("sizes agree")
            .tensor(
                &other
                    .jamiolkowski
                    .clone()
                    .with_dims(vec![other.in_dim, other.out_dim])
                    .expect("sizes agree"),
            )
            .permute(&[0, 2, 1, 3])
            .expect("four factors");
        let in_dim = self.in_dim * other.in_dim;
        let out_dim = self.out_dim * other.out_dim;
        Self {
            in_dim,
            out_dim,
            jamiolkowski: j.with_dims(vec![in_dim, out_dim]).expect("sizes agree"),
        }
    }
}

/// Recovers the linear map whose Jamiołkowski operator is `j`.
pub fn inverse_jamiolkowski(j: &ComplexMatrix, in_dim: usize, out_dim: usize) -> Result<LinearMap> {
    if in_dim == 0 || out_dim == 0 || j.dim() != in_dim * out_dim {
        return Err(dim_mismatch(
            format!("operator on {in_dim}x{out_dim}"),
            format!("dimension {}", j.dim()),
        ));
    }
    Ok(LinearMap {
        in_dim,
        out_dim,
        jamiolkowski: j.clone().with_dims(vec![in_dim, out_dim])?,
    })
}

/// Initial state plus channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DynamicsJson")]
pub struct Dynamics {
    #[serde(rename = "state")]
    initial: DensityOperator,
    channel: QuantumChannel,
}

#[derive(Deserialize)]
struct DynamicsJson {
    state: DensityOperator,
    channel: QuantumChannel,
}

impl TryFrom<DynamicsJson> for Dynamics {
    type Error = Error;
    fn try_from(d: DynamicsJson) -> Result<Self> {
        Dynamics::new(d.state, d.channel)
    }
}

impl Dynamics {
    pub fn new(initial: DensityOperator, channel: QuantumChannel) -> Result<Self> {
        if channel.in_dim() != initial.dim() {
            return Err(dim_mismatch(channel.in_dim(), initial.dim()));
        }
        Ok(Self { initial, channel })
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn random(d_in: usize, d_out: usize, rank: usize, rng: &mut impl Rng) -> Self {
        let rho = DensityOperator::random(d_in, rng);
        let e = QuantumChannel::random(d_in, d_out, rank, rng);
        Self::new(rho, e).expect("dims agree")
    }
}

/// Eigen-decomposition of a Hermitian PSD operator with small negative
/// eigenvalues clamped to zero.
fn psd_spectrum(rho: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let herm = rho.hermiticity_error();
    if herm > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let (mut vals, vecs) = rho.eigh();
    for v in vals.iter_mut() {
        if *v < -PSD_FLOOR {
            return Err(Error::NotPsd(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((vals, vecs))
}

/// Purification `|φ⟩` on `S ⊗ E` with `Tr_E |φ⟩⟨φ| = ρ`. The environment
/// dimension is the number of eigenvalues above `1e-14`.
pub fn purify(rho: &ComplexMatrix) -> Result<StateVector> {
    let (vals, vecs) = psd_spectrum(rho)?;
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&k| vals[k] > 1e-14).collect();
    if support.is_empty() {
        return Err(Error::InvalidTrace("zero operator cannot be purified".into()));
    }
    let de = support.len();
    let mut amps = vec![ZERO; d * de];
    for (e, &k) in support.iter().enumerate() {
        let w = vals[k].sqrt();
        for s in 0..d {
            amps[s * de + e] = vecs.get(s, k) * w;
        }
    }
    // renormalize away the dropped eigenvalue mass and rounding
    StateVector::normalized(vec![d, de], amps)
}

/// A unitary `U: A⊗K → B⊗K'` with `E(ρ) = Tr_{K'}[U(ρ⊗|0⟩⟨0|_K)U†]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dilation {
    unitary: UnitaryMatrix,
    in_dim: usize,
    env_in: usize,
    out_dim: usize,
    env_out: usize,
}

impl Dilation {
    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Dimension of the ancilla `K` fed in alongside the input.
    pub fn env_in_dim(&self) -> usize {
        self.env_in
    }

    /// Dimension of the environment `K'` discarded at the output.
    pub fn env_out_dim(&self) -> usize {
        self.env_out
    }

    /// The ancilla state `|0⟩⟨0|_K`.
    pub fn ancilla(&self) -> DensityOperator {
        DensityOperator::basis(self.env_in, 0).expect("positive dim")
    }

    /// `Tr_{K'}[U(ρ⊗τ)U†]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.in_dim {
            return Err(dim_mismatch(self.in_dim, rho.dim()));
        }
        let big = rho.tensor(self.ancilla().matrix());
        let u = self.unitary.matrix();
        let out = (&(u * &big) * &u.dagger()).with_dims(vec![self.out_dim, self.env_out])?;
        let r = out.partial_trace(&[0])?;
        Ok(r)
    }

    /// Same isometric part, with the columns that the ancilla never reaches
    /// mixed by a random unitary. Gives a different, equally valid dilation.
    pub fn with_random_completion(&self, rng: &mut impl Rng) -> Self {
        let n = self.unitary.dim();
        let free: Vec<usize> = (0..n).filter(|c| c % self.env_in != 0).collect();
        if free.is_empty() {
            return self.clone();
        }
        let q = crate::linops::random_unitary(free.len(), rng);
        let mut mix = ComplexMatrix::eye(n);
        for (a, &ca) in free.iter().enumerate() {
            for (b, &cb) in free.iter().enumerate() {
                mix[(ca, cb)] = q.get(a, b);
            }
        }
        let u = self.unitary.matrix() * &mix;
        Self {
            unitary: UnitaryMatrix::with_tolerance(u, COMPARISON_TOL).expect("product of unitaries"),
            ..self.clone()
        }
    }
}

/// Stinespring dilation with ancilla `|0⟩⟨0|` of dimension equal to the Kraus
/// rank (times `d_B` when the input and output dimensions differ, so that
/// `U` is square). Columns outside the isometric part are filled by
/// Gram–Schmidt over the standard basis, in index order.
pub fn stinespring(e: &QuantumChannel) -> Result<Dilation> {
    let dev = e.trace_preservation_error();
    if dev > COMPARISON_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    let (da, db, r) = (e.in_dim(), e.out_dim(), e.kraus_rank());
    let (env_in, env_out) = if da == db { (r, r) } else { (db * r, da * r) };
    let n = da * env_in;
    debug_assert_eq!(n, db * env_out);

    let mut cols: Vec<Option<Vec<C64>>> = vec![None; n];
    for a in 0..da {
        let mut v = vec![ZERO; n];
        for (k, kr) in e.kraus().iter().enumerate() {
            for b in 0..db {
                v[b * env_out + k] = kr.get(b, a);
            }
        }
        cols[a * env_in] = Some(v);
    }
    let mut basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
    let mut candidates = 0..n;
    for slot in cols.iter_mut().filter(|c| c.is_none()) {
        loop {
            let idx = candidates
                .next()
                .ok_or_else(|| Error::ComputationFault("unitary completion ran out of candidates".into()))?;
            let mut v = vec![ZERO; n];
            v[idx] = ONE;
            // two passes of modified Gram–Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= proj * bi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    let cols: Vec<Vec<C64>> = cols.into_iter().map(|c| c.expect("filled")).collect();
    let u = ComplexMatrix::from_fn(vec![n], |i, j| cols[j][i])?;
    let unitary = UnitaryMatrix::with_tolerance(u, COMPARISON_TOL)?;
    Ok(Dilation {
        unitary,
        in_dim: da,
        env_in,
        out_dim: db,
        env_out,
    })
}
