//! Two-arm interferometry.
//!
//! A probe qubit `R` prepared in `α₀|0⟩ + α₁|1⟩` routes the system through
//! two arms: arm 0 leaves it alone, arm 1 applies `V` before the dynamics
//! and `W` after. Measuring `R` in `{|b₊⟩, |b₋⟩}` gives
//!
//! ```text
//! Pr(±) = S± + 2 Re[A± I]
//! S± = |α₀⟨b±|0⟩|² + |α₁⟨b±|1⟩|²
//! A± = α₀* α₁ ⟨0|b±⟩⟨b±|1⟩
//! ```
//!
//! where `I` is the interference term. The closed forms for `I` are checked
//! against a full state-vector simulation: purify the initial state, dilate
//! the channel, run both arms and take the norms of the projected branches.

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linops::{ComplexMatrix, StateVector, UnitaryMatrix, C64, COMPARISON_TOL, CONSTRUCTION_TOL, ZERO};
use crate::qsot::{product, ProductKind};
use crate::quantum::{purify, stinespring, Dilation, Dynamics};

/// Disagreement between independent evaluations that is treated as a bug
/// rather than rounding.
pub const FAULT_TOL: f64 = 1e-8;

/// Probe amplitudes and measurement basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbeJson", into = "ProbeJson")]
pub struct ProbeConfig {
    alpha0: C64,
    alpha1: C64,
    basis_plus: StateVector,
    basis_minus: StateVector,
}

/// `S±` and `A±` of a probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeCoefficients {
    pub s_plus: f64,
    pub s_minus: f64,
    pub a_plus: C64,
    pub a_minus: C64,
}

impl ProbeConfig {
    pub fn new(alpha0: C64, alpha1: C64, basis_plus: StateVector, basis_minus: StateVector) -> Result<Self> {
        let norm = alpha0.norm_sqr() + alpha1.norm_sqr();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidProbe(format!("|α₀|²+|α₁|² = {norm}")));
        }
        if basis_plus.dim() != 2 || basis_minus.dim() != 2 {
            return Err(Error::InvalidProbe("measurement basis vectors must be 2-dimensional".into()));
        }
        let overlap = basis_plus.inner(&basis_minus)?;
        if overlap.norm() > CONSTRUCTION_TOL {
            return Err(Error::InvalidProbe(format!("⟨b₊|b₋⟩ = {overlap}")));
        }
        Ok(Self {
            alpha0,
            alpha1,
            basis_plus,
            basis_minus,
        })
    }

    /// `α₀ = α₁ = 1/√2`, `b± = (|0⟩ ± |1⟩)/√2`: `S± = ½`, `A± = ±¼`.
    pub fn max_visibility() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            alpha0: h,
            alpha1: h,
            basis_plus: StateVector::new(vec![2], vec![h, h]).expect("normalized"),
            basis_minus: StateVector::new(vec![2], vec![h, -h]).expect("normalized"),
        }
    }

    /// Random amplitudes and a random orthonormal measurement basis.
    pub fn random(rng: &mut impl Rng) -> Self {
        let a = crate::linops::random_state_vector(vec![2], rng).expect("dims valid");
        let u = crate::linops::random_unitary(2, rng);
        let b = |k: usize| StateVector::normalized(vec![2], u.column(k)).expect("unitary column");
        Self::new(a.amplitudes()[0], a.amplitudes()[1], b(0), b(1)).expect("valid by construction")
    }

    pub fn alpha0(&self) -> C64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> C64 {
        self.alpha1
    }

    pub fn basis_plus(&self) -> &StateVector {
        &self.basis_plus
    }

    pub fn basis_minus(&self) -> &StateVector {
        &self.basis_minus
    }

    pub fn coefficients(&self) -> ProbeCoefficients {
        let s = |b: &StateVector| {
            let (b0, b1) = (b.amplitudes()[0], b.amplitudes()[1]);
            (self.alpha0 * b0.conj()).norm_sqr() + (self.alpha1 * b1.conj()).norm_sqr()
        };
        let a = |b: &StateVector| {
            let (b0, b1) = (b.amplitudes()[0], b.amplitudes()[1]);
            self.alpha0.conj() * self.alpha1 * b0 * b1.conj()
        };
        ProbeCoefficients {
            s_plus: s(&self.basis_plus),
            s_minus: s(&self.basis_minus),
            a_plus: a(&self.basis_plus),
            a_minus: a(&self.basis_minus),
        }
    }

    /// `(⟨b|0⟩α₀, ⟨b|1⟩α₁)` for each outcome.
    fn branch_weights(&self) -> [(C64, C64); 2] {
        [&self.basis_plus, &self.basis_minus].map(|b| {
            let (b0, b1) = (b.amplitudes()[0], b.amplitudes()[1]);
            (b0.conj() * self.alpha0, b1.conj() * self.alpha1)
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ProbeJson {
    alpha0: C64,
    alpha1: C64,
    basis_plus: [C64; 2],
    basis_minus: [C64; 2],
}

impl TryFrom<ProbeJson> for ProbeConfig {
    type Error = Error;
    fn try_from(p: ProbeJson) -> Result<Self> {
        let plus = StateVector::new(vec![2], p.basis_plus.to_vec())?;
        let minus = StateVector::new(vec![2], p.basis_minus.to_vec())?;
        ProbeConfig::new(p.alpha0, p.alpha1, plus, minus)
    }
}

impl From<ProbeConfig> for ProbeJson {
    fn from(p: ProbeConfig) -> Self {
        let arr = |s: &StateVector| [s.amplitudes()[0], s.amplitudes()[1]];
        ProbeJson {
            alpha0: p.alpha0,
            alpha1: p.alpha1,
            basis_plus: arr(&p.basis_plus),
            basis_minus: arr(&p.basis_minus),
        }
    }
}

/// One unitary per region, in region order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Intervention(Vec<UnitaryMatrix>);

impl Intervention {
    pub fn new(unitaries: Vec<UnitaryMatrix>) -> Self {
        Self(unitaries)
    }

    pub fn pair(v: UnitaryMatrix, w: UnitaryMatrix) -> Self {
        Self(vec![v, w])
    }

    /// Identity on every region.
    pub fn identity(dims: &[usize]) -> Self {
        Self(dims.iter().map(|&d| UnitaryMatrix::identity(d)).collect())
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.0
    }

    pub fn regions(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(|u| u.dim()).collect()
    }

    /// `V₁ ⊗ ⋯ ⊗ V_n` with one dims entry per region.
    pub fn operator(&self) -> ComplexMatrix {
        let mut it = self.0.iter();
        let first = it.next().expect("at least one region").matrix().clone();
        it.fold(first.with_dims(vec![self.0[0].dim()]).expect("dims"), |acc, u| {
            acc.tensor(&u.matrix().clone().with_dims(vec![u.dim()]).expect("dims"))
        })
    }

    /// Multiplies the first region's unitary by a unit-modulus phase.
    pub fn with_first_phase(&self, phase: C64) -> Self {
        let mut v = self.0.clone();
        v[0] = v[0].phased(phase);
        Self(v)
    }
}

/// The interference term and the two outcome probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRecord {
    pub interference: C64,
    pub prob_plus: f64,
    pub prob_minus: f64,
}

impl InterferenceRecord {
    /// Probabilities from the closed form.
    pub fn from_probe(probe: &ProbeConfig, interference: C64) -> Self {
        let (prob_plus, prob_minus) = probabilities(probe, interference);
        Self {
            interference,
            prob_plus,
            prob_minus,
        }
    }
}

/// `Tr[(V₁⊗⋯⊗V_n) q]`.
pub fn interference_from_qsot(q: &impl AsRef<ComplexMatrix>, iv: &Intervention) -> Result<C64> {
    let q = q.as_ref();
    if q.dims() != iv.dims().as_slice() {
        return Err(dim_mismatch(format!("{:?}", q.dims()), format!("intervention dims {:?}", iv.dims())));
    }
    iv.operator().trace_product(q)
}

/// `p± = S± + 2 Re[A± I]`. Negative values are returned as computed.
pub fn probabilities(probe: &ProbeConfig, interference: C64) -> (f64, f64) {
    let c = probe.coefficients();
    (
        c.s_plus + 2.0 * (c.a_plus * interference).re,
        c.s_minus + 2.0 * (c.a_minus * interference).re,
    )
}

/// `(op ⊗ 1_rest) v`.
fn apply_front(op: &ComplexMatrix, v: &[C64], rest: usize) -> Vec<C64> {
    let n = op.dim();
    debug_assert_eq!(v.len(), n * rest);
    let mut out = vec![ZERO; n * rest];
    for i in 0..n {
        for j in 0..n {
            let a = op.get(i, j);
            if a == ZERO {
                continue;
            }
            for r in 0..rest {
                out[i * rest + r] += a * v[j * rest + r];
            }
        }
    }
    out
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Runs the probe on the two arm states and measures `R`.
fn measure_arms(probe: &ProbeConfig, arm0: &[C64], arm1: &[C64]) -> InterferenceRecord {
    let [p, m] = probe.branch_weights().map(|(c0, c1)| {
        arm0.iter()
            .zip(arm1)
            .map(|(x, y)| (c0 * x + c1 * y).norm_sqr())
            .sum::<f64>()
    });
    InterferenceRecord {
        interference: inner(arm0, arm1),
        prob_plus: p,
        prob_minus: m,
    }
}

/// `|ψ⟩_{AE}` with the ancilla `|0⟩_K` inserted, ordered `(A, K, E)`.
fn dilated_input(psi: &StateVector, env_in: usize) -> Vec<C64> {
    let (da, de) = (psi.dims()[0], psi.dims()[1]);
    let mut v = vec![ZERO; da * env_in * de];
    for a in 0..da {
        for e in 0..de {
            v[(a * env_in) * de + e] = psi.amplitudes()[a * de + e];
        }
    }
    v
}

fn check_temporal_dims(dynamics: &Dynamics, v: &UnitaryMatrix, w: &UnitaryMatrix) -> Result<()> {
    let c = dynamics.channel();
    if v.dim() != c.in_dim() {
        return Err(dim_mismatch(format!("V of dimension {}", c.in_dim()), v.dim()));
    }
    if w.dim() != c.out_dim() {
        return Err(dim_mismatch(format!("W of dimension {}", c.out_dim()), w.dim()));
    }
    Ok(())
}

/// Forward-time run: arm 0 is `U|ψ,0⟩`, arm 1 is `W U V|ψ,0⟩`.
pub fn temporal_oracle(
    dynamics: &Dynamics,
    dilation: &Dilation,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<InterferenceRecord> {
    check_temporal_dims(dynamics, v, w)?;
    let psi = purify(dynamics.initial().matrix())?;
    let de = psi.dims()[1];
    let (ki, ko) = (dilation.env_in_dim(), dilation.env_out_dim());
    let start = dilated_input(&psi, ki);
    let u = dilation.unitary().matrix();
    let arm0 = apply_front(u, &start, de);
    let arm1 = apply_front(v.matrix(), &start, ki * de);
    let arm1 = apply_front(u, &arm1, de);
    let arm1 = apply_front(w.matrix(), &arm1, ko * de);
    Ok(measure_arms(probe, &arm0, &arm1))
}

/// Reversed-time run: initial state `σ = U(ρ⊗τ)U†` on `B⊗K'`, dynamics
/// `U†`, `W` applied first and `V ⊗ 1_K` after.
pub fn reversed_oracle(
    dynamics: &Dynamics,
    dilation: &Dilation,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<InterferenceRecord> {
    check_temporal_dims(dynamics, v, w)?;
    let u = dilation.unitary().matrix();
    let (ki, ko) = (dilation.env_in_dim(), dilation.env_out_dim());
    let big = dynamics.initial().matrix().tensor(dilation.ancilla().matrix());
    let sigma = (&(u * &big) * &u.dagger()).hermitian_part();
    let chi = purify(&sigma)?;
    let df = chi.dims()[1];
    let start = chi.amplitudes();
    let ud = u.dagger();
    let arm0 = apply_front(&ud, start, df);
    let arm1 = apply_front(w.matrix(), start, ko * df);
    let arm1 = apply_front(&ud, &arm1, df);
    let arm1 = apply_front(v.matrix(), &arm1, ki * df);
    Ok(measure_arms(probe, &arm0, &arm1))
}

fn fault_if_apart(what: &str, a: C64, b: C64) -> Result<()> {
    let d = (a - b).norm();
    if d > FAULT_TOL {
        return Err(Error::ComputationFault(format!("{what}: {a} vs {b} (|Δ| = {d:.3e})")));
    }
    Ok(())
}

/// The three evaluations of the temporal interference term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemporalPaths {
    /// `Tr[W E(Vρ)]`
    pub direct: C64,
    /// `Tr[(V⊗W)(E ⋆_L ρ)]`
    pub left_product: C64,
    /// State-vector simulation.
    pub oracle: InterferenceRecord,
}

impl TemporalPaths {
    pub fn max_disagreement(&self) -> f64 {
        let o = self.oracle.interference;
        (self.direct - self.left_product)
            .norm()
            .max((self.direct - o).norm())
            .max((self.left_product - o).norm())
    }
}

pub fn temporal_paths(
    dynamics: &Dynamics,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<TemporalPaths> {
    check_temporal_dims(dynamics, v, w)?;
    let (rho, e) = (dynamics.initial().matrix(), dynamics.channel());
    let vr = v.matrix().matmul(rho)?;
    let direct = w.matrix().trace_product(&e.apply(&vr)?)?;
    let left = product(ProductKind::Left, e, rho)?;
    let left_product = interference_from_qsot(&left, &Intervention::pair(v.clone(), w.clone()))?;
    let oracle = temporal_oracle(dynamics, &stinespring(e)?, v, w, probe)?;
    Ok(TemporalPaths {
        direct,
        left_product,
        oracle,
    })
}

/// Forward-time interferometry of `(ρ, E)`. Returns the state-vector result
/// after checking it against both closed forms.
pub fn simulate_temporal(
    dynamics: &Dynamics,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<InterferenceRecord> {
    let paths = temporal_paths(dynamics, v, w, probe)?;
    fault_if_apart("Tr[W E(Vρ)] vs left product", paths.direct, paths.left_product)?;
    fault_if_apart("left product vs state-vector oracle", paths.left_product, paths.oracle.interference)?;
    Ok(paths.oracle)
}

/// Spatial interferometry on a bipartite state: `I = Tr[(V⊗W) ρ_AB]`.
pub fn simulate_spatial(
    rho_ab: &ComplexMatrix,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<InterferenceRecord> {
    if rho_ab.dims() != [v.dim(), w.dim()] {
        return Err(dim_mismatch(
            format!("state dims [{}, {}]", v.dim(), w.dim()),
            format!("{:?}", rho_ab.dims()),
        ));
    }
    let formula = interference_from_qsot(rho_ab, &Intervention::pair(v.clone(), w.clone()))?;
    let psi = purify(rho_ab)?;
    let de = psi.dims()[1];
    let vw = v.matrix().tensor(w.matrix());
    let arm0 = psi.amplitudes().to_vec();
    let arm1 = apply_front(&vw, &arm0, de);
    let rec = measure_arms(probe, &arm0, &arm1);
    fault_if_apart("Tr[(V⊗W)ρ] vs state-vector oracle", formula, rec.interference)?;
    Ok(rec)
}

/// Both branches of a time-reversal-symmetric run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeReversedRun {
    pub forward: InterferenceRecord,
    pub reversed: InterferenceRecord,
    /// Equal mixture of the two branches.
    pub mixed: InterferenceRecord,
}

/// Time-reversal-symmetric interferometry with the canonical dilation.
pub fn simulate_time_reversed(
    dynamics: &Dynamics,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<InterferenceRecord> {
    let dil = stinespring(dynamics.channel())?;
    Ok(simulate_time_reversed_with(dynamics, &dil, v, w, probe)?.mixed)
}

/// Forward and reversed dilated runs mixed with equal weight, checked
/// against `Tr[(V⊗W)(E⋆_FP ρ)]` and, for the reversed branch alone,
/// `Tr[(V⊗W)(E⋆_R ρ)]`.
pub fn simulate_time_reversed_with(
    dynamics: &Dynamics,
    dilation: &Dilation,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
) -> Result<TimeReversedRun> {
    let forward = temporal_oracle(dynamics, dilation, v, w, probe)?;
    let reversed = reversed_oracle(dynamics, dilation, v, w, probe)?;
    let mixed = InterferenceRecord {
        interference: (forward.interference + reversed.interference) * 0.5,
        prob_plus: 0.5 * (forward.prob_plus + reversed.prob_plus),
        prob_minus: 0.5 * (forward.prob_minus + reversed.prob_minus),
    };
    let (rho, e) = (dynamics.initial().matrix(), dynamics.channel());
    let iv = Intervention::pair(v.clone(), w.clone());
    let right = interference_from_qsot(&product(ProductKind::Right, e, rho)?, &iv)?;
    let fp = interference_from_qsot(&product(ProductKind::Fp, e, rho)?, &iv)?;
    fault_if_apart("reversed branch vs right product", reversed.interference, right)?;
    fault_if_apart("mixed branches vs FP product", mixed.interference, fp)?;
    Ok(TimeReversedRun {
        forward,
        reversed,
        mixed,
    })
}

/// `M± = Herm[S± 1 + 2A± (V⊗W)]`, with `Pr(±) = Tr[M± (E⋆_FP ρ)]`.
pub fn povm_elements(
    probe: &ProbeConfig,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let c = probe.coefficients();
    let vw = v.matrix().tensor(w.matrix());
    let id = ComplexMatrix::identity(vw.dims().to_vec()).expect("dims valid");
    let make = |s: f64, a: C64| (&id.scale_real(s) + &vw.scale(a * 2.0)).hermitian_part();
    (make(c.s_plus, c.a_plus), make(c.s_minus, c.a_minus))
}

/// Binomial outcome counts `(n₊, n₋)` with `n₊ + n₋ = shots`.
pub fn sample(record: &InterferenceRecord, shots: u64, rng: &mut impl Rng) -> Result<(u64, u64)> {
    for (p, ctx) in [(record.prob_plus, "p₊"), (record.prob_minus, "p₋")] {
        if p < -CONSTRUCTION_TOL || p.is_nan() {
            return Err(Error::NegativeProbability {
                value: p,
                context: format!("{ctx} for I = {}", record.interference),
            });
        }
    }
    if shots == 0 {
        return Ok((0, 0));
    }
    let p = record.prob_plus.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p).map_err(|e| Error::ComputationFault(e.to_string()))?;
    let n = dist.sample(rng);
    Ok((n, shots - n))
}

/// One row of a sweep over interventions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub intervention_id: usize,
    pub re_i: f64,
    pub im_i: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub shots: u64,
    pub seed: u64,
}

/// Simulates every `(V, W)` pair; task `k` samples from ChaCha stream `k`
/// of `seed`, so output does not depend on scheduling.
pub fn sweep(
    dynamics: &Dynamics,
    pairs: &[(UnitaryMatrix, UnitaryMatrix)],
    probe: &ProbeConfig,
    time_reversed: bool,
    shots: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    pairs
        .par_iter()
        .enumerate()
        .map(|(k, (v, w))| {
            let rec = if time_reversed {
                simulate_time_reversed(dynamics, v, w, probe)?
            } else {
                simulate_temporal(dynamics, v, w, probe)?
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let (n_plus, n_minus) = sample(&rec, shots, &mut rng)?;
            Ok(SweepRow {
                intervention_id: k,
                re_i: rec.interference.re,
                im_i: rec.interference.im,
                p_plus: rec.prob_plus,
                p_minus: rec.prob_minus,
                n_plus,
                n_minus,
                shots,
                seed,
            })
        })
        .collect()
}

/// Checks the record invariants: `p₊ + p₋ = 1` and both nonnegative.
pub fn check_record(rec: &InterferenceRecord) -> Result<()> {
    let total = rec.prob_plus + rec.prob_minus;
    if (total - 1.0).abs() > COMPARISON_TOL {
        return Err(Error::ComputationFault(format!("p₊ + p₋ = {total}")));
    }
    if rec.prob_plus.min(rec.prob_minus) < -CONSTRUCTION_TOL {
        return Err(Error::NegativeProbability {
            value: rec.prob_plus.min(rec.prob_minus),
            context: "interference record".into(),
        });
    }
    Ok(())
}
