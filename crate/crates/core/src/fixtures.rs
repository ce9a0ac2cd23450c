//! Worked qubit examples with their printed matrices.
//!
//! Each fixture pairs a recipe (a weighted list of channel/input terms and a
//! product kind) with the matrix it is expected to produce. The expected
//! matrices are typed in from their printed form and never computed by this
//! crate. Inputs are plain operators so that the off-diagonal units
//! `|0⟩⟨1|` and `|1⟩⟨0|` can be used through the linear extension of the
//! product.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Result};
use crate::linops::{ComplexMatrix, C64};
use crate::qsot::{product, ProductKind};
use crate::quantum::{DensityOperator, Dynamics, QuantumChannel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub channel: QuantumChannel,
    pub input: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub kind: ProductKind,
    pub terms: Vec<Term>,
    pub expected: ComplexMatrix,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl Fixture {
    /// `Σ wᵢ Eᵢ ⋆ Xᵢ` with the fixture's product kind.
    pub fn compute(&self) -> Result<ComplexMatrix> {
        let mut acc: Option<ComplexMatrix> = None;
        for t in &self.terms {
            let m = product(self.kind, &t.channel, &t.input)?.scale_real(t.weight);
            acc = Some(match acc {
                None => m,
                Some(a) => a.checked_add(&m)?,
            });
        }
        acc.ok_or_else(|| dim_mismatch("at least one term", 0))
    }

    /// Largest entrywise deviation from the expected matrix.
    pub fn check(&self) -> Result<FixtureOutcome> {
        let got = self.compute()?;
        let dev = got.max_abs_diff(&self.expected)?;
        Ok(FixtureOutcome {
            name: self.name.clone(),
            passed: dev < self.tolerance,
            max_deviation: dev,
            tolerance: self.tolerance,
        })
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `scale · rows` on two qubit regions.
fn qubit_pair(scale: f64, rows: [[C64; 4]; 4]) -> ComplexMatrix {
    ComplexMatrix::from_fn(vec![2, 2], |i, j| rows[i][j] * scale).expect("4x4")
}

fn real_pair(scale: f64, rows: [[f64; 4]; 4]) -> ComplexMatrix {
    qubit_pair(scale, rows.map(|r| r.map(re)))
}

fn ket(i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::unit(vec![2], i, j).expect("qubit unit")
}

fn term(weight: f64, channel: QuantumChannel, input: ComplexMatrix) -> Term {
    Term {
        weight,
        channel,
        input,
    }
}

fn fixture(name: &str, kind: ProductKind, terms: Vec<Term>, expected: ComplexMatrix, tolerance: f64) -> Fixture {
    Fixture {
        name: name.to_string(),
        kind,
        terms,
        expected,
        tolerance,
    }
}

fn plus() -> ComplexMatrix {
    DensityOperator::plus().matrix().clone()
}

fn minus() -> ComplexMatrix {
    DensityOperator::minus().matrix().clone()
}

pub fn example1_matrix() -> ComplexMatrix {
    real_pair(
        0.5,
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
        ],
    )
}

/// The two ensembles that mix to the same QSOT.
pub fn example1() -> Vec<Fixture> {
    let m = example1_matrix();
    vec![
        fixture(
            "example1/ensemble-1",
            ProductKind::Left,
            vec![
                term(0.5, QuantumChannel::identity(2), ket(0, 0)),
                term(0.5, QuantumChannel::rotation_y(PI), ket(1, 1)),
            ],
            m.clone(),
            1e-12,
        ),
        fixture(
            "example1/ensemble-2",
            ProductKind::Left,
            vec![
                term(0.5, QuantumChannel::rotation_y(-PI / 2.0), plus()),
                term(0.5, QuantumChannel::rotation_y(PI / 2.0), minus()),
            ],
            m,
            1e-12,
        ),
    ]
}

pub fn example2_left(which: usize) -> ComplexMatrix {
    let s = if which == 1 { 1.0 } else { -1.0 };
    real_pair(
        0.5,
        [
            [0.0, 0.0, 0.0, s],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [-s, 0.0, 0.0, 0.0],
        ],
    )
}

pub fn example2_fp() -> ComplexMatrix {
    real_pair(
        0.5,
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ],
    )
}

/// Terms of `ρ⁽¹⁾ = ½(𝒳⋆|0⟩⟨0| + 𝒴⋆|1⟩⟨1|)` and `ρ⁽²⁾ = ½(𝒴⋆|0⟩⟨0| + 𝒳⋆|1⟩⟨1|)`.
pub fn example2_terms(which: usize) -> Vec<Term> {
    let (first, second) = if which == 1 {
        (QuantumChannel::pauli_x(), QuantumChannel::pauli_y())
    } else {
        (QuantumChannel::pauli_y(), QuantumChannel::pauli_x())
    };
    vec![term(0.5, first, ket(0, 0)), term(0.5, second, ket(1, 1))]
}

pub fn example2() -> Vec<Fixture> {
    let mut out = Vec::new();
    for which in [1, 2] {
        out.push(fixture(
            &format!("example2/rho{which}-left"),
            ProductKind::Left,
            example2_terms(which),
            example2_left(which),
            1e-12,
        ));
        out.push(fixture(
            &format!("example2/rho{which}-fp"),
            ProductKind::Fp,
            example2_terms(which),
            example2_fp(),
            1e-12,
        ));
    }
    out
}

pub fn example3_left(which: usize, theta: f64) -> ComplexMatrix {
    let e = C64::from_polar(1.0, if which == 1 { theta } else { -theta });
    let z = re(0.0);
    let o = re(1.0);
    qubit_pair(0.5, [[o, z, z, z], [z, z, e, z], [z, e.conj(), z, z], [z, z, z, o]])
}

pub fn example3_fp(theta: f64) -> ComplexMatrix {
    let c = theta.cos();
    real_pair(
        0.5,
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, c, 0.0],
            [0.0, c, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    )
}

/// Terms of `ρ⁽¹⁾ = ½(𝒵[θ]⋆|0⟩⟨0| + 𝒵[−θ]⋆|1⟩⟨1|)` and `ρ⁽²⁾` with `θ → −θ`.
pub fn example3_terms(which: usize, theta: f64) -> Vec<Term> {
    let t = if which == 1 { theta } else { -theta };
    vec![
        term(0.5, QuantumChannel::rotation_z(t), ket(0, 0)),
        term(0.5, QuantumChannel::rotation_z(-t), ket(1, 1)),
    ]
}

pub const EXAMPLE3_ANGLES: [(&str, f64); 3] = [("pi/6", PI / 6.0), ("pi/3", PI / 3.0), ("pi/2", PI / 2.0)];

pub fn example3() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (label, theta) in EXAMPLE3_ANGLES {
        for which in [1, 2] {
            out.push(fixture(
                &format!("example3[{label}]/rho{which}-left"),
                ProductKind::Left,
                example3_terms(which, theta),
                example3_left(which, theta),
                1e-12,
            ));
            out.push(fixture(
                &format!("example3[{label}]/rho{which}-fp"),
                ProductKind::Fp,
                example3_terms(which, theta),
                example3_fp(theta),
                1e-12,
            ));
        }
        out.push(fixture(
            &format!("example3[{label}]/dephasing-fp"),
            ProductKind::Fp,
            vec![term(1.0, QuantumChannel::dephasing(theta), DensityOperator::maximally_mixed(2).matrix().clone())],
            example3_fp(theta),
            1e-12,
        ));
    }
    out
}

/// Channel name, input label, input operator, printed left product.
type TableEntry = (&'static str, &'static str, ComplexMatrix, [[f64; 4]; 4]);

fn table_entries() -> Vec<TableEntry> {
    vec![
        ("id", "00", ket(0, 0), [[1., 0., 0., 0.], [0., 0., 1., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("Z", "00", ket(0, 0), [[1., 0., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("X", "00", ket(0, 0), [[0., 0., 0., 1.], [0., 1., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("Y", "00", ket(0, 0), [[0., 0., 0., -1.], [0., 1., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("id", "11", ket(1, 1), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.]]),
        ("Z", "11", ket(1, 1), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., -1., 0., 0.], [0., 0., 0., 1.]]),
        ("X", "11", ket(1, 1), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 1., 0.], [1., 0., 0., 0.]]),
        ("Y", "11", ket(1, 1), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 1., 0.], [-1., 0., 0., 0.]]),
        ("id", "01", ket(0, 1), [[0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("Z", "01", ket(0, 1), [[0., -1., 0., 0.], [0., 0., 0., 1.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("X", "01", ket(0, 1), [[0., 0., 1., 0.], [1., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("Y", "01", ket(0, 1), [[0., 0., 1., 0.], [-1., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., 0.]]),
        ("id", "10", ket(1, 0), [[0., 0., 0., 0.], [0., 0., 0., 0.], [1., 0., 0., 0.], [0., 0., 1., 0.]]),
        ("Z", "10", ket(1, 0), [[0., 0., 0., 0.], [0., 0., 0., 0.], [1., 0., 0., 0.], [0., 0., -1., 0.]]),
        ("X", "10", ket(1, 0), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., 1.], [0., 1., 0., 0.]]),
        ("Y", "10", ket(1, 0), [[0., 0., 0., 0.], [0., 0., 0., 0.], [0., 0., 0., -1.], [0., 1., 0., 0.]]),
    ]
}

pub fn pauli_channel(name: &str) -> QuantumChannel {
    match name {
        "X" => QuantumChannel::pauli_x(),
        "Y" => QuantumChannel::pauli_y(),
        "Z" => QuantumChannel::pauli_z(),
        _ => QuantumChannel::identity(2),
    }
}

/// The sixteen left products of `{id, 𝒵, 𝒳, 𝒴}` on `|i⟩⟨j|`.
pub fn qubit_table() -> Vec<Fixture> {
    table_entries()
        .into_iter()
        .map(|(ch, label, input, rows)| {
            fixture(
                &format!("table/{ch}*|{}><{}|", &label[..1], &label[1..]),
                ProductKind::Left,
                vec![term(1.0, pauli_channel(ch), input)],
                real_pair(1.0, rows),
                1e-13,
            )
        })
        .collect()
}

/// The printed left product for a table entry, if any.
pub fn table_matrix(channel: &str, i: usize, j: usize) -> Option<ComplexMatrix> {
    let label = format!("{i}{j}");
    table_entries()
        .into_iter()
        .find(|(c, l, _, _)| *c == channel && *l == label)
        .map(|(_, _, _, rows)| real_pair(1.0, rows))
}

/// Weights and dynamics of a recipe whose inputs are all density operators.
pub fn ensemble(terms: &[Term]) -> Result<(Vec<f64>, Vec<Dynamics>)> {
    let mut weights = Vec::with_capacity(terms.len());
    let mut dynamics = Vec::with_capacity(terms.len());
    for t in terms {
        weights.push(t.weight);
        dynamics.push(Dynamics::new(DensityOperator::new(t.input.clone())?, t.channel.clone())?);
    }
    Ok((weights, dynamics))
}

/// Every fixture, in a fixed order.
pub fn all() -> Vec<Fixture> {
    let mut v = example1();
    v.extend(example2());
    v.extend(example3());
    v.extend(qubit_table());
    v
}
