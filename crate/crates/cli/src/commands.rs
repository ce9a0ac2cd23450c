use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qsot_core::cam::{commutator_check, controlled_blocks};
use qsot_core::fixtures::{self, Fixture};
use qsot_core::interferometer::{
    sample, simulate_temporal, simulate_time_reversed, sweep, InterferenceRecord, ProbeConfig,
};
use qsot_core::linops::{frobenius_distance, pauli};
use qsot_core::procmat::{first_order, ordered_process_matrix};
use qsot_core::qsot::{star, star_left};
use qsot_core::timesym::{compass_recover_left, weyl_pair_basis, CompassSetup};
use qsot_core::tomography::{reconstruct, reconstruct_noisy, DynamicsOracle, QsotOracle};
use qsot_core::{ComplexMatrix, ProductKind, Provenance, Qsot, UnitaryMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::io::{emit, read_ensemble, read_json, Ensemble};
use crate::specs;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub struct Globals {
    pub tolerance: Option<f64>,
    pub seed: u64,
}

impl Globals {
    fn tol(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }
}

pub fn product(kind: ProductKind, state: &str, channel: &str, out: Option<&Path>) -> Result<Status> {
    let state = specs::state_or_operator(state)?;
    let ch = specs::channel(channel)?;
    let q = star(kind, &ch.channel, &state)?;
    emit(
        &ProductReport {
            qsot: &q,
            kind,
            channel: ch.canonical,
        },
        out,
    )?;
    Ok(Status::Pass)
}

/// QSOT JSON plus the product kind and canonical channel name.
#[derive(Serialize)]
struct ProductReport<'a> {
    #[serde(flatten)]
    qsot: &'a Qsot,
    kind: ProductKind,
    channel: String,
}

fn probe(path: Option<&Path>) -> Result<ProbeConfig> {
    match path {
        Some(p) => read_json(p),
        None => Ok(ProbeConfig::max_visibility()),
    }
}

fn default_unitary(spec: Option<&str>, d: usize) -> Result<(String, UnitaryMatrix)> {
    match spec {
        Some(s) => specs::unitary(s),
        None => Ok((if d == 2 { "I".into() } else { format!("I[{d}]") }, UnitaryMatrix::identity(d))),
    }
}

/// Weighted interference record of an ensemble; each branch goes through the
/// checked simulation path.
fn ensemble_record(
    e: &Ensemble,
    v: &UnitaryMatrix,
    w: &UnitaryMatrix,
    probe: &ProbeConfig,
    time_reversed: bool,
) -> Result<InterferenceRecord> {
    let mut total = C64::new(0.0, 0.0);
    for (wt, d) in e.weights.iter().zip(&e.dynamics) {
        let rec = if time_reversed {
            simulate_time_reversed(d, v, w, probe)?
        } else {
            simulate_temporal(d, v, w, probe)?
        };
        total += rec.interference * *wt;
    }
    Ok(InterferenceRecord::from_probe(probe, total))
}

#[derive(Serialize)]
struct InterfereReport {
    v: String,
    w: String,
    time_reversed: bool,
    interference: C64,
    prob_plus: f64,
    prob_minus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<Counts>,
}

#[derive(Serialize)]
struct Counts {
    n_plus: u64,
    n_minus: u64,
    shots: u64,
    seed: u64,
}

pub struct InterfereArgs<'a> {
    pub dynamics: &'a Path,
    pub v: Option<&'a str>,
    pub w: Option<&'a str>,
    pub probe: Option<&'a Path>,
    pub time_reversed: bool,
    pub shots: u64,
    pub out: Option<&'a Path>,
}

pub fn interfere(g: &Globals, a: InterfereArgs) -> Result<Status> {
    let e = read_ensemble(a.dynamics)?;
    let c = e.dynamics[0].channel();
    let (vn, v) = default_unitary(a.v, c.in_dim())?;
    let (wn, w) = default_unitary(a.w, c.out_dim())?;
    let probe = probe(a.probe)?;
    let rec = ensemble_record(&e, &v, &w, &probe, a.time_reversed)?;
    let counts = if a.shots > 0 {
        let (n_plus, n_minus) = sample(&rec, a.shots, &mut ChaCha8Rng::seed_from_u64(g.seed))?;
        Some(Counts {
            n_plus,
            n_minus,
            shots: a.shots,
            seed: g.seed,
        })
    } else {
        None
    };
    emit(
        &InterfereReport {
            v: vn,
            w: wn,
            time_reversed: a.time_reversed,
            interference: rec.interference,
            prob_plus: rec.prob_plus,
            prob_minus: rec.prob_minus,
            counts,
        },
        a.out,
    )?;
    Ok(Status::Pass)
}

fn pauli_unitaries(d: usize) -> Result<Vec<UnitaryMatrix>> {
    if d != 2 {
        bail!("the 'paulis' pair set needs qubit regions, got dimension {d}");
    }
    Ok(pauli::all().into_iter().map(|p| UnitaryMatrix::new(p).expect("Pauli")).collect())
}

pub struct SampleArgs<'a> {
    pub dynamics: &'a Path,
    pub pairs: &'a str,
    pub probe: Option<&'a Path>,
    pub time_reversed: bool,
    pub shots: u64,
    pub out: Option<&'a Path>,
}

/// Sweep over intervention pairs, written as CSV.
pub fn sample_sweep(g: &Globals, a: SampleArgs) -> Result<Status> {
    let e = read_ensemble(a.dynamics)?;
    let d = e.single()?;
    let pairs: Vec<(UnitaryMatrix, UnitaryMatrix)> = if a.pairs == "paulis" {
        let vs = pauli_unitaries(d.channel().in_dim())?;
        let ws = pauli_unitaries(d.channel().out_dim())?;
        vs.iter().flat_map(|v| ws.iter().map(move |w| (v.clone(), w.clone()))).collect()
    } else {
        read_json(Path::new(a.pairs))?
    };
    let rows = sweep(d, &pairs, &probe(a.probe)?, a.time_reversed, a.shots, g.seed)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["intervention_id", "re_I", "im_I", "p_plus", "p_minus", "n_plus", "n_minus", "shots", "seed"])?;
    for r in &rows {
        wtr.write_record([
            r.intervention_id.to_string(),
            r.re_i.to_string(),
            r.im_i.to_string(),
            r.p_plus.to_string(),
            r.p_minus.to_string(),
            r.n_plus.to_string(),
            r.n_minus.to_string(),
            r.shots.to_string(),
            r.seed.to_string(),
        ])?;
    }
    let bytes = wtr.into_inner().context("flushing CSV")?;
    match a.out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(Status::Pass)
}

fn read_qsot(path: &Path) -> Result<Qsot> {
    let v: serde_json::Value = read_json(path)?;
    if v.get("provenance").is_some() {
        Ok(serde_json::from_value(v).with_context(|| format!("invalid QSOT in {}", path.display()))?)
    } else {
        let m: ComplexMatrix = serde_json::from_value(v).with_context(|| format!("invalid matrix in {}", path.display()))?;
        Ok(Qsot::new(m, Provenance::Other)?)
    }
}

#[derive(Clone, Debug)]
pub enum TomoOracle {
    /// Exact interference terms of a stored QSOT.
    SelfOracle(PathBuf),
    /// State-vector simulation of an ensemble, exact.
    Dynamics(PathBuf),
    /// State-vector simulation of an ensemble, finite shots.
    Noisy(PathBuf),
}

impl std::str::FromStr for TomoOracle {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, file) = s
            .split_once(':')
            .ok_or_else(|| format!("expected self:FILE, dynamics:FILE or noisy:FILE, got '{s}'"))?;
        let file = PathBuf::from(file);
        match kind {
            "self" => Ok(TomoOracle::SelfOracle(file)),
            "dynamics" => Ok(TomoOracle::Dynamics(file)),
            "noisy" => Ok(TomoOracle::Noisy(file)),
            other => Err(format!("unknown oracle kind '{other}'")),
        }
    }
}

fn ensemble_oracle(path: &Path) -> Result<DynamicsOracle> {
    let e = read_ensemble(path)?;
    Ok(DynamicsOracle::new(e.weights, e.dynamics)?)
}

pub fn tomo(g: &Globals, oracle: &TomoOracle, dims: Option<&str>, shots: u64, out: Option<&Path>) -> Result<Status> {
    let dims_for = |default: Vec<usize>| -> Result<Vec<usize>> {
        match dims {
            Some(d) => specs::dims(d),
            None => Ok(default),
        }
    };
    match oracle {
        TomoOracle::SelfOracle(p) => {
            let q = read_qsot(p)?;
            let dims = dims_for(q.region_dims().to_vec())?;
            let rep = reconstruct(&QsotOracle(q), &dims)?;
            emit(&rep, out)?;
            Ok(Status::from_ok(rep.residual <= g.tol()))
        }
        TomoOracle::Dynamics(p) => {
            let o = ensemble_oracle(p)?;
            let dims = dims_for(qsot_core::tomography::InterferenceOracle::region_dims(&o))?;
            let rep = reconstruct(&o, &dims)?;
            emit(&rep, out)?;
            Ok(Status::from_ok(rep.residual <= g.tol()))
        }
        TomoOracle::Noisy(p) => {
            let o = ensemble_oracle(p)?;
            let dims = dims_for(qsot_core::tomography::InterferenceOracle::region_dims(&o))?;
            let rep = reconstruct_noisy(&o, &dims, shots, &mut ChaCha8Rng::seed_from_u64(g.seed))?;
            emit(&rep, out)?;
            Ok(Status::Pass)
        }
    }
}

#[derive(Serialize)]
struct CompassReport {
    recovered_left: Qsot,
    recovery_error: f64,
    fp_product: Qsot,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<CompassComparison>,
}

#[derive(Serialize)]
struct CompassComparison {
    other_recovered_left: Qsot,
    left_distance: f64,
    fp_distance: f64,
}

fn compass_setup(path: &Path) -> Result<CompassSetup> {
    let e = read_ensemble(path)?;
    Ok(CompassSetup::mixture(e.weights, e.dynamics)?)
}

pub fn compass(g: &Globals, dynamics: &Path, against: Option<&Path>, out: Option<&Path>) -> Result<Status> {
    let recover = |s: &CompassSetup| -> Result<(Qsot, f64)> {
        let basis = weyl_pair_basis(s.in_dim(), s.out_dim());
        let l = compass_recover_left(s, &basis)?;
        let err = l.matrix().max_abs_diff(s.left_product()?.matrix())?;
        Ok((l, err))
    };
    let s = compass_setup(dynamics)?;
    let (l, err) = recover(&s)?;
    let mut worst = err;
    let comparison = match against {
        Some(p) => {
            let t = compass_setup(p)?;
            let (l2, err2) = recover(&t)?;
            worst = worst.max(err2);
            Some(CompassComparison {
                left_distance: frobenius_distance(l.matrix(), l2.matrix())?,
                fp_distance: frobenius_distance(s.fp_product()?.matrix(), t.fp_product()?.matrix())?,
                other_recovered_left: l2,
            })
        }
        None => None,
    };
    emit(
        &CompassReport {
            recovered_left: l,
            recovery_error: err,
            fp_product: s.fp_product()?,
            comparison,
        },
        out,
    )?;
    Ok(Status::from_ok(worst <= g.tol()))
}

pub fn procmat(g: &Globals, dynamics: &Path, first: bool, out: Option<&Path>) -> Result<Status> {
    let e = read_ensemble(dynamics)?;
    let d = e.single()?;
    let w = ordered_process_matrix(d)?;
    if !first {
        emit(&w, out)?;
        return Ok(Status::Pass);
    }
    let w1 = first_order(&w)?;
    let dev = w1.max_abs_diff(star_left(d.channel(), d.initial())?.matrix())?;
    emit(&Qsot::new(w1, Provenance::Other)?, out)?;
    if dev > g.tol() {
        eprintln!("first-order term deviates from the left product by {dev:.3e}");
    }
    Ok(Status::from_ok(dev <= g.tol()))
}

#[derive(Serialize)]
struct ControlledReport {
    controlled: bool,
    sectors: usize,
}

pub fn cam_commutator(g: &Globals, hxr: &str, hyr: &str, dims: &str, out: Option<&Path>) -> Result<Status> {
    let dims = specs::dims(dims)?;
    let [dx, dy, dr] = dims[..] else {
        bail!("--dims takes dx,dy,dr");
    };
    let mut r = commutator_check(&specs::operator(hxr)?, &specs::operator(hyr)?, dx, dy, dr)?;
    r.commutes = r.norm <= g.tol();
    emit(&r, out)?;
    Ok(Status::from_ok(r.commutes))
}

pub fn cam_controlled(unitary: &str, sectors: &str, dx: usize, out: Option<&Path>) -> Result<Status> {
    let u = specs::operator(unitary)?;
    let sectors: Vec<ComplexMatrix> = if let Some(d) = sectors.strip_prefix("basis:") {
        let d: usize = d.parse().context("basis:D needs an integer D")?;
        (0..d).map(|k| ComplexMatrix::unit(vec![d], k, k)).collect::<qsot_core::Result<_>>()?
    } else {
        read_json(Path::new(sectors))?
    };
    let controlled = controlled_blocks(&u, dx, &sectors)?.is_some();
    emit(
        &ControlledReport {
            controlled,
            sectors: sectors.len(),
        },
        out,
    )?;
    Ok(Status::from_ok(controlled))
}

#[derive(Serialize)]
struct VerifyReport {
    passed: usize,
    failed: usize,
    fixtures: Vec<fixtures::FixtureOutcome>,
}

pub fn verify_examples(
    g: &Globals,
    fixture_file: Option<&Path>,
    dump: Option<&Path>,
    report: Option<&Path>,
) -> Result<Status> {
    if let Some(p) = dump {
        std::fs::write(p, crate::io::to_json(&fixtures::all())?).with_context(|| format!("cannot write {}", p.display()))?;
        return Ok(Status::Pass);
    }
    let list: Vec<Fixture> = match fixture_file {
        Some(p) => read_json(p)?,
        None => fixtures::all(),
    };
    let mut outcomes = Vec::with_capacity(list.len());
    for f in &list {
        let got = f.compute().with_context(|| format!("fixture {}", f.name))?;
        let dev = got.max_abs_diff(&f.expected).with_context(|| format!("fixture {}", f.name))?;
        let tol = g.tolerance.unwrap_or(f.tolerance);
        let passed = dev <= tol;
        println!("{} {:<36} max|Δ| = {:.3e} (tol {:.0e})", if passed { "PASS" } else { "FAIL" }, f.name, dev, tol);
        if !passed {
            println!("  expected:\n{}", indent(&f.expected));
            println!("  computed:\n{}", indent(&got));
        }
        outcomes.push(fixtures::FixtureOutcome {
            name: f.name.clone(),
            passed,
            max_deviation: dev,
            tolerance: tol,
        });
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {} failed", outcomes.len() - failed, failed);
    if let Some(p) = report {
        std::fs::write(
            p,
            crate::io::to_json(&VerifyReport {
                passed: outcomes.len() - failed,
                failed,
                fixtures: outcomes,
            })?,
        )
        .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(Status::from_ok(failed == 0))
}

fn indent(m: &ComplexMatrix) -> String {
    let n = m.dim();
    (0..n)
        .map(|i| {
            let row: Vec<String> = (0..n)
                .map(|j| {
                    let z = m.get(i, j);
                    format!("{:>7.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            format!("    {}", row.join("  "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}
