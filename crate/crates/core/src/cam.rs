//! Checkable conditions on probe couplings for causally agnostic
//! measurements.
//!
//! Two probe interactions `H_XR` and `H_YR` sharing a probe `R` must commute
//! once embedded on `X ⊗ Y ⊗ R`, and the unitaries they generate must be
//! controlled on a common family of orthogonal sectors `Πᵢ` of `R`:
//! `U_XR = Σᵢ Uᵢ ⊗ Πᵢ`. Finding the sectors is not attempted here; callers
//! supply them.

use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linops::{ComplexMatrix, UnitaryMatrix, C64, COMPARISON_TOL, I};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub commutes: bool,
    /// Frobenius norm of the embedded commutator.
    pub norm: f64,
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    let e = h.hermiticity_error();
    if e > COMPARISON_TOL {
        return Err(Error::NotHermitian(e));
    }
    Ok(())
}

/// `[H_XR ⊗ 1_Y, H_YR ⊗ 1_X]` with both factors moved to `X ⊗ Y ⊗ R`.
pub fn commutator_check(
    h_xr: &ComplexMatrix,
    h_yr: &ComplexMatrix,
    dx: usize,
    dy: usize,
    dr: usize,
) -> Result<CommutatorReport> {
    require_hermitian(h_xr)?;
    require_hermitian(h_yr)?;
    if h_xr.dim() != dx * dr {
        return Err(dim_mismatch(format!("H_XR on {dx}x{dr}"), h_xr.dim()));
    }
    if h_yr.dim() != dy * dr {
        return Err(dim_mismatch(format!("H_YR on {dy}x{dr}"), h_yr.dim()));
    }
    // (X, R, Y) → (X, Y, R)
    let a = h_xr
        .clone()
        .with_dims(vec![dx, dr])?
        .tensor(&ComplexMatrix::eye(dy))
        .permute(&[0, 2, 1])?;
    // (Y, R, X) → (X, Y, R)
    let b = h_yr
        .clone()
        .with_dims(vec![dy, dr])?
        .tensor(&ComplexMatrix::eye(dx))
        .permute(&[2, 0, 1])?;
    let norm = (&(&a * &b) - &(&b * &a)).frobenius_norm();
    Ok(CommutatorReport {
        commutes: norm <= COMPARISON_TOL,
        norm,
    })
}

fn check_sectors(sectors: &[ComplexMatrix], dr: usize) -> Result<()> {
    if sectors.is_empty() {
        return Err(Error::IncompleteSectors("no projectors".into()));
    }
    let mut sum = ComplexMatrix::zeros(vec![dr])?;
    for (i, p) in sectors.iter().enumerate() {
        if p.dim() != dr {
            return Err(dim_mismatch(dr, p.dim()));
        }
        let p = p.clone().with_dims(vec![dr])?;
        if p.hermiticity_error() > COMPARISON_TOL || (&(&p * &p) - &p).frobenius_norm() > COMPARISON_TOL {
            return Err(Error::IncompleteSectors(format!("sector {i} is not a projector")));
        }
        for (j, q) in sectors.iter().enumerate().skip(i + 1) {
            let q = q.clone().with_dims(vec![dr])?;
            if (&p * &q).frobenius_norm() > COMPARISON_TOL {
                return Err(Error::IncompleteSectors(format!("sectors {i} and {j} overlap")));
            }
        }
        sum += &p;
    }
    let gap = (&sum - &ComplexMatrix::eye(dr)).frobenius_norm();
    if gap > COMPARISON_TOL {
        return Err(Error::IncompleteSectors(format!("projectors sum to identity only within {gap:.3e}")));
    }
    Ok(())
}

/// The blocks `Uᵢ` of `U = Σᵢ Uᵢ ⊗ Πᵢ`, or `None` if `U` has that form
/// for no family of unitaries `Uᵢ`.
pub fn controlled_blocks(
    u: &ComplexMatrix,
    dx: usize,
    sectors: &[ComplexMatrix],
) -> Result<Option<Vec<UnitaryMatrix>>> {
    let dr = sectors.first().map(|p| p.dim()).unwrap_or(0);
    check_sectors(sectors, dr)?;
    if u.dim() != dx * dr {
        return Err(dim_mismatch(format!("U on {dx}x{dr}"), u.dim()));
    }
    let u = u.clone().with_dims(vec![dx, dr])?;
    let lifted: Vec<ComplexMatrix> = sectors
        .iter()
        .map(|p| ComplexMatrix::eye(dx).tensor(&p.clone().with_dims(vec![dr]).expect("checked")))
        .collect();
    for (i, pi) in lifted.iter().enumerate() {
        for (j, pj) in lifted.iter().enumerate() {
            if i != j && (&(pi * &u) * pj).frobenius_norm() > COMPARISON_TOL {
                return Ok(None);
            }
        }
    }
    let mut blocks = Vec::with_capacity(sectors.len());
    for (p, pl) in sectors.iter().zip(&lifted) {
        let block = &(pl * &u) * pl;
        let rank = p.trace().re.round();
        let ui = block.partial_trace(&[0])?.scale_real(1.0 / rank);
        let rebuilt = ui.tensor(&p.clone().with_dims(vec![dr])?);
        if (&block - &rebuilt).frobenius_norm() > COMPARISON_TOL {
            return Ok(None);
        }
        match UnitaryMatrix::with_tolerance(ui, COMPARISON_TOL) {
            Ok(ui) => blocks.push(ui),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some(blocks))
}

/// Whether `U` on `X ⊗ R` is `Σᵢ Uᵢ ⊗ Πᵢ` with unitary `Uᵢ`.
pub fn controlled_unitary_check(u: &ComplexMatrix, dx: usize, sectors: &[ComplexMatrix]) -> Result<bool> {
    Ok(controlled_blocks(u, dx, sectors)?.is_some())
}

/// `e^{−iHt}` for Hermitian `H`.
pub fn evolve(h: &ComplexMatrix, t: f64) -> Result<UnitaryMatrix> {
    require_hermitian(h)?;
    let (vals, vecs) = h.hermitian_part().eigh();
    let n = h.dim();
    let phases: Vec<C64> = vals.iter().map(|l| C64::from_polar(1.0, -l * t)).collect();
    let m = ComplexMatrix::from_fn(h.dims().to_vec(), |i, j| {
        (0..n).map(|k| vecs.get(i, k) * phases[k] * vecs.get(j, k).conj()).sum()
    })?;
    UnitaryMatrix::with_tolerance(m, COMPARISON_TOL)
}

/// Hermitian `H` with `U = e^{−iH}` from the principal logarithm, or `None`
/// when an eigenvalue lies within `1e-6` of `−1` and the branch is ambiguous.
pub fn generator(u: &UnitaryMatrix) -> Result<Option<ComplexMatrix>> {
    let (q, t) = Schur::new(u.matrix().to_nalgebra()).unpack();
    let n = u.dim();
    let mut logs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        if (lambda + C64::new(1.0, 0.0)).norm() < 1e-6 {
            return Ok(None);
        }
        logs.push(lambda.ln());
    }
    // U normal: T is diagonal up to rounding, so log U = Q log(T) Q†
    let log_u = ComplexMatrix::from_fn(u.dims().to_vec(), |i, j| {
        (0..n).map(|k| q[(i, k)] * logs[k] * q[(j, k)].conj()).sum()
    })?;
    // U = e^{−iH} ⇒ H = i log U
    Ok(Some(log_u.scale(I).hermitian_part()))
}
