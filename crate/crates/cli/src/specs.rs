//! Parsing of short textual specs for channels, states, unitaries and
//! operators. Anything that is not a recognised name is treated as a path to
//! a JSON file.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qsot_core::linops::pauli;
use qsot_core::quantum::DensityOperator;
use qsot_core::{ComplexMatrix, QuantumChannel, UnitaryMatrix, C64};

use crate::io::read_json;

/// Parses `0.5`, `pi`, `-pi/2`, `2pi/3`, `3*pi/4`, `π/6`.
pub fn parse_number(s: &str) -> Result<f64> {
    let t = s.trim().replace('π', "pi").replace(' ', "");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), Some(b.to_string())),
        None => (t.clone(), None),
    };
    let n = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().with_context(|| format!("bad number '{s}'"))?,
        };
        c * PI
    } else {
        num.parse::<f64>().with_context(|| format!("bad number '{s}'"))?
    };
    let d = match den {
        Some(d) => d.parse::<f64>().with_context(|| format!("bad denominator in '{s}'"))?,
        None => 1.0,
    };
    if d == 0.0 || !n.is_finite() {
        bail!("bad number '{s}'");
    }
    Ok(n / d)
}

/// `name[arg]` → (`name`, Some(`arg`)); `name` → (`name`, None).
fn split_call(s: &str) -> Result<(&str, Option<&str>)> {
    match s.find('[') {
        None => Ok((s, None)),
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("unbalanced brackets in '{s}'"))?;
            Ok((&s[..i], Some(inner)))
        }
    }
}

fn parse_dim(arg: Option<&str>, default: usize) -> Result<usize> {
    match arg {
        None => Ok(default),
        Some(a) => {
            let d: usize = a.trim().parse().with_context(|| format!("bad dimension '{a}'"))?;
            if d == 0 {
                bail!("dimension must be positive");
            }
            Ok(d)
        }
    }
}

/// A channel together with the canonical form of how it was named.
#[derive(Clone, Debug)]
pub struct NamedChannel {
    pub canonical: String,
    pub channel: QuantumChannel,
}

fn named_channel(s: &str) -> Result<Option<NamedChannel>> {
    let (name, arg) = split_call(s.trim())?;
    let param = |what: &str| -> Result<f64> {
        parse_number(arg.ok_or_else(|| anyhow!("{what} needs a parameter, e.g. {name}[pi/2]"))?)
    };
    let (canonical, channel) = match (name, arg) {
        ("id", _) => {
            let d = parse_dim(arg, 2)?;
            let c = if d == 2 { "id".to_string() } else { format!("id[{d}]") };
            (c, QuantumChannel::identity(d))
        }
        ("X", None) => ("X".into(), QuantumChannel::pauli_x()),
        ("Y", None) => ("Y".into(), QuantumChannel::pauli_y()),
        ("Z", None) => ("Z".into(), QuantumChannel::pauli_z()),
        ("Y", Some(_)) => {
            let t = param("Y")?;
            (format!("Y[{t}]"), QuantumChannel::rotation_y(t))
        }
        ("Z", Some(_)) => {
            let t = param("Z")?;
            (format!("Z[{t}]"), QuantumChannel::rotation_z(t))
        }
        ("dephase" | "D", _) => {
            let t = param("dephase")?;
            (format!("dephase[{t}]"), QuantumChannel::dephasing(t))
        }
        ("depolarize", _) => {
            let p = param("depolarize")?;
            (format!("depolarize[{p}]"), QuantumChannel::depolarizing(2, p)?)
        }
        _ => return Ok(None),
    };
    Ok(Some(NamedChannel { canonical, channel }))
}

/// A named channel, or a path to channel JSON.
pub fn channel(s: &str) -> Result<NamedChannel> {
    if let Some(c) = named_channel(s)? {
        return Ok(c);
    }
    if Path::new(s).exists() {
        let channel: QuantumChannel = read_json(Path::new(s))?;
        return Ok(NamedChannel {
            canonical: format!("file:{s}"),
            channel,
        });
    }
    bail!("unknown channel '{s}' (not a known name and no such file)")
}

/// Channel given either as a name string or inline Kraus JSON.
pub fn channel_value(v: &serde_json::Value) -> Result<QuantumChannel> {
    match v {
        serde_json::Value::String(s) => Ok(named_channel(s)?
            .ok_or_else(|| anyhow!("unknown channel name '{s}'"))?
            .channel),
        other => Ok(serde_json::from_value(other.clone()).context("invalid channel")?),
    }
}

fn named_state(s: &str) -> Result<Option<DensityOperator>> {
    let (name, arg) = split_call(s.trim())?;
    Ok(Some(match (name, arg) {
        ("0" | "|0>", None) => DensityOperator::basis(2, 0)?,
        ("1" | "|1>", None) => DensityOperator::basis(2, 1)?,
        ("+" | "|+>", None) => DensityOperator::plus(),
        ("-" | "|->", None) => DensityOperator::minus(),
        ("mixed", _) => DensityOperator::maximally_mixed(parse_dim(arg, 2)?),
        ("basis", Some(a)) => {
            let (d, k) = a
                .split_once(',')
                .ok_or_else(|| anyhow!("basis needs [d,k], got '{s}'"))?;
            DensityOperator::basis(parse_dim(Some(d), 2)?, k.trim().parse()?)?
        }
        _ => return Ok(None),
    }))
}

/// State given either as a name string or inline matrix JSON.
pub fn state_value(v: &serde_json::Value) -> Result<DensityOperator> {
    match v {
        serde_json::Value::String(s) => named_state(s)?.ok_or_else(|| anyhow!("unknown state name '{s}'")),
        other => Ok(serde_json::from_value(other.clone()).context("invalid state")?),
    }
}

/// A named state, or a path to a matrix JSON file (possibly over several
/// regions).
pub fn state_or_operator(s: &str) -> Result<ComplexMatrix> {
    if let Some(rho) = named_state(s)? {
        return Ok(rho.matrix().clone());
    }
    if !Path::new(s).exists() {
        bail!("unknown state '{s}' (not a known name and no such file)");
    }
    let m: ComplexMatrix = read_json(Path::new(s))?;
    if m.dims().len() == 1 {
        DensityOperator::new(m.clone()).context("state is not a density operator")?;
    } else {
        qsot_core::Qsot::new(m.clone(), qsot_core::Provenance::Other).context("state is not a QSOT")?;
    }
    Ok(m)
}

fn named_unitary(s: &str) -> Result<Option<(String, UnitaryMatrix)>> {
    let (name, arg) = split_call(s.trim())?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = match (name, arg) {
        ("I", _) => {
            let d = parse_dim(arg, 2)?;
            return Ok(Some((if d == 2 { "I".into() } else { format!("I[{d}]") }, UnitaryMatrix::identity(d))));
        }
        ("X", None) => pauli::x(),
        ("Y", None) => pauli::y(),
        ("Z", None) => pauli::z(),
        ("H", None) => ComplexMatrix::from_real(vec![2], &[h, h, h, -h])?,
        ("S", None) => ComplexMatrix::new(vec![2], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0)])?,
        _ => return Ok(None),
    };
    Ok(Some((name.to_string(), UnitaryMatrix::new(m)?)))
}

/// A named unitary (`I`, `I[d]`, `X`, `Y`, `Z`, `H`, `S`) or a path to a
/// matrix JSON file.
pub fn unitary(s: &str) -> Result<(String, UnitaryMatrix)> {
    if let Some(u) = named_unitary(s)? {
        return Ok(u);
    }
    if Path::new(s).exists() {
        let u: UnitaryMatrix = read_json(Path::new(s))?;
        return Ok((format!("file:{s}"), u));
    }
    bail!("unknown unitary '{s}' (not a known name and no such file)")
}

/// Pauli strings such as `XX` or `ZIY`, `swap[d]`, or a path to a matrix
/// JSON file.
pub fn operator(s: &str) -> Result<ComplexMatrix> {
    let t = s.trim();
    if !t.is_empty() && t.chars().all(|c| "IXYZ".contains(c)) && !Path::new(t).exists() {
        let mut m: Option<ComplexMatrix> = None;
        for c in t.chars() {
            let p = match c {
                'I' => pauli::id(),
                'X' => pauli::x(),
                'Y' => pauli::y(),
                _ => pauli::z(),
            };
            m = Some(match m {
                None => p,
                Some(a) => a.tensor(&p),
            });
        }
        let m = m.expect("nonempty");
        let n = m.dim();
        return Ok(m.with_dims(vec![n])?);
    }
    if let ("swap", arg) = split_call(t)? {
        let d = parse_dim(arg, 2)?;
        return Ok(ComplexMatrix::from_fn(vec![d * d], |r, c| {
            let (i, j) = (r / d, r % d);
            if c == j * d + i {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })?);
    }
    if Path::new(t).exists() {
        return read_json(Path::new(t));
    }
    bail!("unknown operator '{s}' (not a Pauli string, swap[d], or file)")
}

/// `2,3` → `[2, 3]`.
pub fn dims(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(|p| parse_dim(Some(p), 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert_eq!(parse_number("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_number("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_number("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_number("π/6").unwrap(), PI / 6.0);
        assert!(parse_number("pi/0").is_err());
        assert!(parse_number("abc").is_err());
    }

    #[test]
    fn channel_names_are_canonical() {
        assert_eq!(channel("Y[pi/2]").unwrap().canonical, format!("Y[{}]", PI / 2.0));
        assert_eq!(channel("id").unwrap().canonical, "id");
        assert_eq!(channel("id[3]").unwrap().channel.in_dim(), 3);
        assert_eq!(channel("dephase[pi/3]").unwrap().canonical, channel(&format!("dephase[{}]", PI / 3.0)).unwrap().canonical);
        assert!(channel("depolarize[2]").is_err());
        assert!(channel("nope").is_err());
        assert!(channel("Z").unwrap().channel.is_cptp(1e-12));
    }

    #[test]
    fn operators() {
        assert_eq!(operator("XZ").unwrap().dim(), 4);
        assert_eq!(operator("swap[3]").unwrap().dim(), 9);
        assert!(operator("Q").is_err());
    }

    #[test]
    fn unitaries() {
        assert_eq!(unitary("I[3]").unwrap().1.dim(), 3);
        assert!(unitary("H").unwrap().1.unitarity_error() < 1e-15);
    }

    #[test]
    fn states() {
        assert_eq!(state_or_operator("mixed[3]").unwrap().dim(), 3);
        assert!(state_or_operator("basis[3,2]").is_ok());
    }
}
