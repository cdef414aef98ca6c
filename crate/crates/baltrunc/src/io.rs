//! Model/signal/report files and example-system generators.
//!
//! Models are stored as flat JSON with row-major coefficient arrays; signals
//! as CSV with a leading time column. All numeric output is written with 17
//! significant digits, which is enough to reproduce every 64-bit float bit
//! for bit, so save → load → save produces byte-identical files.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

use crate::analysis::Signal;
use crate::error::{Error, Result, Violation};
use crate::linalg::{eigenvalues, Matrix};
use crate::reduction::ReductionReport;
use crate::statespace::StateSpaceModel;

/// Format version this build reads and writes.
pub const SCHEMA_VERSION: u64 = 1;

/// A model plus the optional free-text label carried by its file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: StateSpaceModel,
    pub label: Option<String>,
}

/// One number, 17 significant digits: lossless for 64-bit floats and stable
/// enough to make repeated saves byte-identical.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_array(values: &[f64]) -> String {
    let body: Vec<String> = values.iter().map(|&v| format_g17(v)).collect();
    format!("[{}]", body.join(", "))
}

/// Serialize a model (and optional label) to the flat JSON layout.
pub fn save_model_file(file: &ModelFile, path: &Path) -> Result<()> {
    let m = &file.model;
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"schema_version\": {SCHEMA_VERSION},\n"));
    if let Some(label) = &file.label {
        let escaped = Value::String(label.clone()).to_string();
        out.push_str(&format!("  \"label\": {escaped},\n"));
    }
    out.push_str(&format!("  \"n\": {},\n", m.n));
    out.push_str(&format!("  \"m\": {},\n", m.m));
    out.push_str(&format!("  \"p\": {},\n", m.p));
    out.push_str(&format!("  \"a\": {},\n", format_array(m.a.data())));
    out.push_str(&format!("  \"b\": {},\n", format_array(m.b.data())));
    out.push_str(&format!("  \"c\": {},\n", format_array(m.c.data())));
    out.push_str(&format!("  \"d\": {}\n", format_array(m.d.data())));
    out.push_str("}\n");
    fs::write(path, out)?;
    Ok(())
}

pub fn save_model(model: &StateSpaceModel, path: &Path) -> Result<()> {
    save_model_file(
        &ModelFile {
            model: model.clone(),
            label: None,
        },
        path,
    )
}

/// Load a model file, validating the coefficient shapes and the model
/// invariants; the label rides along if present.
pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::ParseError {
        context: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| Error::ParseError {
        context: path.display().to_string(),
        detail: "top-level value must be an object".into(),
    })?;

    let version = int_field(obj, "schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(Error::ParseError {
            context: "field schema_version".into(),
            detail: format!(
                "unsupported schema_version {version}; this build reads version {SCHEMA_VERSION}"
            ),
        });
    }
    let label = match obj.get("label") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(Error::ParseError {
                context: "field label".into(),
                detail: "must be a string".into(),
            })
        }
    };
    let n = int_field(obj, "n")? as usize;
    let m = int_field(obj, "m")? as usize;
    let p = int_field(obj, "p")? as usize;
    let a = array_field(obj, "a")?;
    let b = array_field(obj, "b")?;
    let c = array_field(obj, "c")?;
    let d = array_field(obj, "d")?;

    let mut violations = Vec::new();
    let mut check = |name: &str, got: usize, rows: usize, cols: usize, want_of: &str| {
        if got != rows * cols {
            violations.push(Violation {
                field: name.into(),
                rule: format!(
                    "array length {got} does not equal {want_of} = {}",
                    rows * cols
                ),
            });
        }
    };
    check("a", a.len(), n, n, "n*n");
    check("b", b.len(), n, m, "n*m");
    check("c", c.len(), p, n, "p*n");
    check("d", d.len(), p, m, "p*m");
    if !violations.is_empty() {
        return Err(Error::InvalidModel(violations));
    }

    let model = StateSpaceModel::new(
        Matrix::from_vec(n, n, a)?,
        Matrix::from_vec(n, m, b)?,
        Matrix::from_vec(p, n, c)?,
        Matrix::from_vec(p, m, d)?,
    )?;
    Ok(ModelFile { model, label })
}

pub fn load_model(path: &Path) -> Result<StateSpaceModel> {
    Ok(load_model_file(path)?.model)
}

fn int_field(obj: &serde_json::Map<String, Value>, name: &str) -> Result<u64> {
    let value = obj.get(name).ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "missing required field".into(),
    })?;
    value.as_u64().ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "must be a nonnegative integer".into(),
    })
}

fn float_field(obj: &serde_json::Map<String, Value>, name: &str) -> Result<f64> {
    let value = obj.get(name).ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "missing required field".into(),
    })?;
    value.as_f64().ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "must be a number".into(),
    })
}

fn array_field(obj: &serde_json::Map<String, Value>, name: &str) -> Result<Vec<f64>> {
    let value = obj.get(name).ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "missing required field".into(),
    })?;
    let items = value.as_array().ok_or_else(|| Error::ParseError {
        context: format!("field {name}"),
        detail: "must be an array of numbers".into(),
    })?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            item.as_f64().ok_or_else(|| Error::ParseError {
                context: format!("field {name}, element {i}"),
                detail: "must be a number".into(),
            })
        })
        .collect()
}

/// Write a sampled signal as CSV: a `time` column followed by one column per
/// channel.
pub fn save_signal(signal: &Signal, path: &Path) -> Result<()> {
    let mut out = String::from("time");
    for c in 0..signal.channels {
        out.push_str(&format!(",ch{}", c + 1));
    }
    out.push('\n');
    for k in 0..signal.num_steps() {
        out.push_str(&format_g17(signal.time_at(k)));
        for &v in signal.samples.row(k) {
            out.push(',');
            out.push_str(&format_g17(v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a signal CSV, requiring a strictly increasing, uniformly spaced
/// time column (spacing constant to 1e-9 relative).
pub fn load_signal(path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path)?;
    let name = path.display();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::ParseError {
        context: format!("{name} line 1"),
        detail: "empty file; expected a header row".into(),
    })?;
    let channels = header.split(',').count().saturating_sub(1);
    if channels < 1 {
        return Err(Error::ParseError {
            context: format!("{name} line 1"),
            detail: "header must name a time column plus at least one channel".into(),
        });
    }

    let mut times = Vec::new();
    let mut data = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != channels + 1 {
            return Err(Error::ParseError {
                context: format!("{name} line {line_no}"),
                detail: format!("expected {} fields, found {}", channels + 1, fields.len()),
            });
        }
        let mut row = fields.iter().enumerate().map(|(col, field)| {
            field.trim().parse::<f64>().map_err(|e| Error::ParseError {
                context: format!("{name} line {line_no} field {}", col + 1),
                detail: e.to_string(),
            })
        });
        times.push(row.next().unwrap()?);
        for value in row {
            data.push(value?);
        }
    }
    if times.len() < 2 {
        return Err(Error::ParseError {
            context: format!("{name}"),
            detail: "need at least two data rows to infer the sample spacing".into(),
        });
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::ParseError {
            context: format!("{name} line 3"),
            detail: "time column must be strictly increasing".into(),
        });
    }
    for (k, pair) in times.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if (step - dt).abs() > 1e-9 * dt {
            return Err(Error::ParseError {
                context: format!("{name} line {}", k + 3),
                detail: format!(
                    "time column is not uniformly spaced: step {} differs from {}",
                    format_g17(step),
                    format_g17(dt)
                ),
            });
        }
    }
    let samples = Matrix::from_vec(times.len(), channels, data)?;
    Signal::new(dt, samples, times[0])
}

/// Write a reduction report as JSON; a non-finite gap ratio (nothing was
/// truncated) is stored as `null`.
pub fn save_report(report: &ReductionReport, path: &Path) -> Result<()> {
    let gap = if report.gap_ratio.is_finite() {
        format_g17(report.gap_ratio)
    } else {
        "null".to_string()
    };
    let mut out = String::from("{\n");
    out.push_str(&format!(
        "  \"original_order\": {},\n",
        report.original_order
    ));
    out.push_str(&format!("  \"minimal_order\": {},\n", report.minimal_order));
    out.push_str(&format!("  \"reduced_order\": {},\n", report.reduced_order));
    out.push_str(&format!(
        "  \"hsv_kept\": {},\n",
        format_array(&report.hsv_kept)
    ));
    out.push_str(&format!(
        "  \"hsv_truncated\": {},\n",
        format_array(&report.hsv_truncated)
    ));
    out.push_str(&format!(
        "  \"distinct_truncated\": {},\n",
        format_array(&report.distinct_truncated)
    ));
    out.push_str(&format!(
        "  \"lower_bound\": {},\n",
        format_g17(report.lower_bound)
    ));
    out.push_str(&format!(
        "  \"upper_bound\": {},\n",
        format_g17(report.upper_bound)
    ));
    out.push_str(&format!("  \"gap_ratio\": {gap}\n"));
    out.push_str("}\n");
    fs::write(path, out)?;
    Ok(())
}

/// Read a reduction report back; `null` gap ratio maps to infinity.
pub fn load_report(path: &Path) -> Result<ReductionReport> {
    let text = fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Error::ParseError {
        context: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| Error::ParseError {
        context: path.display().to_string(),
        detail: "top-level value must be an object".into(),
    })?;
    let gap_ratio = match obj.get("gap_ratio") {
        Some(Value::Null) => f64::INFINITY,
        _ => float_field(obj, "gap_ratio")?,
    };
    Ok(ReductionReport {
        original_order: int_field(obj, "original_order")? as usize,
        minimal_order: int_field(obj, "minimal_order")? as usize,
        reduced_order: int_field(obj, "reduced_order")? as usize,
        hsv_kept: array_field(obj, "hsv_kept")?,
        hsv_truncated: array_field(obj, "hsv_truncated")?,
        distinct_truncated: array_field(obj, "distinct_truncated")?,
        lower_bound: float_field(obj, "lower_bound")?,
        upper_bound: float_field(obj, "upper_bound")?,
        gap_ratio,
    })
}

/// Families of generated example systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    /// Dense random dynamics shifted left of the imaginary axis; stable by
    /// construction, unstructured singular-value decay.
    RandomStable,
    /// A line of masses joined by springs and dampers, anchored at one end;
    /// force input on the first mass, position of the last as output.
    /// Lightly damped, so singular values decay slowly.
    MassSpringChain,
    /// A resistor-capacitor ladder driven by a voltage source, final node
    /// voltage as output. Singular values decay fast.
    RcLadder,
}

impl FromStr for ExampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_stable" => Ok(ExampleKind::RandomStable),
            "mass_spring_chain" => Ok(ExampleKind::MassSpringChain),
            "rc_ladder" => Ok(ExampleKind::RcLadder),
            other => Err(Error::InvalidArgument(format!(
                "unknown example kind {other:?}; expected random_stable, mass_spring_chain, or rc_ladder"
            ))),
        }
    }
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExampleKind::RandomStable => "random_stable",
            ExampleKind::MassSpringChain => "mass_spring_chain",
            ExampleKind::RcLadder => "rc_ladder",
        };
        f.write_str(name)
    }
}

/// Physical and shape parameters for the generators; the defaults give one
/// input, one output, and unit-ish physical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    /// Stability margin added beyond the spectral radius (random_stable).
    pub shift: f64,
    /// Input count (random_stable).
    pub inputs: usize,
    /// Output count (random_stable).
    pub outputs: usize,
    /// Mass of each body (mass_spring_chain).
    pub mass: f64,
    /// Stiffness of each spring (mass_spring_chain).
    pub stiffness: f64,
    /// Damping of each damper (mass_spring_chain).
    pub damping: f64,
    /// Series resistance per section (rc_ladder).
    pub resistance: f64,
    /// Shunt capacitance per section (rc_ladder).
    pub capacitance: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            shift: 0.5,
            inputs: 1,
            outputs: 1,
            mass: 1.0,
            stiffness: 1.0,
            damping: 0.1,
            resistance: 1.0,
            capacitance: 1.0,
        }
    }
}

/// Generate an example system. `size` is the state dimension for
/// `random_stable`, the mass count for `mass_spring_chain` (order `2*size`),
/// and the section count for `rc_ladder`. Deterministic given the seed.
pub fn gen_example(
    kind: ExampleKind,
    size: usize,
    params: &GenParams,
    seed: u64,
) -> Result<StateSpaceModel> {
    if size < 1 {
        return Err(Error::InvalidArgument(format!(
            "example size must be at least 1, got {size}"
        )));
    }
    match kind {
        ExampleKind::RandomStable => random_stable(size, params, seed),
        ExampleKind::MassSpringChain => mass_spring_chain(size, params),
        ExampleKind::RcLadder => rc_ladder(size, params),
    }
}

fn random_stable(n: usize, params: &GenParams, seed: u64) -> Result<StateSpaceModel> {
    if !(params.shift > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stability shift must be positive, got {}",
            params.shift
        )));
    }
    if params.inputs < 1 || params.outputs < 1 {
        return Err(Error::InvalidArgument(
            "input and output counts must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |rows: usize, cols: usize| {
        Matrix::from_vec(
            rows,
            cols,
            (0..rows * cols)
                .map(|_| rng.sample(StandardNormal))
                .collect(),
        )
    };
    let g = normal(n, n)?;
    let b = normal(n, params.inputs)?;
    let c = normal(params.outputs, n)?;
    // Every eigenvalue of G lies within the spectral radius, so shifting by
    // radius + margin puts the whole spectrum left of -margin.
    let radius = eigenvalues(&g)?
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    let a = &g - &Matrix::identity(n).scale(radius + params.shift);
    StateSpaceModel::new(a, b, c, Matrix::zeros(params.outputs, params.inputs))
}

fn mass_spring_chain(k: usize, params: &GenParams) -> Result<StateSpaceModel> {
    let (mass, stiffness, damping) = (params.mass, params.stiffness, params.damping);
    if !(mass > 0.0) || !(stiffness > 0.0) || !(damping > 0.0) {
        return Err(Error::InvalidArgument(
            "mass, stiffness, and damping must all be positive".into(),
        ));
    }
    // Anchored chain: spring+damper from the wall to mass 1, then between
    // neighbors. The coupling pattern is the usual tridiagonal second
    // difference with a free last mass.
    let pattern = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            // Free last mass touches one spring; every other mass two.
            if i + 1 == k {
                1.0
            } else {
                2.0
            }
        } else if i + 1 == j || j + 1 == i {
            -1.0
        } else {
            0.0
        }
    });
    let n = 2 * k;
    let mut a = Matrix::zeros(n, n);
    a.set_block(0, k, &Matrix::identity(k));
    a.set_block(k, 0, &pattern.scale(-stiffness / mass));
    a.set_block(k, k, &pattern.scale(-damping / mass));
    let mut b = Matrix::zeros(n, 1);
    b[(k, 0)] = 1.0 / mass;
    let mut c = Matrix::zeros(1, n);
    c[(0, k - 1)] = 1.0;
    StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1))
}

fn rc_ladder(k: usize, params: &GenParams) -> Result<StateSpaceModel> {
    let (r, cap) = (params.resistance, params.capacitance);
    if !(r > 0.0) || !(cap > 0.0) {
        return Err(Error::InvalidArgument(
            "resistance and capacitance must be positive".into(),
        ));
    }
    let rate = 1.0 / (r * cap);
    let a = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            if i + 1 == k {
                -rate
            } else {
                -2.0 * rate
            }
        } else if i + 1 == j || j + 1 == i {
            rate
        } else {
            0.0
        }
    });
    let mut b = Matrix::zeros(k, 1);
    b[(0, 0)] = rate;
    let mut c = Matrix::zeros(1, k);
    c[(0, k - 1)] = 1.0;
    StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1))
}
