//! Problem and protocol descriptions: the JSON schema, the line-oriented
//! text form, and the built-in demo cases.
//!
//! Sites and generator indices are 1-based in files (matching the usual
//! display conventions) and 0-based everywhere in code. A protocol file is
//! self-contained: it embeds the generators of the shared state so the
//! simulator can rebuild it without the original problem file.

use crate::cmat::CMatrix;
use crate::synth::{CorrectionRule, ProtocolSpec, SenderMeasurement};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use stabtel_core::decomp::Partition;
use stabtel_core::pauli::PauliOperator;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Text { line: usize, message: String },
    #[error("json: {0}")]
    Json(String),
    #[error("field {field}: {message}")]
    Field { field: String, message: String },
}

/// One sender's message input: either a seed for a random density matrix
/// or an explicit matrix.
#[derive(Clone, Debug)]
pub enum InputSpec {
    Seed(u64),
    Matrix(CMatrix),
}

/// A parsed problem: the stabilizer data plus the partition, an optional
/// user-supplied decomposition, and optional message inputs. Group-level
/// validation (commutation, eligibility, independence) happens later, in
/// the check command, so that those failures carry their own diagnostics.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub dim: u64,
    pub qudits: usize,
    pub generators: Vec<PauliOperator>,
    pub partition: Partition,
    /// 0-based generator index groups, senders first, receiver part last.
    pub decomposition: Option<Vec<Vec<usize>>>,
    pub inputs: Option<Vec<InputSpec>>,
}

// ---------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    d: u64,
    n: usize,
    generators: Vec<GeneratorJson>,
    /// 1-based site indices.
    partition: Vec<Vec<usize>>,
    /// 1-based index into `partition`.
    receiver: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decomposition: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inputs: Option<Vec<InputJson>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GeneratorJson {
    Text(String),
    Parts {
        phase_gamma: i64,
        x: Vec<i64>,
        z: Vec<i64>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum InputJson {
    Seed { seed: u64 },
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

fn matrix_to_json(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).re).collect())
        .collect();
    let im = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).im).collect())
        .collect();
    (re, im)
}

fn matrix_from_json(re: &[Vec<f64>], im: &[Vec<f64>], field: &str) -> Result<CMatrix, ParseError> {
    let rows = re.len();
    if rows == 0 || im.len() != rows {
        return Err(ParseError::Field {
            field: field.into(),
            message: "re/im row counts differ or are empty".into(),
        });
    }
    let cols = re[0].len();
    for (r, i) in re.iter().zip(im) {
        if r.len() != cols || i.len() != cols {
            return Err(ParseError::Field {
                field: field.into(),
                message: "ragged matrix rows".into(),
            });
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(re[i][j], im[i][j])
    }))
}

// ---------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------

/// Parse a problem from either the JSON schema or the line-oriented text
/// form (decided by the first non-whitespace byte).
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_problem_json(text)
    } else {
        parse_problem_text(text)
    }
}

fn one_based_sites(parts: &[Vec<usize>], n: usize) -> Result<Vec<Vec<usize>>, ParseError> {
    parts
        .iter()
        .map(|part| {
            part.iter()
                .map(|&s| {
                    if s == 0 || s > n {
                        Err(ParseError::Field {
                            field: "partition".into(),
                            message: format!("site {s} out of range 1..={n}"),
                        })
                    } else {
                        Ok(s - 1)
                    }
                })
                .collect()
        })
        .collect()
}

fn build_spec(
    d: u64,
    n: usize,
    generators: Vec<PauliOperator>,
    partition_parts: Vec<Vec<usize>>,
    receiver_one_based: usize,
    decomposition: Option<Vec<Vec<usize>>>,
    inputs: Option<Vec<InputSpec>>,
) -> Result<ProblemSpec, ParseError> {
    for (i, g) in generators.iter().enumerate() {
        if g.dim() != d || g.qudits() != n {
            return Err(ParseError::Field {
                field: format!("generators[{i}]"),
                message: format!(
                    "operator has d={}, n={}, expected d={d}, n={n}",
                    g.dim(),
                    g.qudits()
                ),
            });
        }
    }
    if receiver_one_based == 0 || receiver_one_based > partition_parts.len() {
        return Err(ParseError::Field {
            field: "receiver".into(),
            message: format!(
                "index {receiver_one_based} out of range 1..={}",
                partition_parts.len()
            ),
        });
    }
    let parts = one_based_sites(&partition_parts, n)?;
    let partition = Partition::with_receiver(n, parts, receiver_one_based - 1).map_err(|e| {
        ParseError::Field {
            field: "partition".into(),
            message: e.to_string(),
        }
    })?;
    let decomposition = match decomposition {
        None => None,
        Some(groups) => Some(
            groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&i| {
                            if i == 0 || i > generators.len() {
                                Err(ParseError::Field {
                                    field: "decomposition".into(),
                                    message: format!(
                                        "generator index {i} out of range 1..={}",
                                        generators.len()
                                    ),
                                })
                            } else {
                                Ok(i - 1)
                            }
                        })
                        .collect::<Result<Vec<usize>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    Ok(ProblemSpec {
        dim: d,
        qudits: n,
        generators,
        partition,
        decomposition,
        inputs,
    })
}

fn parse_problem_json(text: &str) -> Result<ProblemSpec, ParseError> {
    let raw: ProblemJson = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let generators = raw
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| match g {
            GeneratorJson::Text(s) => {
                PauliOperator::parse(raw.d, s).map_err(|e| ParseError::Field {
                    field: format!("generators[{i}]"),
                    message: e.to_string(),
                })
            }
            GeneratorJson::Parts { phase_gamma, x, z } => {
                PauliOperator::new(raw.d, *phase_gamma, x, z).map_err(|e| ParseError::Field {
                    field: format!("generators[{i}]"),
                    message: e.to_string(),
                })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inputs = raw.inputs.as_ref().map(|list| {
        list.iter()
            .enumerate()
            .map(|(i, inp)| match inp {
                InputJson::Seed { seed } => Ok(InputSpec::Seed(*seed)),
                InputJson::Matrix { re, im } => {
                    Ok(InputSpec::Matrix(matrix_from_json(re, im, &format!("inputs[{i}]"))?))
                }
            })
            .collect::<Result<Vec<_>, ParseError>>()
    });
    let inputs = match inputs {
        None => None,
        Some(r) => Some(r?),
    };
    build_spec(
        raw.d,
        raw.n,
        generators,
        raw.partition,
        raw.receiver,
        raw.decomposition,
        inputs,
    )
}

fn parse_problem_text(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut d: Option<u64> = None;
    let mut n: Option<usize> = None;
    let mut generators: Vec<PauliOperator> = Vec::new();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut receiver: Option<usize> = None;
    let mut decomposition: Option<Vec<Vec<usize>>> = None;
    let mut inputs: Vec<InputSpec> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ParseError::Text {
            line: line_no,
            message,
        };
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "d" => {
                d = Some(rest.parse().map_err(|_| err(format!("bad dimension '{rest}'")))?);
            }
            "n" => {
                n = Some(rest.parse().map_err(|_| err(format!("bad qudit count '{rest}'")))?);
            }
            "g" => {
                let dim = d.ok_or_else(|| err("generator before 'd' line".into()))?;
                generators.push(
                    PauliOperator::parse(dim, rest).map_err(|e| err(e.to_string()))?,
                );
            }
            "part" => {
                let sites = rest
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(format!("bad site list '{rest}'")))?;
                parts.push(sites);
            }
            "receiver" => {
                receiver =
                    Some(rest.parse().map_err(|_| err(format!("bad receiver index '{rest}'")))?);
            }
            "decomp" => {
                let groups = rest
                    .split('|')
                    .map(|grp| {
                        grp.trim()
                            .split(',')
                            .map(|s| s.trim().parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(format!("bad decomposition '{rest}'")))?;
                decomposition = Some(groups);
            }
            "input" => {
                let (kind, val) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err("expected 'input seed N'".into()))?;
                if kind != "seed" {
                    return Err(err(format!(
                        "unsupported input kind '{kind}' in text form (use JSON for matrices)"
                    )));
                }
                inputs.push(InputSpec::Seed(
                    val.trim().parse().map_err(|_| err(format!("bad seed '{val}'")))?,
                ));
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }
    let d = d.ok_or(ParseError::Text {
        line: 0,
        message: "missing 'd' line".into(),
    })?;
    let n = n.ok_or(ParseError::Text {
        line: 0,
        message: "missing 'n' line".into(),
    })?;
    let receiver = receiver.unwrap_or(parts.len());
    build_spec(
        d,
        n,
        generators,
        parts,
        receiver,
        decomposition,
        if inputs.is_empty() { None } else { Some(inputs) },
    )
}

/// Serialize a problem back to canonical JSON (1-based indices).
pub fn problem_to_json(spec: &ProblemSpec) -> String {
    let raw = ProblemJson {
        d: spec.dim,
        n: spec.qudits,
        generators: spec
            .generators
            .iter()
            .map(|g| GeneratorJson::Text(g.to_string()))
            .collect(),
        partition: spec
            .partition
            .parts()
            .iter()
            .map(|p| p.iter().map(|&s| s + 1).collect())
            .collect(),
        receiver: spec.partition.parts().len(),
        decomposition: spec
            .decomposition
            .as_ref()
            .map(|groups| {
                groups
                    .iter()
                    .map(|g| g.iter().map(|&i| i + 1).collect())
                    .collect()
            }),
        inputs: spec.inputs.as_ref().map(|list| {
            list.iter()
                .map(|inp| match inp {
                    InputSpec::Seed(seed) => InputJson::Seed { seed: *seed },
                    InputSpec::Matrix(m) => {
                        let (re, im) = matrix_to_json(m);
                        InputJson::Matrix { re, im }
                    }
                })
                .collect()
        }),
    };
    serde_json::to_string_pretty(&raw).expect("serializable")
}

// ---------------------------------------------------------------------
// protocol files
// ---------------------------------------------------------------------

pub const PROTOCOL_FORMAT: &str = "stabtel-protocol";

#[derive(Serialize, Deserialize)]
struct ProtocolJson {
    format: String,
    d: u64,
    n: usize,
    /// Generators of the shared stabilizer state (self-contained file).
    generators: Vec<String>,
    /// 1-based sites, receiver part last.
    partition: Vec<Vec<usize>>,
    capacities: Vec<usize>,
    unitary_after_measurement: bool,
    receiver_unitary_re: Vec<Vec<f64>>,
    receiver_unitary_im: Vec<Vec<f64>>,
    measurements: Vec<MeasurementJson>,
    /// 1-based destination sites per sender.
    destinations: Vec<Vec<usize>>,
    correction_x_coeff: Vec<i64>,
    correction_z_coeff: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementJson {
    /// 1-based state-site indices of the sender's part.
    sender_sites: Vec<usize>,
    operators: Vec<String>,
}

/// Returns true when the text looks like a protocol file.
pub fn is_protocol_json(text: &str) -> bool {
    text.trim_start().starts_with('{') && text.contains(PROTOCOL_FORMAT)
}

/// Serialize a protocol (with the generators of the state it teleports
/// through) to deterministic JSON bytes.
pub fn protocol_to_json(generators: &[PauliOperator], spec: &ProtocolSpec) -> String {
    let (re, im) = matrix_to_json(&spec.receiver_unitary);
    let raw = ProtocolJson {
        format: PROTOCOL_FORMAT.into(),
        d: spec.dim,
        n: spec.qudits,
        generators: generators.iter().map(|g| g.to_string()).collect(),
        partition: spec
            .partition
            .parts()
            .iter()
            .map(|p| p.iter().map(|&s| s + 1).collect())
            .collect(),
        capacities: spec.capacities.clone(),
        unitary_after_measurement: spec.unitary_after_measurement,
        receiver_unitary_re: re,
        receiver_unitary_im: im,
        measurements: spec
            .measurements
            .iter()
            .map(|m| MeasurementJson {
                sender_sites: m.sender_sites.iter().map(|&s| s + 1).collect(),
                operators: m.operators.iter().map(|o| o.to_string()).collect(),
            })
            .collect(),
        destinations: spec
            .destinations
            .iter()
            .map(|d| d.iter().map(|&s| s + 1).collect())
            .collect(),
        correction_x_coeff: spec.correction.x_coeff.clone(),
        correction_z_coeff: spec.correction.z_coeff.clone(),
    };
    serde_json::to_string_pretty(&raw).expect("serializable")
}

/// Parse a protocol file back into the generators and the protocol.
pub fn protocol_from_json(text: &str) -> Result<(Vec<PauliOperator>, ProtocolSpec), ParseError> {
    let raw: ProtocolJson =
        serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    if raw.format != PROTOCOL_FORMAT {
        return Err(ParseError::Field {
            field: "format".into(),
            message: format!("expected '{PROTOCOL_FORMAT}', found '{}'", raw.format),
        });
    }
    let generators = raw
        .generators
        .iter()
        .enumerate()
        .map(|(i, s)| {
            PauliOperator::parse(raw.d, s).map_err(|e| ParseError::Field {
                field: format!("generators[{i}]"),
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let parts = one_based_sites(&raw.partition, raw.n)?;
    let partition = Partition::new(raw.n, parts).map_err(|e| ParseError::Field {
        field: "partition".into(),
        message: e.to_string(),
    })?;
    let receiver_unitary = matrix_from_json(
        &raw.receiver_unitary_re,
        &raw.receiver_unitary_im,
        "receiver_unitary",
    )?;
    let measurements = raw
        .measurements
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let sender_sites = m
                .sender_sites
                .iter()
                .map(|&s| {
                    if s == 0 || s > raw.n {
                        Err(ParseError::Field {
                            field: format!("measurements[{i}].sender_sites"),
                            message: format!("site {s} out of range"),
                        })
                    } else {
                        Ok(s - 1)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let operators = m
                .operators
                .iter()
                .map(|s| {
                    PauliOperator::parse(raw.d, s).map_err(|e| ParseError::Field {
                        field: format!("measurements[{i}].operators"),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SenderMeasurement {
                sender_sites,
                operators,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let destinations = raw
        .destinations
        .iter()
        .map(|dst| {
            dst.iter()
                .map(|&s| {
                    if s == 0 || s > raw.n {
                        Err(ParseError::Field {
                            field: "destinations".into(),
                            message: format!("site {s} out of range"),
                        })
                    } else {
                        Ok(s - 1)
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if raw.correction_x_coeff.len() != raw.correction_z_coeff.len() {
        return Err(ParseError::Field {
            field: "correction".into(),
            message: "x/z coefficient lists differ in length".into(),
        });
    }
    let spec = ProtocolSpec {
        dim: raw.d,
        qudits: raw.n,
        partition,
        capacities: raw.capacities,
        receiver_unitary,
        unitary_after_measurement: raw.unitary_after_measurement,
        measurements,
        destinations,
        correction: CorrectionRule {
            x_coeff: raw.correction_x_coeff,
            z_coeff: raw.correction_z_coeff,
        },
    };
    Ok((generators, spec))
}

// ---------------------------------------------------------------------
// built-in demos
// ---------------------------------------------------------------------

/// The four built-in demonstration cases.
pub const DEMO_NAMES: [&str; 4] = ["example1", "example2", "example3a", "example3b"];

/// Build one of the built-in cases by name.
pub fn demo_problem(name: &str) -> Option<ProblemSpec> {
    let text = match name {
        // maximally entangled pair, one sender
        "example1" => {
            "d 2\nn 2\ng Z^-1 Z\ng X X\npart 1\npart 2\nreceiver 2\n"
        }
        // five-qutrit complete stabilizer, capacity 2 bipartition
        "example2" => {
            "d 3\nn 5\n\
             g X X^2 X Z Z\n\
             g Z^2 Z I X I\n\
             g Z Z Z I X\n\
             g X X Z X Z^2\n\
             g I I Z^2 X^2 I\n\
             part 1,2\npart 3,4,5\nreceiver 2\n"
        }
        // eight-qubit mixed stabilizer, two senders, capacities (1,2)
        "example3a" => {
            "d 2\nn 8\n\
             g X Y I I I Z Y I\n\
             g X Z I I I X Y I\n\
             g I I Z Y Z I Y X\n\
             g I I Z I X I Y Z\n\
             g I I Z Z X Y X Y\n\
             g I I X X Z Y Z Y\n\
             g Z X I Z X I I I\n\
             part 1,2\npart 3,4,5\npart 6,7,8\nreceiver 3\n"
        }
        // the same state under a different partition, capacities (1,1)
        "example3b" => {
            "d 2\nn 8\n\
             g X Y I I I Z Y I\n\
             g X Z I I I X Y I\n\
             g I I Z Y Z I Y X\n\
             g I I Z I X I Y Z\n\
             g I I Z Z X Y X Y\n\
             g I I X X Z Y Z Y\n\
             g Z X I Z X I I I\n\
             part 1,6\npart 3,8\npart 2,4,5,7\nreceiver 3\n"
        }
        _ => return None,
    };
    Some(parse_problem(text).expect("built-in demos parse"))
}
