use std::path::Path;

use framelab::{ComplexVector, VectorSequence, C64};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

type RawVector = Vec<[f64; 2]>;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInput {
    Sequence(Vec<RawVector>),
    Pair { x: Vec<RawVector>, y: Vec<RawVector> },
    System { operator: Vec<RawVector>, seeds: Vec<RawVector>, depth: usize },
}

/// Parsed contents of an `--input` file.
#[derive(Clone, Debug)]
pub enum InputData {
    Sequence(VectorSequence),
    Pair(VectorSequence, VectorSequence),
    System { operator: DMatrix<C64>, seeds: Vec<ComplexVector>, depth: usize },
}

fn vector(raw: &RawVector) -> ComplexVector {
    ComplexVector::new(raw.iter().map(|&[re, im]| C64::new(re, im)).collect())
}

fn sequence(raw: &[RawVector], label: &str, path: &Path) -> CliResult<VectorSequence> {
    let bad = |msg: String| CliError::ConfigParse(format!("{}: {msg}", path.display()));
    let dim = raw.first().map(Vec::len).ok_or_else(|| bad(format!("`{label}` is empty")))?;
    if let Some(i) = raw.iter().position(|v| v.len() != dim) {
        return Err(bad(format!("`{label}` vector {i} has length {}, expected {dim}", raw[i].len())));
    }
    VectorSequence::new(dim, raw.iter().map(vector).collect(), label).map_err(|e| bad(e.to_string()))
}

pub fn read_input(path: &Path) -> CliResult<(InputData, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let raw: RawInput = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::ConfigParse(format!(
            "{}: expected a sequence, an x/y pair or an operator system ({e})",
            path.display()
        ))
    })?;
    let data = match raw {
        RawInput::Sequence(s) => InputData::Sequence(sequence(&s, "input", path)?),
        RawInput::Pair { x, y } => {
            let (x, y) = (sequence(&x, "x", path)?, sequence(&y, "y", path)?);
            if x.len() != y.len() {
                return Err(CliError::ConfigParse(format!(
                    "{}: x has {} vectors but y has {}",
                    path.display(),
                    x.len(),
                    y.len()
                )));
            }
            let d = x.ambient_dim().max(y.ambient_dim());
            InputData::Pair(x.padded(d), y.padded(d))
        }
        RawInput::System { operator, seeds, depth } => {
            let d = operator.len();
            if d == 0 || operator.iter().any(|r| r.len() != d) {
                return Err(CliError::ConfigParse(format!(
                    "{}: operator must be a non-empty square matrix",
                    path.display()
                )));
            }
            let seeds = sequence(&seeds, "seeds", path)?;
            if seeds.ambient_dim() != d {
                return Err(CliError::ConfigParse(format!(
                    "{}: seeds have dimension {}, operator has {d}",
                    path.display(),
                    seeds.ambient_dim()
                )));
            }
            let m = DMatrix::from_fn(d, d, |i, j| C64::new(operator[i][j][0], operator[i][j][1]));
            InputData::System { operator: m, seeds: seeds.vectors().to_vec(), depth }
        }
    };
    Ok((data, bytes))
}
