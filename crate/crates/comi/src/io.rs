//! `.cemb` streams and JSON sidecars.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use comi_core::codec;
use comi_core::{EmbeddingMatrix, Role};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Error from reading a `.cemb` stream: either the stream failed or its
/// contents are invalid.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Invalid(#[from] comi_core::Error),
}

pub fn read_embeddings<R: Read>(mut source: R) -> Result<EmbeddingMatrix, ReadError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(codec::decode(&bytes)?)
}

pub fn write_embeddings<W: Write>(m: &EmbeddingMatrix, mut sink: W) -> io::Result<()> {
    sink.write_all(&codec::encode(m))?;
    sink.flush()
}

/// Reads a `.cemb` file, checking its role when one is given.
pub fn load_embeddings(path: &Path, role: Option<Role>) -> Result<EmbeddingMatrix, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let m = read_embeddings(io::BufReader::new(file)).map_err(|e| match e {
        ReadError::Io(e) => CliError::io(path, e),
        ReadError::Invalid(e) => CliError::invalid(format!("{}: {e}", path.display())),
    })?;
    if let Some(role) = role {
        if m.role() != role {
            return Err(CliError::invalid(format!(
                "{}: expected role {:?}, found {:?}",
                path.display(),
                role,
                m.role()
            )));
        }
    }
    Ok(m)
}

pub fn save_embeddings(path: &Path, m: &EmbeddingMatrix) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_embeddings(m, io::BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}

/// `{"labels":[0,1,...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsFile {
    pub labels: Vec<u8>,
}

/// Scores as `{"scores":[...]}` or a bare array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoresFile {
    Object { scores: Vec<f64> },
    Array(Vec<f64>),
}

impl ScoresFile {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            ScoresFile::Object { scores } | ScoresFile::Array(scores) => scores,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub redundancy: f64,
    pub k: usize,
}
