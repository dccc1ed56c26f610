//! File schemas and writers: problems, witnesses and certificates as JSON
//! (complex numbers as {"re": …, "im": …}, matrices as row-major nested
//! arrays), trace tables as CSV. Output files are written atomically.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryCertificate, AdversaryWitness};
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::matrix::{CMatrix, CVector};
use crate::query::parse_input;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexEntry {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexEntry> for C64 {
    fn from(e: ComplexEntry) -> Self {
        C64::new(e.re, e.im)
    }
}

pub type MatrixJson = Vec<Vec<ComplexEntry>>;
pub type VectorJson = Vec<ComplexEntry>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].into()).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows == 0 || ncols == 0 {
        return Err(Error::Schema("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Schema("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |r, c| rows[r][c].into()))
}

pub fn vector_to_json(v: &CVector) -> VectorJson {
    v.iter().map(|z| (*z).into()).collect()
}

pub fn vector_from_json(entries: &VectorJson) -> CVector {
    DVector::from_iterator(entries.len(), entries.iter().map(|e| C64::from(*e)))
}

/// On-disk problem statement: either explicit Gram matrices over listed
/// inputs, or a function truth table expanded to the pair (all-ones, F).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemFile {
    Matrix {
        alphabet: usize,
        n: usize,
        inputs: Vec<String>,
        rho: MatrixJson,
        sigma: MatrixJson,
    },
    Function {
        function: BTreeMap<String, String>,
    },
}

/// A validated, loaded problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub labels: Vec<String>,
    pub n: usize,
    pub alphabet: usize,
    pub rho: GramMatrix,
    pub sigma: GramMatrix,
}

fn infer_alphabet(labels: &[String]) -> Result<usize> {
    let mut max_symbol = 0usize;
    for l in labels {
        for c in l.chars() {
            let v = c.to_digit(36).ok_or(Error::SymbolOutOfRange {
                symbol: c,
                alphabet: 36,
            })? as usize;
            max_symbol = max_symbol.max(v);
        }
    }
    Ok((max_symbol + 1).max(2))
}

pub fn problem_from_value(file: ProblemFile) -> Result<Problem> {
    match file {
        ProblemFile::Matrix {
            alphabet,
            n,
            inputs,
            rho,
            sigma,
        } => {
            if alphabet < 2 {
                return Err(Error::Schema(format!("alphabet must be ≥ 2, got {alphabet}")));
            }
            for input in &inputs {
                if input.chars().count() != n {
                    return Err(Error::Schema(format!(
                        "input {input:?} does not have length {n}"
                    )));
                }
                parse_input(input, alphabet)?;
            }
            let rho = GramMatrix::new(inputs.clone(), matrix_from_json(&rho)?)?;
            let sigma = GramMatrix::new(inputs.clone(), matrix_from_json(&sigma)?)?;
            Ok(Problem {
                labels: inputs,
                n,
                alphabet,
                rho,
                sigma,
            })
        }
        ProblemFile::Function { function } => {
            let (rho, sigma) = GramMatrix::from_truth_table(&function)?;
            let labels = rho.labels().to_vec();
            let n = labels[0].chars().count();
            let alphabet = infer_alphabet(&labels)?;
            Ok(Problem {
                labels,
                n,
                alphabet,
                rho,
                sigma,
            })
        }
    }
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path)?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    problem_from_value(file)
}

/// Witness JSON: per-label arrays of n vectors of m complex entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub m: usize,
    pub value: f64,
    pub u: BTreeMap<String, Vec<VectorJson>>,
    pub v: BTreeMap<String, Vec<VectorJson>>,
}

pub fn witness_to_file(witness: &AdversaryWitness) -> WitnessFile {
    let side = |vectors: &[Vec<CVector>]| -> BTreeMap<String, Vec<VectorJson>> {
        witness
            .labels
            .iter()
            .zip(vectors.iter())
            .map(|(label, per_j)| {
                (
                    label.clone(),
                    per_j.iter().map(vector_to_json).collect(),
                )
            })
            .collect()
    };
    WitnessFile {
        m: witness.m,
        value: witness.value,
        u: side(&witness.u),
        v: side(&witness.v),
    }
}

pub fn witness_from_file(file: &WitnessFile, labels: &[String], n: usize) -> Result<AdversaryWitness> {
    let side = |map: &BTreeMap<String, Vec<VectorJson>>, name: &str| -> Result<Vec<Vec<CVector>>> {
        labels
            .iter()
            .map(|label| {
                let per_j = map
                    .get(label)
                    .ok_or_else(|| Error::Schema(format!("witness {name} missing label {label:?}")))?;
                if per_j.len() != n {
                    return Err(Error::Schema(format!(
                        "witness {name}[{label}] has {} vectors, expected {n}",
                        per_j.len()
                    )));
                }
                per_j
                    .iter()
                    .map(|entries| {
                        if entries.len() != file.m {
                            return Err(Error::Schema(format!(
                                "witness {name}[{label}] vector of length {}, expected m = {}",
                                entries.len(),
                                file.m
                            )));
                        }
                        Ok(vector_from_json(entries))
                    })
                    .collect()
            })
            .collect()
    };
    let u = side(&file.u, "u")?;
    let v = side(&file.v, "v")?;
    Ok(AdversaryWitness::new(labels.to_vec(), u, v))
}

pub fn load_witness(path: &Path, labels: &[String], n: usize) -> Result<AdversaryWitness> {
    let text = fs::read_to_string(path)?;
    let file: WitnessFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    witness_from_file(&file, labels, n)
}

pub fn save_witness(path: &Path, witness: &AdversaryWitness) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(&witness_to_file(witness))?.as_bytes())
}

/// Certificate JSON: the adversary matrix, the ensemble vector, value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub labels: Vec<String>,
    pub gamma: MatrixJson,
    pub v: VectorJson,
    pub value: f64,
}

pub fn certificate_to_file(certificate: &AdversaryCertificate) -> CertificateFile {
    CertificateFile {
        labels: certificate.labels.clone(),
        gamma: matrix_to_json(&certificate.gamma),
        v: vector_to_json(&certificate.vector),
        value: certificate.value,
    }
}

pub fn certificate_from_file(file: &CertificateFile, labels: &[String]) -> Result<AdversaryCertificate> {
    if file.labels.as_slice() != labels {
        return Err(Error::Schema(
            "certificate labels do not match the problem".into(),
        ));
    }
    let gamma = matrix_from_json(&file.gamma)?;
    if file.v.len() != labels.len() {
        return Err(Error::Schema(format!(
            "certificate vector of length {}, expected {}",
            file.v.len(),
            labels.len()
        )));
    }
    Ok(AdversaryCertificate {
        labels: labels.to_vec(),
        gamma,
        vector: vector_from_json(&file.v),
        value: file.value,
    })
}

pub fn load_certificate(path: &Path, labels: &[String]) -> Result<AdversaryCertificate> {
    let text = fs::read_to_string(path)?;
    let file: CertificateFile = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    certificate_from_file(&file, labels)
}

pub fn save_certificate(path: &Path, certificate: &AdversaryCertificate) -> Result<()> {
    write_atomic(
        path,
        serde_json::to_string_pretty(&certificate_to_file(certificate))?.as_bytes(),
    )
}

/// Everything one batch invocation needs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub problem: PathBuf,
    pub witness: Option<PathBuf>,
    pub epsilons: Vec<f64>,
    pub tau_factor: f64,
    pub tau_override: Option<f64>,
    pub steps: usize,
    pub grid: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        for &eps in &self.epsilons {
            if eps <= 0.0 || eps > 1.0 {
                return Err(Error::InvalidEpsilon(eps));
            }
        }
        if self.tau_factor <= 0.0 {
            return Err(Error::Schema(format!(
                "tau factor must be positive, got {}",
                self.tau_factor
            )));
        }
        Ok(())
    }
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Plain numeric CSV with a header row.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}
