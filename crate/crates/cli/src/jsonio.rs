//! JSON file formats shared by the subcommands.

use algstat_core::ci::{CISignature, TableN};
use algstat_core::gauss::{CIStatement, CovMatrix};
use algstat_core::mat::Mat;
use algstat_core::rat::{rat_from_str, rat_to_string, Rat};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// Symmetric matrix file: row-major upper triangle including the diagonal.
#[derive(Serialize, Deserialize)]
pub struct SigmaJson {
    pub n: usize,
    pub upper: Vec<String>,
}

pub fn read_sigma(path: &Path) -> Result<CovMatrix> {
    let raw: SigmaJson = read_json(path)?;
    let upper: Vec<Rat> = raw
        .upper
        .iter()
        .map(|s| rat_from_str(s))
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing entries of {}", path.display()))?;
    Ok(CovMatrix::from_upper(raw.n, &upper)?)
}

pub fn sigma_to_json(cov: &CovMatrix) -> SigmaJson {
    SigmaJson {
        n: cov.n(),
        upper: cov.upper().iter().map(rat_to_string).collect(),
    }
}

/// CI signature file: statements as `"i,j|k1,k2"`, 1-based.
#[derive(Serialize, Deserialize)]
pub struct SignatureJson {
    pub n: usize,
    pub dims: Vec<usize>,
    pub holds: Vec<String>,
}

pub fn read_signature(path: &Path) -> Result<CISignature> {
    let raw: SignatureJson = read_json(path)?;
    let stmts: Vec<CIStatement> = raw
        .holds
        .iter()
        .map(|s| CIStatement::parse(raw.n, s))
        .collect::<std::result::Result<_, _>>()?;
    Ok(CISignature::from_statements(raw.n, raw.dims, &stmts)?)
}

pub fn signature_to_json(sig: &CISignature) -> SignatureJson {
    SignatureJson {
        n: sig.n,
        dims: sig.dims.clone(),
        holds: sig.members().iter().map(|s| s.display()).collect(),
    }
}

/// Count matrix: a JSON array of arrays of non-negative integers.
pub fn read_counts(path: &Path) -> Result<Vec<Vec<u64>>> {
    let v: Value = read_json(path)?;
    let rows = v.as_array().context("counts file must be an array of arrays")?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row.as_array().context("counts row must be an array")?;
        let mut r = Vec::with_capacity(cells.len());
        for c in cells {
            let x = c.as_u64().context("counts must be non-negative integers")?;
            r.push(x);
        }
        out.push(r);
    }
    if out.is_empty() {
        bail!("empty counts matrix");
    }
    Ok(out)
}

/// Probability matrix: array of arrays of rationals (strings or numbers).
pub fn read_rat_matrix(path: &Path) -> Result<Mat<Rat>> {
    let v: Value = read_json(path)?;
    let rows = v.as_array().context("table file must be an array of arrays")?;
    let mut data: Vec<Vec<Rat>> = Vec::new();
    for row in rows {
        let cells = row.as_array().context("table row must be an array")?;
        let mut r = Vec::new();
        for c in cells {
            r.push(value_to_rat(c)?);
        }
        data.push(r);
    }
    if data.is_empty() || data[0].is_empty() {
        bail!("empty table");
    }
    Ok(Mat::from_rows(data))
}

fn value_to_rat(v: &Value) -> Result<Rat> {
    match v {
        Value::String(s) => Ok(rat_from_str(s)?),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i.into()))
            } else {
                bail!("non-integer numeric entries must be given as \"num/den\" strings")
            }
        }
        other => bail!("expected a rational entry, found {other}"),
    }
}

/// `TableN` file (also accepts three-way tables for the invariants
/// commands): `{"dims":[...],"entries":["1/2",...]}`.
pub fn read_table(path: &Path) -> Result<TableN> {
    let t: TableN = read_json(path)?;
    TableN::new(t.dims, t.entries).map_err(Into::into)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
