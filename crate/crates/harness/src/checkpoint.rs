//! Binary state dumps.
//!
//! Layout: the 8-byte magic `TFCKPT01`, a little-endian `u64` header length,
//! a JSON [`CheckpointHeader`], then one little-endian `f64` array of
//! `n₁·n₂` values per entry of `header.fields`, in that order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use torusflow_core::cns::{CnsParams, CnsState};
use torusflow_core::ins::InsState;
use torusflow_core::spectral::{GridSpec, ScalarField, TorusGrid, VectorField};

use crate::config::System;
use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 8] = b"TFCKPT01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub system: System,
    pub time: f64,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cns_params: Option<CnsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// `ε_vac` for the compressible state, `ε_den` for the incompressible one.
    pub epsilon: f64,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum Snapshot {
    Cns(CnsState),
    Ins(InsState),
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        match self {
            Snapshot::Cns(s) => s.time,
            Snapshot::Ins(s) => s.time,
        }
    }
}

fn fields_of(snap: &Snapshot) -> (CheckpointHeader, Vec<&ScalarField>) {
    match snap {
        Snapshot::Cns(s) => (
            CheckpointHeader {
                system: System::Cns,
                time: s.time,
                grid: s.grid().spec(),
                cns_params: Some(s.params),
                mu: None,
                epsilon: s.eps_vac,
                fields: ["rho", "m_x", "m_y", "u_x", "u_y"]
                    .map(String::from)
                    .to_vec(),
            },
            vec![
                &s.rho,
                &s.momentum.x,
                &s.momentum.y,
                &s.velocity.x,
                &s.velocity.y,
            ],
        ),
        Snapshot::Ins(s) => (
            CheckpointHeader {
                system: System::Ins,
                time: s.time,
                grid: s.grid().spec(),
                cns_params: None,
                mu: Some(s.mu),
                epsilon: s.eps_den,
                fields: ["rho", "u_x", "u_y", "p"].map(String::from).to_vec(),
            },
            vec![&s.rho, &s.u.x, &s.u.y, &s.p],
        ),
    }
}

pub fn encode(snap: &Snapshot) -> Vec<u8> {
    let (header, fields) = fields_of(snap);
    let json = serde_json::to_vec(&header).expect("header serializes");
    let n: usize = fields.iter().map(|f| f.values().len()).sum();
    let mut out = Vec::with_capacity(16 + json.len() + 8 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for f in fields {
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn corrupt(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(format!("invalid checkpoint: {}", msg.into()))
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes
        .get(16..16 + hlen)
        .ok_or_else(|| corrupt("truncated header"))?;
    let header: CheckpointHeader = serde_json::from_slice(body)?;
    let grid = TorusGrid::from_spec(header.grid).map_err(|e| corrupt(e.to_string()))?;
    let n = grid.len();
    let data = &bytes[16 + hlen..];
    if data.len() != 8 * n * header.fields.len() {
        return Err(corrupt(format!(
            "expected {} data bytes, found {}",
            8 * n * header.fields.len(),
            data.len()
        )));
    }
    let field = |name: &str| -> Result<ScalarField> {
        let k = header
            .fields
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| corrupt(format!("missing field {name}")))?;
        let values = data[8 * n * k..8 * n * (k + 1)]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        ScalarField::from_values(&grid, values).map_err(|e| corrupt(e.to_string()))
    };
    let vector = |a: &str, b: &str| -> Result<VectorField> {
        VectorField::new(field(a)?, field(b)?).map_err(|e| corrupt(e.to_string()))
    };
    Ok(match header.system {
        System::Cns => {
            let params = header
                .cns_params
                .ok_or_else(|| corrupt("missing parameters"))?;
            Snapshot::Cns(CnsState {
                time: header.time,
                rho: field("rho")?,
                momentum: vector("m_x", "m_y")?,
                velocity: vector("u_x", "u_y")?,
                params,
                eps_vac: header.epsilon,
            })
        }
        System::Ins => Snapshot::Ins(InsState {
            time: header.time,
            rho: field("rho")?,
            u: vector("u_x", "u_y")?,
            p: field("p")?,
            mu: header.mu.ok_or_else(|| corrupt("missing viscosity"))?,
            eps_den: header.epsilon,
        }),
    })
}

/// Write `bytes` to a sibling temporary file, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let ctx = |what: &str| format!("{what} {}", tmp.display());
    let mut f = fs::File::create(&tmp).map_err(|e| HarnessError::io(ctx("create"), e))?;
    f.write_all(bytes)
        .map_err(|e| HarnessError::io(ctx("write"), e))?;
    f.sync_all().map_err(|e| HarnessError::io(ctx("sync"), e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(format!("rename to {}", path.display()), e))
}

pub fn save(path: &Path, snap: &Snapshot) -> Result<()> {
    write_atomic(path, &encode(snap))
}

pub fn load(path: &Path) -> Result<Snapshot> {
    let bytes =
        fs::read(path).map_err(|e| HarnessError::io(format!("read {}", path.display()), e))?;
    decode(&bytes)
}
