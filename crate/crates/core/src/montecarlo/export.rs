//! Path export.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic     8 bytes  "RMVPATH1"
//! n_paths   u64
//! n_nodes   u64
//! n_fields  u64      2 (nu) or 3 (nu, wealth) per node, time first
//! rows      f64      n_paths * n_nodes rows of n_fields values, path-major
//! ```

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

use super::paths::PathBundle;

pub const BINARY_MAGIC: &[u8; 8] = b"RMVPATH1";

/// Columnar CSV `path_id,t,nu,wealth`; `wealth` is empty when absent.
pub fn paths_to_csv(bundle: &PathBundle) -> String {
    let mut out = String::from("path_id,t,nu,wealth\n");
    let times = bundle.grid.times();
    for p in 0..bundle.n_paths {
        let nu = bundle.variance_path(p);
        let wealth = bundle.wealth_path(p);
        for (i, t) in times.iter().enumerate() {
            let _ = write!(out, "{p},{t:?},{:?},", nu[i]);
            if let Some(w) = wealth {
                let _ = write!(out, "{:?}", w[i]);
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_paths_binary<W: Write>(bundle: &PathBundle, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Resource(format!("failed to write paths: {e}"));
    let fields: u64 = if bundle.wealth.is_some() { 3 } else { 2 };
    out.write_all(BINARY_MAGIC).map_err(io)?;
    for v in [bundle.n_paths as u64, bundle.nodes() as u64, fields] {
        out.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    let times = bundle.grid.times();
    let mut buf = Vec::with_capacity(bundle.nodes() * fields as usize * 8);
    for p in 0..bundle.n_paths {
        buf.clear();
        let nu = bundle.variance_path(p);
        let wealth = bundle.wealth_path(p);
        for (i, t) in times.iter().enumerate() {
            buf.extend_from_slice(&t.to_le_bytes());
            buf.extend_from_slice(&nu[i].to_le_bytes());
            if let Some(w) = wealth {
                buf.extend_from_slice(&w[i].to_le_bytes());
            }
        }
        out.write_all(&buf).map_err(io)?;
    }
    Ok(())
}

/// Parse the binary layout back into `(n_paths, n_nodes, n_fields, rows)`.
pub fn read_paths_binary(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<f64>)> {
    let bad = || Error::InvalidArgument("not a path dump".into());
    if bytes.len() < 32 || &bytes[..8] != BINARY_MAGIC {
        return Err(bad());
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap()) as usize;
    let (paths, nodes, fields) = (word(0), word(1), word(2));
    let body = &bytes[32..];
    if body.len() != paths * nodes * fields * 8 {
        return Err(bad());
    }
    let rows = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((paths, nodes, fields, rows))
}
