use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::TorusLattice;
use super::SpectralState;
use crate::error::{Error, Result};

const ENCODING: &str = "base64-f64le-interleaved";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub cutoff: usize,
    pub rho: f64,
    pub t: f64,
    pub family: String,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    #[serde(flatten)]
    header: SnapshotHeader,
    encoding: String,
    coefficients: String,
}

pub fn encode_snapshot(state: &SpectralState, family: &str, seed: Option<u64>) -> String {
    let mut bytes = Vec::with_capacity(16 * state.coeffs().len());
    for c in state.coeffs() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    let file = SnapshotFile {
        header: SnapshotHeader {
            length: state.lattice().length(),
            cutoff: state.lattice().cutoff(),
            rho: state.rho(),
            t: state.t(),
            family: family.to_owned(),
            seed,
        },
        encoding: ENCODING.to_owned(),
        coefficients: STANDARD.encode(bytes),
    };
    serde_json::to_string_pretty(&file).expect("snapshot serializes")
}

pub fn decode_snapshot(text: &str) -> Result<(SpectralState, SnapshotHeader)> {
    let file: SnapshotFile = serde_json::from_str(text)?;
    if file.encoding != ENCODING {
        return Err(Error::Snapshot(format!(
            "unsupported encoding `{}`",
            file.encoding
        )));
    }
    let bytes = STANDARD
        .decode(file.coefficients.as_bytes())
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Snapshot(
            "coefficient block is not a whole number of complex values".into(),
        ));
    }
    let coeffs: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let h = &file.header;
    let lattice = TorusLattice::new(h.length, h.cutoff)?;
    let state = SpectralState::unchecked(lattice, h.rho, h.t, coeffs)?;
    if (state.mass() - 1.0).abs() > super::NORM_TOLERANCE {
        return Err(Error::Snapshot(format!(
            "stored state has mass {}",
            state.mass()
        )));
    }
    Ok((state, file.header))
}

pub fn write_snapshot(
    path: &Path,
    state: &SpectralState,
    family: &str,
    seed: Option<u64>,
) -> Result<()> {
    fs::write(path, encode_snapshot(state, family, seed)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(SpectralState, SnapshotHeader)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&text)
}
