//! Model file: a length-prefixed JSON header (configuration, seed, epoch
//! count, input standardization) followed by every parameter tensor in the
//! canonical flat order as 32-bit IEEE-754 little-endian floats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::params::Parameters;
use crate::ClassifierError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelHeader {
    pub config: NetworkConfig,
    pub seed: u64,
    pub epochs: usize,
    pub input_mean: f64,
    pub input_std: f64,
}

pub fn save_model(
    path: &Path,
    params: &Parameters,
    seed: u64,
    epochs: usize,
) -> Result<(), ClassifierError> {
    let header = ModelHeader {
        config: params.cfg.clone(),
        seed,
        epochs,
        input_mean: params.input_mean,
        input_std: params.input_std,
    };
    let header_json = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(header_json.len() as u32).to_le_bytes())?;
    w.write_all(&header_json)?;
    for v in params.to_flat() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(Parameters, ModelHeader), ClassifierError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let header_len = u32::from_le_bytes(b4) as usize;
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: ModelHeader = serde_json::from_slice(&header_bytes)?;

    let mut params = Parameters::zeros_like(&header.config);
    let count = params.element_count() as usize;
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b4)?;
        flat.push(f32::from_le_bytes(b4) as f64);
    }
    params.assign_flat(&flat);
    params.input_mean = header.input_mean;
    params.input_std = header.input_std;
    Ok((params, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetworkConfig;

    #[test]
    fn model_round_trips_at_f32_precision() {
        let cfg = NetworkConfig::desk();
        let mut params = Parameters::init(&cfg, 9);
        params.input_mean = 12.5;
        params.input_std = 3.75;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.llmod");
        save_model(&path, &params, 9, 17).unwrap();
        let (back, header) = load_model(&path).unwrap();
        assert_eq!(header.config, cfg);
        assert_eq!(header.epochs, 17);
        assert_eq!(back.input_mean, 12.5);
        let a = params.to_flat();
        let b = back.to_flat();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x as f32, *y as f32);
        }
    }
}
