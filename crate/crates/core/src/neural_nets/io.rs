//! Flat binary weight dump.
//!
//! Layout (all integers little-endian):
//! magic `SLNN`, u32 version (1), u32 network count; then per network a
//! u8 output activation (0 = linear, 1 = tanh), u32 layer count, per-layer
//! u32 (in, out) pairs, and per-layer row-major f64 weights followed by the
//! f64 bias.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

use super::mlp::{Activation, DenseLayer, MlpParams};

const MAGIC: &[u8; 4] = b"SLNN";
const VERSION: u32 = 1;

/// Writes networks in declaration order.
pub fn write_networks(path: &Path, nets: &[&MlpParams]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(nets.len() as u32).to_le_bytes())?;
    for net in nets {
        let act: u8 = match net.output_activation {
            Activation::Linear => 0,
            Activation::Tanh => 1,
        };
        out.write_all(&[act])?;
        out.write_all(&(net.layers.len() as u32).to_le_bytes())?;
        for layer in &net.layers {
            out.write_all(&(layer.input_dim() as u32).to_le_bytes())?;
            out.write_all(&(layer.output_dim() as u32).to_le_bytes())?;
        }
        for layer in &net.layers {
            for w in layer.weights.iter() {
                out.write_all(&w.to_le_bytes())?;
            }
            for b in layer.bias.iter() {
                out.write_all(&b.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Reads a file written by [`write_networks`].
pub fn read_networks(path: &Path) -> Result<Vec<MlpParams>> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter(format!(
            "weight file {}: bad magic",
            path.display()
        )));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::InvalidParameter(format!(
            "weight file {}: unsupported version {version}",
            path.display()
        )));
    }
    let count = read_u32(&mut input)? as usize;
    let mut nets = Vec::with_capacity(count);
    for _ in 0..count {
        let mut act = [0u8; 1];
        input.read_exact(&mut act)?;
        let output_activation = match act[0] {
            0 => Activation::Linear,
            1 => Activation::Tanh,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "weight file {}: unknown activation tag {other}",
                    path.display()
                )))
            }
        };
        let n_layers = read_u32(&mut input)? as usize;
        let mut dims = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let rows = read_u32(&mut input)? as usize;
            let cols = read_u32(&mut input)? as usize;
            dims.push((rows, cols));
        }
        if n_layers == 0 {
            return Err(Error::InvalidParameter(format!(
                "weight file {}: empty network",
                path.display()
            )));
        }
        for pair in dims.windows(2) {
            if pair[0].1 != pair[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "weight file {}: layer dimensions do not chain ({} -> {})",
                    path.display(),
                    pair[0].1,
                    pair[1].0
                )));
            }
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (rows, cols) in dims {
            let mut weights = Array2::zeros((rows, cols));
            for w in weights.iter_mut() {
                *w = read_f64(&mut input)?;
            }
            let mut bias = Array1::zeros(cols);
            for b in bias.iter_mut() {
                *b = read_f64(&mut input)?;
            }
            layers.push(DenseLayer { weights, bias });
        }
        nets.push(MlpParams {
            layers,
            output_activation,
        });
    }
    Ok(nets)
}
