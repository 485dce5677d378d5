//! Binary model checkpoints with a bit-exact round trip.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic          8 bytes  "EQSYMNET"
//! version        u32      currently 1
//! head kind      u8       0 mean pool, 1 max pool, 2 Vandermonde product, 3 GSD
//! activation     u8       0 relu, 1 tanh
//! final_linear   u8       0 or 1
//! n, d           u32 each
//! num_layers     u32
//! widths         (num_layers + 1) x u32
//! per layer      W then V (row-major, d_out x d_in) then u, all f64 bits
//! ```

use super::emlp::{EmlpLayer, EmlpParams};
use super::head::HeadSpec;
use super::model::EquivariantModel;
use super::Activation;
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 8] = b"EQSYMNET";
const VERSION: u32 = 1;

fn head_code(head: HeadSpec) -> u8 {
    match head {
        HeadSpec::MeanPool => 0,
        HeadSpec::MaxPool => 1,
        HeadSpec::VandermondeProduct => 2,
        HeadSpec::GsdHead => 3,
    }
}

fn head_from_code(code: u8) -> Result<HeadSpec> {
    match code {
        0 => Ok(HeadSpec::MeanPool),
        1 => Ok(HeadSpec::MaxPool),
        2 => Ok(HeadSpec::VandermondeProduct),
        3 => Ok(HeadSpec::GsdHead),
        other => Err(Error::Checkpoint(format!("unknown head code {other}"))),
    }
}

fn activation_code(a: Activation) -> u8 {
    match a {
        Activation::Relu => 0,
        Activation::Tanh => 1,
    }
}

fn activation_from_code(code: u8) -> Result<Activation> {
    match code {
        0 => Ok(Activation::Relu),
        1 => Ok(Activation::Tanh),
        other => Err(Error::Checkpoint(format!("unknown activation code {other}"))),
    }
}

pub fn save_checkpoint(model: &EquivariantModel, path: &Path) -> Result<()> {
    let emlp = &model.emlp;
    let widths = emlp.widths();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.push(head_code(model.head()));
    bytes.push(activation_code(emlp.activation));
    bytes.push(emlp.final_linear as u8);
    bytes.extend_from_slice(&(model.n() as u32).to_le_bytes());
    bytes.extend_from_slice(&(model.d() as u32).to_le_bytes());
    bytes.extend_from_slice(&(emlp.layers.len() as u32).to_le_bytes());
    for w in &widths {
        bytes.extend_from_slice(&(*w as u32).to_le_bytes());
    }
    for layer in &emlp.layers {
        for value in layer.w.iter().chain(&layer.v).chain(&layer.u) {
            bytes.extend_from_slice(&value.to_le_bytes());
        }
    }
    fs::write(path, bytes)
        .map_err(|e| Error::Checkpoint(format!("writing {}: {e}", path.display())))
}

/// Sequential reader over the checkpoint bytes.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Checkpoint(format!(
                "unexpected end of file at byte {} (wanted {len} more of {})",
                self.pos,
                self.bytes.len()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("length checked")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("length checked")))
    }
}

pub fn load_checkpoint(path: &Path) -> Result<EquivariantModel> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Checkpoint(format!("reading {}: {e}", path.display())))?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Checkpoint("bad magic; not a model checkpoint".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {VERSION})"
        )));
    }
    let head = head_from_code(r.u8()?)?;
    let activation = activation_from_code(r.u8()?)?;
    let final_linear = match r.u8()? {
        0 => false,
        1 => true,
        other => {
            return Err(Error::Checkpoint(format!("invalid final_linear flag {other}")));
        }
    };
    let n = r.u32()? as usize;
    let d = r.u32()? as usize;
    let num_layers = r.u32()? as usize;
    let mut widths = Vec::with_capacity(num_layers + 1);
    for _ in 0..=num_layers {
        widths.push(r.u32()? as usize);
    }
    let mut layers = Vec::with_capacity(num_layers);
    for l in 0..num_layers {
        let (d_in, d_out) = (widths[l], widths[l + 1]);
        let read_block = |len: usize, r: &mut Reader| -> Result<Vec<f64>> {
            (0..len).map(|_| r.f64()).collect()
        };
        let w = read_block(d_out * d_in, &mut r)?;
        let v = read_block(d_out * d_in, &mut r)?;
        let u = read_block(d_out, &mut r)?;
        layers.push(EmlpLayer { d_in, d_out, w, v, u });
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the last layer",
            bytes.len() - r.pos
        )));
    }
    let emlp = EmlpParams::new(layers, activation, final_linear)
        .map_err(|e| Error::Checkpoint(format!("invalid layer chain: {e}")))?;
    EquivariantModel::new(n, d, emlp, head)
        .map_err(|e| Error::Checkpoint(format!("invalid model shape: {e}")))
}
