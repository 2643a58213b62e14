//! Binary weight checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        4 bytes  "CHQN"
//! version      u32      1
//! epsilon      f64      exploration rate when saved
//! games        u64      games trained so far
//! layers       u32
//! per layer:   u32 inputs, u32 outputs, u8 activation (0 relu, 1 tanh, 2 linear)
//! per layer:   inputs*outputs f64 weights (row-major, shape inputs x outputs),
//!              then outputs f64 bias
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::network::{Activation, Dense, QNetwork};

pub const MAGIC: &[u8; 4] = b"CHQN";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    Magic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("unknown activation code {0}")]
    Activation(u8),
    #[error("layer shapes do not chain")]
    Shape,
    #[error("network shape {found:?} does not fit this game (expected input {input}, output {output})")]
    Mismatch { found: (usize, usize), input: usize, output: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epsilon: f64,
    pub games: u64,
    pub network: QNetwork,
}

impl Checkpoint {
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&self.epsilon.to_le_bytes())?;
        out.write_all(&self.games.to_le_bytes())?;
        out.write_all(&(self.network.layers.len() as u32).to_le_bytes())?;
        for layer in &self.network.layers {
            out.write_all(&(layer.inputs() as u32).to_le_bytes())?;
            out.write_all(&(layer.outputs() as u32).to_le_bytes())?;
            out.write_all(&[layer.activation.code()])?;
        }
        for layer in &self.network.layers {
            for w in layer.weights.iter().chain(layer.bias.iter()) {
                out.write_all(&w.to_le_bytes())?;
            }
        }
        out.flush()
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self, CheckpointError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CheckpointError::Magic);
        }
        let version = read_u32(&mut input)?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let epsilon = read_f64(&mut input)?;
        let mut games = [0u8; 8];
        input.read_exact(&mut games)?;
        let games = u64::from_le_bytes(games);
        let count = read_u32(&mut input)? as usize;
        let mut shapes = Vec::with_capacity(count);
        for _ in 0..count {
            let inputs = read_u32(&mut input)? as usize;
            let outputs = read_u32(&mut input)? as usize;
            let mut code = [0u8; 1];
            input.read_exact(&mut code)?;
            let activation = Activation::from_code(code[0]).ok_or(CheckpointError::Activation(code[0]))?;
            shapes.push((inputs, outputs, activation));
        }
        if count == 0 || shapes.windows(2).any(|w| w[0].1 != w[1].0) {
            return Err(CheckpointError::Shape);
        }
        let mut layers = Vec::with_capacity(count);
        for (inputs, outputs, activation) in shapes {
            let weights = (0..inputs * outputs).map(|_| read_f64(&mut input)).collect::<io::Result<Vec<_>>>()?;
            let bias = (0..outputs).map(|_| read_f64(&mut input)).collect::<io::Result<Vec<_>>>()?;
            layers.push(Dense {
                weights: Array2::from_shape_vec((inputs, outputs), weights).expect("sized above"),
                bias: Array1::from(bias),
                activation,
            });
        }
        Ok(Checkpoint { epsilon, games, network: QNetwork::new(layers) })
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::read(BufReader::new(File::open(path)?))
    }

    /// Rejects a network whose input or output size does not match the game.
    pub fn check_shape(&self, input: usize, output: usize) -> Result<(), CheckpointError> {
        let found = (self.network.input_len(), self.network.output_len());
        if found == (input, output) {
            Ok(())
        } else {
            Err(CheckpointError::Mismatch { found, input, output })
        }
    }
}

fn read_u32<R: Read>(input: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(input: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let checkpoint = Checkpoint { epsilon: 0.2861, games: 250, network: QNetwork::mlp(28, &[16, 8], 200, &mut rng) };
        let mut bytes = Vec::new();
        checkpoint.write(&mut bytes).unwrap();
        let params = 28 * 16 + 16 + 16 * 8 + 8 + 8 * 200 + 200;
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 4 + 3 * 9 + params * 8);
        let back = Checkpoint::read(bytes.as_slice()).unwrap();
        assert_eq!(back, checkpoint);
        assert!(back.check_shape(28, 200).is_ok());
        assert!(matches!(back.check_shape(28, 67), Err(CheckpointError::Mismatch { .. })));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(matches!(Checkpoint::read(&b"NOPE"[..]), Err(CheckpointError::Magic)));
        let mut bytes = MAGIC.to_vec();
        bytes.extend(7u32.to_le_bytes());
        assert!(matches!(Checkpoint::read(bytes.as_slice()), Err(CheckpointError::Version(7))));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut bytes = Vec::new();
        Checkpoint { epsilon: 1.0, games: 0, network: QNetwork::mlp(2, &[2], 2, &mut rng) }.write(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(Checkpoint::read(bytes.as_slice()), Err(CheckpointError::Io(_))));
    }
}
