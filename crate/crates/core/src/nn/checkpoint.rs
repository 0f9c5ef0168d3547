//! Binary network checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    8 bytes  "GANQNET1"
//! n_sizes  u64      number of layer sizes (layers + 1)
//! sizes    u64 × n_sizes
//! params   f64 × n_params, in ParamVector order
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::net::{DenseNet, ParamVector};

const MAGIC: &[u8; 8] = b"GANQNET1";

pub fn write_checkpoint<W: Write>(net: &DenseNet, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    let sizes = net.sizes();
    out.write_all(&(sizes.len() as u64).to_le_bytes())?;
    for s in sizes {
        out.write_all(&(s as u64).to_le_bytes())?;
    }
    for p in net.params().0 {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<DenseNet> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidArgument("not a network checkpoint".into()));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |input: &mut R| -> Result<u64> {
        input.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let n = next_u64(&mut input)? as usize;
    if !(2..=64).contains(&n) {
        return Err(Error::InvalidArgument(format!("implausible layer count {n}")));
    }
    let sizes = (0..n).map(|_| next_u64(&mut input).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    if sizes.iter().any(|&s| s == 0 || s > 1 << 20) {
        return Err(Error::InvalidArgument("implausible layer size".into()));
    }
    let mut net = DenseNet::zeros(&sizes);
    let params = (0..net.n_params())
        .map(|_| next_u64(&mut input).map(f64::from_bits))
        .collect::<Result<Vec<_>>>()?;
    net.set_params(&ParamVector(params))?;
    Ok(net)
}

pub fn save_checkpoint(net: &DenseNet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<DenseNet> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = stream_rng(9, 0);
        let net = DenseNet::preset(4, 16, 3, &mut rng);
        let mut buf = Vec::new();
        write_checkpoint(&net, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 4 * 8 + net.n_params() * 8);
        assert_eq!(read_checkpoint(&buf[..]).unwrap(), net);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_checkpoint(&b"NOTANET!\x02\0\0\0\0\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_checkpoint(&DenseNet::zeros(&[2, 2]), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_checkpoint(&buf[..]).is_err());
    }
}
