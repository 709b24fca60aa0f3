//! `YTN1` tensor files: magic, little-endian `u32` rank, `u32` dims
//! `(grid_h, grid_w, anchors, channels_per_anchor)`, then row-major `f32` data.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{HeadTensor, COORDS};
use crate::error::{Error, Result};

pub const TENSOR_MAGIC: &[u8; 4] = b"YTN1";

fn read_u32<R: Read>(reader: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader
        .read_exact(&mut buf)
        .map_err(|e| Error::Tensor(format!("truncated while reading {what}: {e}")))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_tensor<R: Read>(mut reader: R) -> Result<HeadTensor<f32>> {
    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|_| Error::Tensor("file too short for magic".into()))?;
    if &magic != TENSOR_MAGIC {
        return Err(Error::Tensor(format!("bad magic {magic:?}")));
    }
    let ndim = read_u32(&mut reader, "rank")?;
    if ndim != 4 {
        return Err(Error::Tensor(format!("expected rank 4, got {ndim}")));
    }
    let mut dims = [0usize; 4];
    for (i, dim) in dims.iter_mut().enumerate() {
        *dim = read_u32(&mut reader, &format!("dim {i}"))? as usize;
    }
    let [grid_h, grid_w, anchors, channels] = dims;
    if channels <= COORDS + 1 {
        return Err(Error::Tensor(format!(
            "{channels} channels per anchor leaves no class scores"
        )));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Tensor("tensor size overflows".into()))?;

    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != count * 4 {
        return Err(Error::Tensor(format!(
            "expected {} data bytes, found {}",
            count * 4,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    HeadTensor::new(grid_w, grid_h, anchors, channels - COORDS - 1, data)
}

pub fn write_tensor<W: Write>(mut writer: W, tensor: &HeadTensor<f32>) -> Result<()> {
    writer.write_all(TENSOR_MAGIC)?;
    writer.write_all(&4u32.to_le_bytes())?;
    for dim in [
        tensor.grid_h(),
        tensor.grid_w(),
        tensor.num_anchors(),
        tensor.channels_per_anchor(),
    ] {
        let dim = u32::try_from(dim).map_err(|_| Error::Tensor("dim exceeds u32".into()))?;
        writer.write_all(&dim.to_le_bytes())?;
    }
    for v in tensor.data() {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_tensor_file(path: impl AsRef<Path>) -> Result<HeadTensor<f32>> {
    read_tensor(BufReader::new(File::open(path)?))
}

pub fn write_tensor_file(path: impl AsRef<Path>, tensor: &HeadTensor<f32>) -> Result<()> {
    write_tensor(BufWriter::new(File::create(path)?), tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_exact() {
        let t = HeadTensor::new(1, 1, 1, 1, vec![0.0, 1.0, -2.5, 0.0, 0.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        let mut expected = b"YTN1".to_vec();
        for d in [4u32, 1, 1, 1, 6] {
            expected.extend_from_slice(&d.to_le_bytes());
        }
        for v in [0.0f32, 1.0, -2.5, 0.0, 0.0, 3.0] {
            expected.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(buf, expected);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let t = HeadTensor::<f32>::zeros(2, 1, 1, 1).unwrap();
        let mut good = Vec::new();
        write_tensor(&mut good, &t).unwrap();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(read_tensor(&bad_magic[..]).is_err());

        assert!(read_tensor(&good[..good.len() - 1]).is_err());

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(read_tensor(&trailing[..]).is_err());

        let mut rank3 = good.clone();
        rank3[4] = 3;
        assert!(read_tensor(&rank3[..]).is_err());

        let mut no_classes = good;
        no_classes[20] = 5;
        assert!(read_tensor(&no_classes[..]).is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            gw in 1usize..4, gh in 1usize..4, a in 1usize..3, c in 1usize..3, seed in any::<u64>()
        ) {
            let len = gw * gh * a * (5 + c);
            let data: Vec<f32> = (0..len)
                .map(|i| ((seed.wrapping_mul(i as u64 + 1) % 2000) as f32 - 1000.0) / 37.0)
                .collect();
            let t = HeadTensor::new(gw, gh, a, c, data).unwrap();
            let mut buf = Vec::new();
            write_tensor(&mut buf, &t).unwrap();
            prop_assert_eq!(read_tensor(&buf[..]).unwrap(), t);
        }
    }
}
