//! Little-endian binary tensor files.
//!
//! An `LRTF` payload is the magic `LRTF`, a `u32` version (1), a `u32` order
//! d, d `u64` mode sizes and then the entries as `f64` in canonical layout.
//! The low-rank formats reuse the same primitives with their own magics.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::tensor::{checked_len, DenseTensor};

pub const VERSION: u32 = 1;
pub const MAGIC_DENSE: &[u8; 4] = b"LRTF";

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn magic(&mut self, m: &[u8; 4]) -> &mut Self {
        self.buf.extend_from_slice(m);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64s(&mut self, vs: &[f64]) -> &mut Self {
        for v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
        self
    }

    pub fn tensor(&mut self, t: &DenseTensor) -> &mut Self {
        self.magic(MAGIC_DENSE).u32(VERSION).u32(t.order() as u32);
        for &n in t.shape() {
            self.u64(n as u64);
        }
        self.f64s(t.data())
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated input at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn expect_magic(&mut self, m: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != m {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(m)
            )));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        Ok(())
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size does not fit in usize".into()))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    pub fn tensor(&mut self) -> Result<DenseTensor> {
        self.expect_magic(MAGIC_DENSE)?;
        let d = self.u32()? as usize;
        let shape = (0..d).map(|_| self.usize()).collect::<Result<Vec<_>>>()?;
        let len = checked_len(&shape).map_err(|_| Error::Format("shape overflow".into()))?;
        let data = self.f64s(len)?;
        DenseTensor::new(shape, data).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn matrix(&mut self) -> Result<Matrix> {
        self.tensor()?.to_matrix().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn encode(t: &DenseTensor) -> Vec<u8> {
    Writer::new().tensor(t).finish()
}

pub fn decode(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = Reader::new(bytes);
    let t = r.tensor()?;
    r.finish()?;
    Ok(t)
}

pub fn encode_matrix(m: &Matrix) -> Vec<u8> {
    let t = DenseTensor::new(vec![m.rows(), m.cols()], m.as_slice().to_vec()).expect("matrix entries are finite");
    encode(&t)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Matrix> {
    decode(bytes)?.to_matrix().map_err(|e| Error::Format(e.to_string()))
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, encode(t))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode(&fs::read(path)?)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    decode_matrix(&fs::read(path)?)
}
