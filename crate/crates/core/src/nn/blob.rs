//! Binary parameter container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "CLNM" | version u32 | section tag u32 | layer count u32
//! per layer:  activation u8 | tensor count u32
//! per tensor: rank u32 | dims u64 × rank | f64 × product(dims)
//! ```

use super::NnError;

pub const BLOB_MAGIC: [u8; 4] = *b"CLNM";
pub const BLOB_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionTag {
    Mlp,
    Gfn,
    Lstm,
}

impl SectionTag {
    fn code(self) -> u32 {
        match self {
            SectionTag::Mlp => 1,
            SectionTag::Gfn => 2,
            SectionTag::Lstm => 3,
        }
    }

    fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(SectionTag::Mlp),
            2 => Some(SectionTag::Gfn),
            3 => Some(SectionTag::Lstm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorBlob {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl TensorBlob {
    pub fn vector(data: &[f64]) -> Self {
        Self {
            dims: vec![data.len()],
            data: data.to_vec(),
        }
    }

    pub fn matrix(m: &crate::linalg::Matrix) -> Self {
        Self {
            dims: vec![m.rows(), m.cols()],
            data: m.as_slice().to_vec(),
        }
    }

    pub fn into_matrix(self) -> Result<crate::linalg::Matrix, NnError> {
        match self.dims[..] {
            [r, c] => Ok(crate::linalg::Matrix::from_vec(r, c, self.data)),
            _ => Err(NnError::Format(format!(
                "expected rank-2 tensor, got {:?}",
                self.dims
            ))),
        }
    }

    pub fn into_vector(self) -> Result<Vec<f64>, NnError> {
        match self.dims[..] {
            [_] => Ok(self.data),
            _ => Err(NnError::Format(format!(
                "expected rank-1 tensor, got {:?}",
                self.dims
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerBlob {
    /// Activation code, 0 when the layer has none.
    pub activation: u8,
    pub tensors: Vec<TensorBlob>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBlob {
    pub tag: SectionTag,
    pub layers: Vec<LayerBlob>,
}

impl ModelBlob {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&BLOB_MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        out.extend_from_slice(&self.tag.code().to_le_bytes());
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for layer in &self.layers {
            out.push(layer.activation);
            out.extend_from_slice(&(layer.tensors.len() as u32).to_le_bytes());
            for t in &layer.tensors {
                out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
                for &d in &t.dims {
                    out.extend_from_slice(&(d as u64).to_le_bytes());
                }
                for &v in &t.data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, NnError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != BLOB_MAGIC {
            return Err(NnError::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != BLOB_VERSION {
            return Err(NnError::Format(format!(
                "version {version}, expected {BLOB_VERSION}"
            )));
        }
        let tag_code = r.u32()?;
        let tag = SectionTag::from_code(tag_code)
            .ok_or_else(|| NnError::Format(format!("unknown section tag {tag_code}")))?;
        let n_layers = r.u32()? as usize;
        let mut layers = Vec::with_capacity(n_layers.min(1024));
        for _ in 0..n_layers {
            let activation = r.take(1)?[0];
            let n_tensors = r.u32()? as usize;
            let mut tensors = Vec::with_capacity(n_tensors.min(64));
            for _ in 0..n_tensors {
                let rank = r.u32()? as usize;
                let mut dims = Vec::with_capacity(rank.min(8));
                let mut count: usize = 1;
                for _ in 0..rank {
                    let d = r.u64()? as usize;
                    count = count
                        .checked_mul(d)
                        .ok_or_else(|| NnError::Format("tensor size overflow".into()))?;
                    dims.push(d);
                }
                if count.saturating_mul(8) > r.remaining() {
                    return Err(NnError::Format("truncated tensor data".into()));
                }
                let data = (0..count).map(|_| r.f64()).collect::<Result<_, _>>()?;
                tensors.push(TensorBlob { dims, data });
            }
            layers.push(LayerBlob {
                activation,
                tensors,
            });
        }
        if r.remaining() != 0 {
            return Err(NnError::Format(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self { tag, layers })
    }

    pub fn expect_tag(&self, tag: SectionTag) -> Result<(), NnError> {
        if self.tag != tag {
            return Err(NnError::Format(format!(
                "section tag {:?}, expected {:?}",
                self.tag, tag
            )));
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        if self.remaining() < n {
            return Err(NnError::Format("unexpected end of blob".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, NnError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

// Mlp <-> blob

use super::{Activation, DenseLayer, Mlp};

impl DenseLayer {
    pub fn to_blob(&self) -> LayerBlob {
        LayerBlob {
            activation: self.activation.code(),
            tensors: vec![
                TensorBlob::matrix(&self.weights),
                TensorBlob::vector(&self.bias),
            ],
        }
    }

    pub fn from_blob(layer: LayerBlob) -> Result<Self, NnError> {
        let activation = Activation::from_code(layer.activation)
            .ok_or_else(|| NnError::Format(format!("unknown activation {}", layer.activation)))?;
        let [w, b]: [TensorBlob; 2] = layer
            .tensors
            .try_into()
            .map_err(|_| NnError::Format("dense layer needs 2 tensors".into()))?;
        DenseLayer::new(w.into_matrix()?, b.into_vector()?, activation)
            .map_err(|e| NnError::Format(e.to_string()))
    }
}

impl Mlp {
    pub fn save(&self) -> Vec<u8> {
        ModelBlob {
            tag: SectionTag::Mlp,
            layers: self.layers.iter().map(DenseLayer::to_blob).collect(),
        }
        .encode()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, NnError> {
        let blob = ModelBlob::decode(bytes)?;
        blob.expect_tag(SectionTag::Mlp)?;
        let layers = blob
            .layers
            .into_iter()
            .map(DenseLayer::from_blob)
            .collect::<Result<Vec<_>, _>>()?;
        Mlp::new(layers).map_err(|e| NnError::Format(e.to_string()))
    }
}
