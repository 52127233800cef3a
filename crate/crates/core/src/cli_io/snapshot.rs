//! Binary snapshot format.
//!
//! ```text
//! magic    4 bytes  "VKF1"
//! version  u32      1
//! d        u32      spatial dimension
//! kind     u8       see FieldKind
//! dims     u64 per axis (2 axes for grids: rows, cols; 1 axis for particles)
//! time     f64
//! payload  f64 x product(dims) x components, component-major (planar)
//! ```
//!
//! All integers and floats are little-endian. Grid arrays are row-major with
//! rows along `y`. The MAC velocity is stored on an `(ny+1) x (nx+1)` grid per
//! component; the unused row of `u` and column of `v` are zero.

use std::io::{Read, Write};

use thiserror::Error;

use crate::fluid::VelocityField;
use crate::kinetic::ParticleEnsemble;
use crate::mesh::{CellVectorField, Mesh, ScalarField, Sym2, TensorField};

pub const MAGIC: [u8; 4] = *b"VKF1";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("unknown field kind {0}")]
    Kind(u8),
    #[error("payload holds {got} values, header implies {expected}")]
    Length { got: usize, expected: usize },
    #[error("trailing bytes after payload")]
    Trailing,
    #[error("snapshot holds {got:?}, expected {expected:?}")]
    WrongKind { got: FieldKind, expected: FieldKind },
    #[error("snapshot shape does not fit the requested mesh")]
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Scalar = 0,
    CellVector = 1,
    SymTensor = 2,
    MacVelocity = 3,
    Particles = 4,
}

impl FieldKind {
    pub fn from_u8(v: u8) -> Result<Self, SnapshotError> {
        Ok(match v {
            0 => Self::Scalar,
            1 => Self::CellVector,
            2 => Self::SymTensor,
            3 => Self::MacVelocity,
            4 => Self::Particles,
            other => return Err(SnapshotError::Kind(other)),
        })
    }

    pub fn components(self) -> usize {
        match self {
            Self::Scalar => 1,
            Self::CellVector | Self::MacVelocity => 2,
            Self::SymTensor => 3,
            // X, Y, Vx, Vy, w, fval
            Self::Particles => 6,
        }
    }

    pub fn axes(self) -> usize {
        if self == Self::Particles {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub d: u32,
    pub kind: FieldKind,
    pub dims: Vec<u64>,
    pub time: f64,
    pub data: Vec<f64>,
}

impl PartialEq for Snapshot {
    /// Bitwise comparison of every float.
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.kind == other.kind
            && self.dims == other.dims
            && self.time.to_bits() == other.time.to_bits()
            && self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N], SnapshotError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

impl Snapshot {
    pub fn expected_len(&self) -> usize {
        self.dims.iter().product::<u64>() as usize * self.kind.components()
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<(), SnapshotError> {
        let expected = self.expected_len();
        if self.dims.len() != self.kind.axes() || self.data.len() != expected {
            return Err(SnapshotError::Length { got: self.data.len(), expected });
        }
        let mut buf = Vec::with_capacity(32 + 8 * self.data.len());
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.d.to_le_bytes());
        buf.push(self.kind as u8);
        for d in &self.dims {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        buf.extend_from_slice(&self.time.to_le_bytes());
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads one snapshot; returns `Ok(None)` at a clean end of input.
    pub fn read_next<R: Read>(r: &mut R) -> Result<Option<Self>, SnapshotError> {
        let mut magic = [0u8; 4];
        let mut got = 0;
        while got < 4 {
            let n = r.read(&mut magic[got..])?;
            if n == 0 {
                if got == 0 {
                    return Ok(None);
                }
                return Err(std::io::Error::from(std::io::ErrorKind::UnexpectedEof).into());
            }
            got += n;
        }
        if magic != MAGIC {
            return Err(SnapshotError::BadMagic(magic));
        }
        let version = u32::from_le_bytes(read_array(r)?);
        if version != VERSION {
            return Err(SnapshotError::Version(version));
        }
        let d = u32::from_le_bytes(read_array(r)?);
        let kind = FieldKind::from_u8(read_array::<1>(r)?[0])?;
        let dims = (0..kind.axes()).map(|_| read_array(r).map(u64::from_le_bytes)).collect::<Result<Vec<_>, _>>()?;
        let time = f64::from_le_bytes(read_array(r)?);
        let mut snap = Self { d, kind, dims, time, data: Vec::new() };
        let n = snap.expected_len();
        let mut bytes = vec![0u8; 8 * n];
        let mut filled = 0;
        while filled < bytes.len() {
            let k = r.read(&mut bytes[filled..])?;
            if k == 0 {
                return Err(SnapshotError::Length { got: filled / 8, expected: n });
            }
            filled += k;
        }
        snap.data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Some(snap))
    }

    /// Reads exactly one snapshot and rejects trailing bytes.
    pub fn read<R: Read>(r: &mut R) -> Result<Self, SnapshotError> {
        let snap = Self::read_next(r)?.ok_or_else(|| std::io::Error::from(std::io::ErrorKind::UnexpectedEof))?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(SnapshotError::Trailing);
        }
        Ok(snap)
    }

    /// Reads a concatenation of snapshots until end of input.
    pub fn read_all<R: Read>(r: &mut R) -> Result<Vec<Self>, SnapshotError> {
        let mut out = Vec::new();
        while let Some(s) = Self::read_next(r)? {
            out.push(s);
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, SnapshotError> {
        let mut v = Vec::new();
        self.write(&mut v)?;
        Ok(v)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        Self::read(&mut &bytes[..])
    }

    fn grid(mesh: &Mesh, kind: FieldKind, time: f64, data: Vec<f64>) -> Self {
        Self { d: 2, kind, dims: vec![mesh.ny as u64, mesh.nx as u64], time, data }
    }

    pub fn scalar(f: &ScalarField, time: f64) -> Self {
        Self::grid(&f.mesh, FieldKind::Scalar, time, f.data.clone())
    }

    pub fn cell_vector(f: &CellVectorField, time: f64) -> Self {
        Self::grid(&f.mesh, FieldKind::CellVector, time, [f.x.as_slice(), &f.y].concat())
    }

    pub fn tensor(f: &TensorField, time: f64) -> Self {
        let mut data: Vec<f64> = f.data.iter().map(|a| a.xx).collect();
        data.extend(f.data.iter().map(|a| a.xy));
        data.extend(f.data.iter().map(|a| a.yy));
        Self::grid(&f.mesh, FieldKind::SymTensor, time, data)
    }

    pub fn velocity(f: &VelocityField, time: f64) -> Self {
        let m = f.mesh;
        let (rows, cols) = (m.ny + 1, m.nx + 1);
        let mut data = vec![0.0; 2 * rows * cols];
        for j in 0..m.ny {
            for i in 0..=m.nx {
                data[j * cols + i] = f.u[f.iu(i, j)];
            }
        }
        for j in 0..=m.ny {
            for i in 0..m.nx {
                data[rows * cols + j * cols + i] = f.v[f.iv(i, j)];
            }
        }
        Self { d: 2, kind: FieldKind::MacVelocity, dims: vec![rows as u64, cols as u64], time, data }
    }

    pub fn particles(p: &ParticleEnsemble, time: f64) -> Self {
        let mut data = Vec::with_capacity(6 * p.len());
        data.extend(p.x.iter().map(|x| x[0]));
        data.extend(p.x.iter().map(|x| x[1]));
        data.extend(p.v.iter().map(|v| v[0]));
        data.extend(p.v.iter().map(|v| v[1]));
        data.extend(&p.w);
        data.extend(&p.fval);
        Self { d: 2, kind: FieldKind::Particles, dims: vec![p.len() as u64], time, data }
    }

    fn expect(&self, kind: FieldKind) -> Result<(), SnapshotError> {
        if self.kind != kind {
            return Err(SnapshotError::WrongKind { got: self.kind, expected: kind });
        }
        Ok(())
    }

    /// Cell mesh of a grid snapshot with the given physical extents.
    pub fn mesh(&self, extents: [f64; 2]) -> Result<Mesh, SnapshotError> {
        if self.kind.axes() != 2 {
            return Err(SnapshotError::Shape);
        }
        let (mut ny, mut nx) = (self.dims[0] as usize, self.dims[1] as usize);
        if self.kind == FieldKind::MacVelocity {
            ny = ny.checked_sub(1).ok_or(SnapshotError::Shape)?;
            nx = nx.checked_sub(1).ok_or(SnapshotError::Shape)?;
        }
        Mesh::with_extents(nx, ny, extents[0], extents[1]).map_err(|_| SnapshotError::Shape)
    }

    pub fn to_scalar(&self, extents: [f64; 2]) -> Result<ScalarField, SnapshotError> {
        self.expect(FieldKind::Scalar)?;
        Ok(ScalarField { mesh: self.mesh(extents)?, data: self.data.clone() })
    }

    pub fn to_cell_vector(&self, extents: [f64; 2]) -> Result<CellVectorField, SnapshotError> {
        self.expect(FieldKind::CellVector)?;
        let n = self.data.len() / 2;
        Ok(CellVectorField { mesh: self.mesh(extents)?, x: self.data[..n].to_vec(), y: self.data[n..].to_vec() })
    }

    pub fn to_tensor(&self, extents: [f64; 2]) -> Result<TensorField, SnapshotError> {
        self.expect(FieldKind::SymTensor)?;
        let n = self.data.len() / 3;
        let data = (0..n).map(|k| Sym2::new(self.data[k], self.data[n + k], self.data[2 * n + k])).collect();
        Ok(TensorField { mesh: self.mesh(extents)?, data })
    }

    pub fn to_velocity(&self, extents: [f64; 2]) -> Result<VelocityField, SnapshotError> {
        self.expect(FieldKind::MacVelocity)?;
        let m = self.mesh(extents)?;
        let (rows, cols) = (m.ny + 1, m.nx + 1);
        let mut f = VelocityField::zeros(m);
        for j in 0..m.ny {
            for i in 0..=m.nx {
                let k = f.iu(i, j);
                f.u[k] = self.data[j * cols + i];
            }
        }
        for j in 0..=m.ny {
            for i in 0..m.nx {
                let k = f.iv(i, j);
                f.v[k] = self.data[rows * cols + j * cols + i];
            }
        }
        Ok(f)
    }

    pub fn to_particles(&self) -> Result<ParticleEnsemble, SnapshotError> {
        self.expect(FieldKind::Particles)?;
        let n = self.dims[0] as usize;
        let c = |k: usize| &self.data[k * n..(k + 1) * n];
        Ok(ParticleEnsemble {
            x: c(0).iter().zip(c(1)).map(|(&a, &b)| [a, b]).collect(),
            v: c(2).iter().zip(c(3)).map(|(&a, &b)| [a, b]).collect(),
            w: c(4).to_vec(),
            fval: c(5).to_vec(),
        })
    }
}
