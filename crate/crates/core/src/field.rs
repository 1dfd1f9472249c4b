//! Node-wise field containers and their on-disk formats.
//!
//! # Binary layout
//!
//! All integers and floats little-endian.
//!
//! | offset | size | content                                        |
//! |--------|------|------------------------------------------------|
//! | 0      | 4    | magic `b"IMCF"`                                |
//! | 4      | 4    | `u32` dimension                                |
//! | 8      | 4    | `u32` nodes per axis                           |
//! | 12     | 8    | `f64` period                                   |
//! | 20     | 4    | `u32` kind: 0 scalar, 1 covariant, 2 contravariant |
//! | 24     | 4    | `u32` components per node (1 or dimension²)    |
//! | 28     | ...  | body: node-major doubles, components row-major |
//!
//! Nodes follow [`GridChart::index`] order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridChart, DIM};

pub type Sym2 = [[f64; DIM]; DIM];
pub type Rank3 = [[[f64; DIM]; DIM]; DIM];
pub type Rank4 = [[[[f64; DIM]; DIM]; DIM]; DIM];

const MAGIC: &[u8; 4] = b"IMCF";
const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    Covariant,
    Contravariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self, grid: &GridChart) -> Result<()> {
        check_len(grid, self.values.len())?;
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFinite { node }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTensorField {
    pub values: Vec<Sym2>,
    pub variance: Variance,
}

impl SymTensorField {
    /// Builds a covariant field, symmetrizing each node value.
    pub fn covariant(values: Vec<Sym2>) -> Self {
        let mut f = Self {
            values,
            variance: Variance::Covariant,
        };
        f.symmetrize();
        f
    }

    pub fn from_fn(len: usize, variance: Variance, f: impl Fn(usize) -> Sym2) -> Self {
        let mut field = Self {
            values: (0..len).map(f).collect(),
            variance,
        };
        field.symmetrize();
        field
    }

    pub fn identity(len: usize) -> Self {
        Self::covariant(vec![identity2(); len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::covariant(vec![[[0.0; DIM]; DIM]; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Replaces each value by `(v + vᵀ) / 2`, leaving exactly equal off-diagonal entries.
    pub fn symmetrize(&mut self) {
        for v in &mut self.values {
            *v = symmetrized(v);
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.values.iter().all(|v| v[0][1] == v[1][0])
    }

    pub fn component(&self, i: usize, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i][j]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().flatten())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn validate(&self, grid: &GridChart) -> Result<()> {
        check_len(grid, self.values.len())?;
        for (node, v) in self.values.iter().enumerate() {
            if v.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { node });
            }
        }
        Ok(())
    }
}

/// `∇_i h_{jk}` (or any rank-3 field symmetric in its last two slots).
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderField {
    pub values: Vec<Rank3>,
}

impl ThirdOrderField {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().flatten().flatten())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Fully covariant `R_{ijkl}`, positive sectional curvature on spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub values: Vec<Rank4>,
    /// Largest violation of the algebraic symmetries before symmetrization.
    pub raw_asymmetry: f64,
}

pub fn identity2() -> Sym2 {
    let mut m = [[0.0; DIM]; DIM];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

#[inline]
pub fn symmetrized(v: &Sym2) -> Sym2 {
    let mut out = *v;
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let s = 0.5 * (v[i][j] + v[j][i]);
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

fn check_len(grid: &GridChart, found: usize) -> Result<()> {
    if found != grid.len() {
        return Err(Error::FieldSize {
            expected: grid.len(),
            found,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Scalar = 0,
    Covariant = 1,
    Contravariant = 2,
}

fn write_header<W: Write>(w: &mut W, grid: &GridChart, kind: Kind, comps: u32) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dimension() as u32).to_le_bytes())?;
    w.write_all(&(grid.nodes_per_axis() as u32).to_le_bytes())?;
    w.write_all(&grid.period().to_le_bytes())?;
    w.write_all(&(kind as u32).to_le_bytes())?;
    w.write_all(&comps.to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<(GridChart, Kind, usize)> {
    let mut buf = [0u8; HEADER_LEN];
    r.read_exact(&mut buf)?;
    if &buf[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap()) as usize;
    let dimension = u32_at(4);
    let nodes = u32_at(8);
    let period = f64::from_le_bytes(buf[12..20].try_into().unwrap());
    let kind = match u32_at(20) {
        0 => Kind::Scalar,
        1 => Kind::Covariant,
        2 => Kind::Contravariant,
        k => return Err(Error::Format(format!("unknown field kind {k}"))),
    };
    let comps = u32_at(24);
    let grid = GridChart::new(dimension, nodes, period)?;
    Ok((grid, kind, comps))
}

fn read_body<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl ScalarField {
    pub fn write_binary<W: Write>(&self, grid: &GridChart, w: &mut W) -> Result<()> {
        check_len(grid, self.len())?;
        write_header(w, grid, Kind::Scalar, 1)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<(GridChart, Self)> {
        let (grid, kind, comps) = read_header(r)?;
        if kind != Kind::Scalar || comps != 1 {
            return Err(Error::Format("expected a scalar field".into()));
        }
        let values = read_body(r, grid.len())?;
        Ok((grid, Self { values }))
    }
}

impl SymTensorField {
    pub fn write_binary<W: Write>(&self, grid: &GridChart, w: &mut W) -> Result<()> {
        check_len(grid, self.len())?;
        let kind = match self.variance {
            Variance::Covariant => Kind::Covariant,
            Variance::Contravariant => Kind::Contravariant,
        };
        write_header(w, grid, kind, (DIM * DIM) as u32)?;
        for v in &self.values {
            for x in v.iter().flatten() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<(GridChart, Self)> {
        let (grid, kind, comps) = read_header(r)?;
        let variance = match kind {
            Kind::Covariant => Variance::Covariant,
            Kind::Contravariant => Variance::Contravariant,
            Kind::Scalar => return Err(Error::Format("expected a tensor field".into())),
        };
        if comps != DIM * DIM {
            return Err(Error::Format(format!("{comps} components per node")));
        }
        let flat = read_body(r, grid.len() * comps)?;
        let values: Vec<Sym2> = flat
            .chunks_exact(comps)
            .map(|c| {
                let mut m = [[0.0; DIM]; DIM];
                for i in 0..DIM {
                    m[i].copy_from_slice(&c[i * DIM..(i + 1) * DIM]);
                }
                m
            })
            .collect();
        let field = Self { values, variance };
        if !field.is_symmetric() {
            return Err(Error::Format("tensor field is not symmetric".into()));
        }
        Ok((grid, field))
    }
}

/// JSON envelope for small grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDocument<F> {
    pub grid: GridChart,
    pub field: F,
}
