//! JSON file formats for ground sets, kernels, and G-operators.
//!
//! Kernel files carry the space plus real/imaginary entry grids, with a
//! missing imaginary grid defaulting to zero:
//! `{"space": {"n": 2, "part": [1,2]}, "re": [[..],[..]], "im": [[..],[..]]}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jop::{JKernel, JopError};
use crate::kernels::GOperator;
use crate::space::{Part, PartitionedSpace, SpaceError};
use crate::C64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("space declares n = {n} but `{what}` has length {got}")]
    FieldLength {
        what: &'static str,
        n: usize,
        got: usize,
    },
    #[error("matrix `{what}` must be {n}×{m}, got {rows} rows with lengths {cols:?}")]
    MatrixShape {
        what: &'static str,
        n: usize,
        m: usize,
        rows: usize,
        cols: Vec<usize>,
    },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Jop(#[from] JopError),
}

/// Ground-set JSON fragment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub n: usize,
    pub part: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl SpaceJson {
    pub fn to_space(&self) -> Result<PartitionedSpace, IoError> {
        if self.part.len() != self.n {
            return Err(IoError::FieldLength {
                what: "part",
                n: self.n,
                got: self.part.len(),
            });
        }
        let part = self
            .part
            .iter()
            .map(|&l| Part::from_label(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PartitionedSpace::new(
            part,
            self.weights.clone(),
            self.labels.clone(),
        )?)
    }

    pub fn from_space(space: &PartitionedSpace) -> Self {
        Self {
            n: space.n(),
            part: space.parts().iter().map(|p| p.label()).collect(),
            weights: if space.has_unit_weights() {
                None
            } else {
                Some(space.weights().to_vec())
            },
            labels: space.labels().map(|ls| ls.to_vec()),
        }
    }
}

fn grid_to_matrix(
    what: &'static str,
    rows: &[Vec<f64>],
    n: usize,
    m: usize,
) -> Result<DMatrix<f64>, IoError> {
    let shape_err = || IoError::MatrixShape {
        what,
        n,
        m,
        rows: rows.len(),
        cols: rows.iter().map(|r| r.len()).collect(),
    };
    if rows.len() != n || rows.iter().any(|r| r.len() != m) {
        return Err(shape_err());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn matrix_to_grids(m: &DMatrix<C64>) -> (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>) {
    let re: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let any_imag = m.iter().any(|z| z.im != 0.0);
    let im = any_imag.then(|| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
            .collect()
    });
    (re, im)
}

/// Kernel file: space plus entry grids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelJson {
    pub space: SpaceJson,
    pub re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl KernelJson {
    pub fn to_kernel(&self) -> Result<JKernel, IoError> {
        let space = self.space.to_space()?;
        let n = space.n();
        let re = grid_to_matrix("re", &self.re, n, n)?;
        let im = match &self.im {
            Some(rows) => grid_to_matrix("im", rows, n, n)?,
            None => DMatrix::zeros(n, n),
        };
        let entries = DMatrix::from_fn(n, n, |i, j| C64::new(re[(i, j)], im[(i, j)]));
        Ok(JKernel::new(space, entries)?)
    }

    pub fn from_kernel(kernel: &JKernel) -> Self {
        let (re, im) = matrix_to_grids(kernel.entries());
        Self {
            space: SpaceJson::from_space(kernel.space()),
            re,
            im,
        }
    }
}

/// G-operator file: |X₂|×|X₁| matrix, optionally with an explicit space.
/// Without a space, the ground set defaults to the X₁ points followed by
/// the X₂ points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceJson>,
    pub re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl GJson {
    pub fn to_parts(&self) -> Result<(PartitionedSpace, GOperator), IoError> {
        let n2 = self.re.len();
        let n1 = self.re.first().map_or(0, |r| r.len());
        let space = match &self.space {
            Some(sj) => sj.to_space()?,
            None => PartitionedSpace::two_blocks(n1, n2),
        };
        let rows = space.count_of(Part::Two);
        let cols = space.count_of(Part::One);
        let re = grid_to_matrix("re", &self.re, rows, cols)?;
        let im = match &self.im {
            Some(grid) => grid_to_matrix("im", grid, rows, cols)?,
            None => DMatrix::zeros(rows, cols),
        };
        let g = GOperator::new(DMatrix::from_fn(rows, cols, |i, j| {
            C64::new(re[(i, j)], im[(i, j)])
        }));
        Ok((space, g))
    }
}

pub fn parse_kernel(json: &str) -> Result<JKernel, IoError> {
    let file: KernelJson = serde_json::from_str(json)?;
    file.to_kernel()
}

pub fn kernel_to_json(kernel: &JKernel) -> String {
    serde_json::to_string_pretty(&KernelJson::from_kernel(kernel)).expect("kernel serializes")
}

pub fn parse_g(json: &str) -> Result<(PartitionedSpace, GOperator), IoError> {
    let file: GJson = serde_json::from_str(json)?;
    file.to_parts()
}
