//! JSON description of a continuous block kernel for `discretize`.
//!
//! ```json
//! {
//!   "part1": {"a": 0.0, "b": 1.0},
//!   "part2": {"a": 2.0, "b": 3.0},
//!   "blocks": {
//!     "k11": "exp(-(x-y)^2)",
//!     "k12": {"re": "0.1 * x", "im": "y / 2"}
//!   },
//!   "quadrature": "midpoint",
//!   "n": 64
//! }
//! ```
//!
//! Block expressions use the DSL from [`crate::expr`]; omitted blocks are
//! zero. The library takes arbitrary callables; this file format is the
//! CLI-facing subset.

use anyhow::{Context, Result};
use serde::Deserialize;

use jdpp::kernels::{ContinuousKernelSpec, Interval, KernelBlocks, KernelFn, Quadrature};
use jdpp::C64;

use crate::expr::Expr;

#[derive(Debug, Deserialize)]
pub struct SpecFile {
    pub part1: Option<IntervalJson>,
    pub part2: Option<IntervalJson>,
    #[serde(default)]
    pub blocks: BlocksJson,
    pub quadrature: QuadratureJson,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub struct IntervalJson {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Default, Deserialize)]
pub struct BlocksJson {
    pub k11: Option<ExprJson>,
    pub k12: Option<ExprJson>,
    pub k21: Option<ExprJson>,
    pub k22: Option<ExprJson>,
}

/// Either a plain real expression or a {re, im} pair of expressions.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ExprJson {
    Real(String),
    Complex {
        re: Option<String>,
        im: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureJson {
    Midpoint,
    Gauss,
}

fn compile(block: &'static str, expr: Option<&ExprJson>) -> Result<KernelFn> {
    let parse =
        |src: &str| Expr::parse(src).with_context(|| format!("in block `{block}`: `{src}`"));
    Ok(match expr {
        None => Box::new(|_, _| C64::new(0.0, 0.0)),
        Some(ExprJson::Real(src)) => {
            let e = parse(src)?;
            Box::new(move |x, y| C64::new(e.eval(x, y), 0.0))
        }
        Some(ExprJson::Complex { re, im }) => {
            let re = re.as_deref().map(parse).transpose()?;
            let im = im.as_deref().map(parse).transpose()?;
            Box::new(move |x, y| {
                C64::new(
                    re.as_ref().map_or(0.0, |e| e.eval(x, y)),
                    im.as_ref().map_or(0.0, |e| e.eval(x, y)),
                )
            })
        }
    })
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<ContinuousKernelSpec> {
        Ok(ContinuousKernelSpec {
            part1: self.part1.map(|i| Interval { a: i.a, b: i.b }),
            part2: self.part2.map(|i| Interval { a: i.a, b: i.b }),
            blocks: KernelBlocks {
                k11: compile("k11", self.blocks.k11.as_ref())?,
                k12: compile("k12", self.blocks.k12.as_ref())?,
                k21: compile("k21", self.blocks.k21.as_ref())?,
                k22: compile("k22", self.blocks.k22.as_ref())?,
            },
            quadrature: match self.quadrature {
                QuadratureJson::Midpoint => Quadrature::Midpoint,
                QuadratureJson::Gauss => Quadrature::GaussLegendre,
            },
            points_per_part: self.n,
        })
    }
}
