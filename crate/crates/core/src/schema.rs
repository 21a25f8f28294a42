//! JSON-facing document types and their conversions to the core types.
//! Cell centers are encoded as digit strings `d0,d1,...@valuation` per
//! coordinate, coordinates joined by `;`; zero is `0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{DirichletProblem, ExteriorData};
use crate::error::{Error, Result};
use crate::padic::{Ball, Cell, ComparisonHypothesis, DomainFamily, OpenSetDecomposition, PadicPoint};
use crate::regularity::{make_punctured_disk, make_sphere_union_domain, LambdaSequence};
use crate::schwartz::StepFunction;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub cell_center: String,
    pub cell_radius_exp: i32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionJson {
    pub prime: u32,
    pub dimension: usize,
    pub support_exp: i32,
    pub scale: i32,
    pub terms: Vec<TermJson>,
}

impl StepFunctionJson {
    pub fn from_function(f: &StepFunction) -> Self {
        StepFunctionJson {
            prime: f.prime(),
            dimension: f.dim(),
            support_exp: f.support_exp(),
            scale: f.scale(),
            terms: f
                .terms()
                .map(|(cell, v)| TermJson {
                    cell_center: cell.center.encode(),
                    cell_radius_exp: cell.radius_exp,
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
    }

    pub fn to_function(&self) -> Result<StepFunction> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let center = PadicPoint::decode(self.prime, &t.cell_center)?;
                if center.dim() != self.dimension {
                    return Err(Error::DimensionMismatch(center.dim(), self.dimension));
                }
                Ok((Cell::new(center, t.cell_radius_exp), Complex64::new(t.re, t.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = StepFunction::from_terms(self.prime, self.dimension, &terms)?;
        f.refine_to(self.support_exp.max(f.support_exp()), self.scale.max(f.scale()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallJson {
    pub center: String,
    pub radius_exp: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainJson {
    pub prime: u32,
    pub dimension: usize,
    pub family: String,
    #[serde(default)]
    pub balls: Vec<BallJson>,
    #[serde(default)]
    pub lambda: Vec<u32>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub hypothesis: Option<String>,
}

impl DomainJson {
    pub fn from_domain(omega: &OpenSetDecomposition) -> Self {
        let (family, lambda, depth) = match omega.family() {
            DomainFamily::Explicit => ("explicit".to_string(), vec![], None),
            DomainFamily::PuncturedDisk { depth } => {
                ("punctured-disk".to_string(), vec![], Some(*depth))
            }
            DomainFamily::SphereUnion { lambdas } => {
                ("sphere-union".to_string(), lambdas.clone(), Some(lambdas.len() as u32))
            }
        };
        DomainJson {
            prime: omega.prime(),
            dimension: omega.dim(),
            family,
            balls: omega
                .balls()
                .iter()
                .map(|b| BallJson { center: b.center.encode(), radius_exp: b.radius_exp })
                .collect(),
            lambda,
            depth,
            hypothesis: omega.hypothesis().map(|h| match h {
                ComparisonHypothesis::NonemptyBoundary => "nonempty-boundary".into(),
                ComparisonHypothesis::TranslationInvariant => "translation-invariant".into(),
            }),
        }
    }

    pub fn to_domain(&self) -> Result<OpenSetDecomposition> {
        let mut omega = match self.family.as_str() {
            "explicit" => {
                let balls = self
                    .balls
                    .iter()
                    .map(|b| {
                        Ok(Ball::new(PadicPoint::decode(self.prime, &b.center)?, b.radius_exp))
                    })
                    .collect::<Result<Vec<_>>>()?;
                OpenSetDecomposition::explicit(self.prime, self.dimension, balls)?
            }
            "punctured-disk" => {
                let depth = self.depth.ok_or(Error::Config("punctured-disk needs depth".into()))?;
                make_punctured_disk(self.prime, depth)
            }
            "sphere-union" => {
                if self.lambda.is_empty() {
                    return Err(Error::Config("sphere-union needs lambda".into()));
                }
                let (rm, rp) = ratio_bounds(&self.lambda)?;
                let seq = LambdaSequence::new(self.lambda.clone(), rm, rp)?;
                let depth = self.depth.unwrap_or(self.lambda.len() as u32) as usize;
                make_sphere_union_domain(&seq, self.prime, depth, rm <= 2.0)?
            }
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        if let Some(h) = &self.hypothesis {
            omega = omega.with_hypothesis(match h.as_str() {
                "nonempty-boundary" => ComparisonHypothesis::NonemptyBoundary,
                "translation-invariant" => ComparisonHypothesis::TranslationInvariant,
                other => return Err(Error::Config(format!("unknown hypothesis `{other}`"))),
            });
        }
        Ok(omega)
    }
}

/// Tight quasi-geometric bounds realized by a listed sequence.
pub fn ratio_bounds(lambdas: &[u32]) -> Result<(f64, f64)> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidLambdaSequence("need at least two shells".into()));
    }
    let mut rm = f64::INFINITY;
    let mut rp = 0.0f64;
    for w in lambdas.windows(2) {
        let r = w[1] as f64 / w[0] as f64;
        rm = rm.min(r);
        rp = rp.max(r);
    }
    Ok((rm, rp))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialJson {
    pub amplitude: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExteriorJson {
    Radial { radial: RadialJson },
    Step(StepFunctionJson),
}

impl ExteriorJson {
    pub fn to_exterior(&self) -> Result<ExteriorData> {
        Ok(match self {
            ExteriorJson::Radial { radial } => ExteriorData::Radial {
                amplitude: radial.amplitude,
                exponent: radial.exponent,
            },
            ExteriorJson::Step(sj) => ExteriorData::Step(sj.to_function()?),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    pub domain: DomainJson,
    pub alpha: f64,
    #[serde(default)]
    pub f: Option<StepFunctionJson>,
    #[serde(default)]
    pub g: Option<ExteriorJson>,
    pub scale_m: i32,
    #[serde(rename = "support_M")]
    pub support_m: i32,
}

impl ProblemJson {
    pub fn to_problem(&self) -> Result<DirichletProblem> {
        let omega = self.domain.to_domain()?;
        let f = match &self.f {
            Some(fj) => fj.to_function()?,
            None => StepFunction::zero(omega.prime(), omega.dim()),
        };
        let g = match &self.g {
            Some(gj) => gj.to_exterior()?,
            None => ExteriorData::Zero,
        };
        Ok(DirichletProblem { omega, alpha: self.alpha, f, g })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentJson {
    pub domain_family: String,
    #[serde(default)]
    pub lambda: Vec<u32>,
    pub alpha: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    pub m_list: Vec<i32>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub prime: Option<u32>,
}
