//! JSON descriptors for spaces, functions and matrices.
//!
//! Complex scalars are written `[re, im]`; a bare number is read as a real
//! scalar. Matrices are lists of rows.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gcb::{GcbElement, GcbTerm};
use crate::holofun::{CertifiedFunctional, HoloFunction};
use crate::matcore::ComplexMatrix;
use crate::mconvex::MatrixSet;
use crate::opspace::{
    space_column, space_matrix, space_min_linf, space_row, space_scalar, ConcreteOperatorSpace, OpSpaceMatrix, SpaceKind,
    SpaceRef,
};

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ScalarDesc {
    Real(f64),
    Pair([f64; 2]),
}

impl ScalarDesc {
    pub fn value(self) -> Complex<f64> {
        match self {
            ScalarDesc::Real(x) => Complex::new(x, 0.0),
            ScalarDesc::Pair([re, im]) => Complex::new(re, im),
        }
    }

    pub fn from_complex(z: Complex<f64>) -> Self {
        ScalarDesc::Pair([z.re, z.im])
    }
}

fn one() -> ScalarDesc {
    ScalarDesc::Real(1.0)
}

pub type MatrixDesc = Vec<Vec<ScalarDesc>>;

pub fn matrix_from_desc(rows: &MatrixDesc) -> Result<ComplexMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return invalid("matrices must be nonempty");
    }
    if rows.iter().any(|row| row.len() != c) {
        return invalid("matrix rows have different lengths");
    }
    ComplexMatrix::new(r, c, rows.iter().flatten().map(|s| s.value()).collect())
}

pub fn matrix_to_desc(m: &ComplexMatrix<f64>) -> MatrixDesc {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| ScalarDesc::from_complex(m[(i, j)])).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDesc {
    Scalar {},
    Matrix { k: usize },
    Row { n: usize },
    Column { n: usize },
    MinLinf { d: usize },
    Custom { ambient: usize, basis: Vec<MatrixDesc> },
}

impl SpaceDesc {
    pub fn build(&self) -> Result<SpaceRef<f64>> {
        let positive = |n: usize| if n == 0 { invalid("space sizes must be positive") } else { Ok(n) };
        Ok(match self {
            SpaceDesc::Scalar {} => space_scalar(),
            SpaceDesc::Matrix { k } => space_matrix(positive(*k)?),
            SpaceDesc::Row { n } => space_row(positive(*n)?),
            SpaceDesc::Column { n } => space_column(positive(*n)?),
            SpaceDesc::MinLinf { d } => space_min_linf(positive(*d)?),
            SpaceDesc::Custom { ambient, basis } => {
                let basis = basis.iter().map(matrix_from_desc).collect::<Result<Vec<_>>>()?;
                ConcreteOperatorSpace::custom(*ambient, basis)?
            }
        })
    }

    /// Descriptor of a built space.
    pub fn of(space: &ConcreteOperatorSpace<f64>) -> Self {
        match space.kind() {
            SpaceKind::Scalar => SpaceDesc::Scalar {},
            SpaceKind::Matrix(k) => SpaceDesc::Matrix { k },
            SpaceKind::Row(n) => SpaceDesc::Row { n },
            SpaceKind::Column(n) => SpaceDesc::Column { n },
            SpaceKind::MinLinf(d) => SpaceDesc::MinLinf { d },
            SpaceKind::Custom => {
                SpaceDesc::Custom { ambient: space.ambient(), basis: space.basis().iter().map(matrix_to_desc).collect() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDesc {
    pub space: SpaceDesc,
    pub phi: Vec<ScalarDesc>,
    pub certified_norm: f64,
}

impl FunctionalDesc {
    pub fn build(&self) -> Result<CertifiedFunctional<f64>> {
        CertifiedFunctional::new(self.space.build()?, self.phi.iter().map(|s| s.value()).collect(), self.certified_norm)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionDesc {
    Identity {},
    Monomial {
        n: usize,
        #[serde(default = "one")]
        coef: ScalarDesc,
    },
    PowerSeries {
        /// Coefficients of `z, z^2, …`.
        coeffs: Vec<ScalarDesc>,
        #[serde(default)]
        analytic_radius: Option<f64>,
    },
    Blaschke {
        #[serde(default = "one")]
        c: ScalarDesc,
        m: u32,
        #[serde(default)]
        zeros: Vec<ScalarDesc>,
    },
    Moebius {
        #[serde(default)]
        inner: Option<Box<FunctionDesc>>,
        a: ScalarDesc,
    },
    GeometricPhi {
        functional: FunctionalDesc,
    },
    Composite {
        scalar: Box<FunctionDesc>,
        functional: FunctionalDesc,
    },
    Product {
        factors: Vec<FunctionDesc>,
    },
    Sum {
        terms: Vec<FunctionDesc>,
    },
    Scale {
        c: ScalarDesc,
        inner: Box<FunctionDesc>,
    },
}

impl FunctionDesc {
    pub fn build(&self) -> Result<HoloFunction<f64>> {
        let fold = |items: &[FunctionDesc], op: fn(HoloFunction<f64>, HoloFunction<f64>) -> Result<HoloFunction<f64>>| {
            let mut it = items.iter();
            let first = it.next().map_or_else(|| invalid("products and sums need at least one operand"), |f| f.build())?;
            it.try_fold(first, |acc, f| op(acc, f.build()?))
        };
        match self {
            FunctionDesc::Identity {} => Ok(HoloFunction::identity()),
            FunctionDesc::Monomial { n, coef } => {
                if *n == 0 {
                    return invalid("monomial degree must be positive");
                }
                Ok(HoloFunction::monomial(*n, coef.value()))
            }
            FunctionDesc::PowerSeries { coeffs, analytic_radius } => {
                HoloFunction::power_series(coeffs.iter().map(|s| s.value()).collect(), *analytic_radius)
            }
            FunctionDesc::Blaschke { c, m, zeros } => {
                HoloFunction::blaschke(c.value(), *m, zeros.iter().map(|s| s.value()).collect())
            }
            FunctionDesc::Moebius { inner, a } => {
                let inner = inner.as_ref().map_or_else(|| Ok(HoloFunction::identity()), |f| f.build())?;
                HoloFunction::moebius_quotient(inner, a.value())
            }
            FunctionDesc::GeometricPhi { functional } => Ok(HoloFunction::geometric_phi(functional.build()?)),
            FunctionDesc::Composite { scalar, functional } => HoloFunction::composite(scalar.build()?, functional.build()?),
            FunctionDesc::Product { factors } => fold(factors, HoloFunction::product),
            FunctionDesc::Sum { terms } => fold(terms, HoloFunction::sum),
            FunctionDesc::Scale { c, inner } => HoloFunction::scale(c.value(), inner.build()?),
        }
    }
}

/// Level-`m` point, one coefficient matrix per basis element.
pub type PointDesc = Vec<MatrixDesc>;

pub fn point_from_desc(space: &SpaceRef<f64>, p: &PointDesc) -> Result<OpSpaceMatrix<f64>> {
    OpSpaceMatrix::new(space.clone(), p.iter().map(matrix_from_desc).collect::<Result<_>>()?)
}

pub fn point_to_desc(x: &OpSpaceMatrix<f64>) -> PointDesc {
    x.coeffs().iter().map(matrix_to_desc).collect()
}

pub fn set_from_desc(space: &SpaceRef<f64>, generators: &[PointDesc]) -> Result<MatrixSet<f64>> {
    MatrixSet::new(space.clone(), generators.iter().map(|g| point_from_desc(space, g)).collect::<Result<_>>()?)
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GcbTermDesc {
    #[serde(default = "one")]
    pub c: ScalarDesc,
    /// Defaults to the identity when the point level equals the target level.
    #[serde(default)]
    pub alpha: Option<MatrixDesc>,
    pub point: PointDesc,
    #[serde(default)]
    pub beta: Option<MatrixDesc>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GcbElementDesc {
    pub target_level: usize,
    pub terms: Vec<GcbTermDesc>,
}

impl GcbElementDesc {
    pub fn build(&self, space: &SpaceRef<f64>) -> Result<GcbElement<f64>> {
        let n = self.target_level;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let point = point_from_desc(space, &t.point)?;
                let side = |m: &Option<MatrixDesc>| match m {
                    Some(m) => matrix_from_desc(m),
                    None if point.level() == n => Ok(ComplexMatrix::identity(n)),
                    None => invalid("alpha and beta may only be omitted when the point level equals the target level"),
                };
                Ok(GcbTerm { c: t.c.value(), alpha: side(&t.alpha)?, beta: side(&t.beta)?, point })
            })
            .collect::<Result<Vec<_>>>()?;
        GcbElement::new(space.clone(), n, terms)
    }
}
