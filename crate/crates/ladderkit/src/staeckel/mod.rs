//! Coordinate-system catalog, Stackel determinant machinery, Robertson
//! condition checking, and assembly of separated one-dimensional equations.

pub mod config;
pub mod numexpr;

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symexpr::{Coefficient, DiffOperator, SymExprError, SymbolTable, SymbolicFunction};
use crate::Scalar;

pub use config::load_config;

#[derive(Debug, Error)]
pub enum StaeckelError {
    #[error("unknown coordinate system '{0}'")]
    UnknownSystem(String),
    #[error("point outside validity box of '{system}' (axis {axis})")]
    OutsideDomain { system: String, axis: usize },
    #[error("degenerate point: scale factor h{axis} vanishes")]
    DegeneratePoint { axis: usize },
    #[error("Stackel entry ({m},{n}) undefined at sample point")]
    EntryUndefined { m: usize, n: usize },
    #[error("system '{0}' ships without Stackel data (supply it via a config file)")]
    NoStaeckelData(String),
    #[error("sampling produced no valid interior points")]
    NoValidSamples,
    #[error("not representable in the power basis: {0}")]
    NotRepresentable(String),
    #[error("config parse error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Expr(#[from] numexpr::ExprError),
    #[error(transparent)]
    Sym(#[from] SymExprError),
}

/// Numeric scalar field over the three coordinates, either a native closure
/// (builtin catalog) or a parsed expression (config file).
#[derive(Clone)]
pub enum ScalarField<S: Scalar> {
    Closure(Arc<dyn Fn([S; 3]) -> S + Send + Sync>),
    Expr(Arc<numexpr::Expr>),
}

impl<S: Scalar> ScalarField<S> {
    pub fn of(f: impl Fn([S; 3]) -> S + Send + Sync + 'static) -> Self {
        ScalarField::Closure(Arc::new(f))
    }

    pub fn eval(&self, p: [S; 3]) -> S {
        match self {
            ScalarField::Closure(f) => f(p),
            ScalarField::Expr(e) => e.eval(p),
        }
    }
}

impl<S: Scalar> std::fmt::Debug for ScalarField<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarField::Closure(_) => write!(f, "<closure>"),
            ScalarField::Expr(e) => write!(f, "{e}"),
        }
    }
}

/// An orthogonal curvilinear coordinate system: the transform to
/// rectangular coordinates, per-axis `f_n` functions, and (when shipped or
/// configured) the 3x3 Stackel matrix. Values are immutable once built.
pub struct CoordinateSystem<S: Scalar> {
    pub name: String,
    pub coords: [String; 3],
    transform: [ScalarField<S>; 3],
    /// Closed-form Jacobian d(x,y,z)/d(xi_1..3), indexed [xyz][axis];
    /// `None` falls back to high-order finite differences.
    partials: Option<Arc<dyn Fn([S; 3]) -> [[S; 3]; 3] + Send + Sync>>,
    pub f_sym: [Option<SymbolicFunction>; 3],
    f_num: [Option<ScalarField<S>>; 3],
    pub phi_sym: [[Option<SymbolicFunction>; 3]; 3],
    phi_num: [[Option<ScalarField<S>>; 3]; 3],
    /// Per-axis open validity interval (conservative finite box for
    /// unbounded coordinates; sampling stays in its 10-90% interior).
    pub domain: [(S, S); 3],
}

impl<S: Scalar> CoordinateSystem<S> {
    pub fn has_staeckel_data(&self) -> bool {
        self.f_num.iter().all(Option::is_some)
            && self.phi_num.iter().flatten().all(Option::is_some)
    }

    pub fn transform_point(&self, p: [S; 3]) -> [S; 3] {
        [
            self.transform[0].eval(p),
            self.transform[1].eval(p),
            self.transform[2].eval(p),
        ]
    }

    fn check_domain(&self, p: [S; 3]) -> Result<(), StaeckelError> {
        for axis in 0..3 {
            let (lo, hi) = self.domain[axis];
            if !(p[axis] > lo && p[axis] < hi) {
                return Err(StaeckelError::OutsideDomain {
                    system: self.name.clone(),
                    axis: axis + 1,
                });
            }
        }
        Ok(())
    }

    /// Jacobian d(x,y,z)/d(xi_n); closed form when shipped, otherwise
    /// five-point central differences.
    pub fn jacobian(&self, p: [S; 3]) -> [[S; 3]; 3] {
        if let Some(pd) = &self.partials {
            return pd(p);
        }
        let step = S::from_f64(1e-4).unwrap();
        let mut out = [[S::zero(); 3]; 3];
        for axis in 0..3 {
            let h = step * S::one().max(p[axis].abs());
            let shifted = |d: S| {
                let mut q = p;
                q[axis] = q[axis] + d;
                self.transform_point(q)
            };
            let p2 = shifted(h + h);
            let p1 = shifted(h);
            let m1 = shifted(-h);
            let m2 = shifted(-(h + h));
            let eight = S::from_f64(8.0).unwrap();
            let twelve = S::from_f64(12.0).unwrap();
            for xyz in 0..3 {
                out[xyz][axis] =
                    (m2[xyz] - p2[xyz] + eight * (p1[xyz] - m1[xyz])) / (twelve * h);
            }
        }
        out
    }

    /// Metric scale factors h_n at an interior point.
    pub fn scale_factors(&self, p: [S; 3]) -> Result<[S; 3], StaeckelError> {
        self.check_domain(p)?;
        let jac = self.jacobian(p);
        let mut h = [S::zero(); 3];
        for axis in 0..3 {
            let s = (0..3)
                .map(|xyz| jac[xyz][axis] * jac[xyz][axis])
                .fold(S::zero(), |a, b| a + b);
            h[axis] = s.sqrt();
            if !(h[axis] > S::zero()) || !h[axis].is_finite() {
                return Err(StaeckelError::DegeneratePoint { axis: axis + 1 });
            }
        }
        Ok(h)
    }

    /// Evaluate the Stackel matrix at a point.
    pub fn phi_matrix(&self, p: [S; 3]) -> Result<[[S; 3]; 3], StaeckelError> {
        let mut out = [[S::zero(); 3]; 3];
        for m in 0..3 {
            for n in 0..3 {
                let field = self.phi_num[m][n]
                    .as_ref()
                    .ok_or_else(|| StaeckelError::NoStaeckelData(self.name.clone()))?;
                let v = field.eval(p);
                if !v.is_finite() {
                    return Err(StaeckelError::EntryUndefined { m: m + 1, n: n + 1 });
                }
                out[m][n] = v;
            }
        }
        Ok(out)
    }

    pub fn f_values(&self, p: [S; 3]) -> Result<[S; 3], StaeckelError> {
        let mut out = [S::zero(); 3];
        for n in 0..3 {
            let field = self.f_num[n]
                .as_ref()
                .ok_or_else(|| StaeckelError::NoStaeckelData(self.name.clone()))?;
            out[n] = field.eval(p);
        }
        Ok(out)
    }
}

/// Six-term expansion of the 3x3 Stackel determinant.
pub fn staeckel_determinant<S: Scalar>(phi: &[[S; 3]; 3]) -> S {
    phi[0][0] * phi[1][1] * phi[2][2]
        + phi[0][1] * phi[1][2] * phi[2][0]
        + phi[0][2] * phi[1][0] * phi[2][1]
        - phi[0][2] * phi[1][1] * phi[2][0]
        - phi[0][0] * phi[1][2] * phi[2][1]
        - phi[0][1] * phi[1][0] * phi[2][2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RobertsonVerdict {
    Holds,
    Violated,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RobertsonSample {
    pub point: [f64; 3],
    pub h_product_over_s: f64,
    pub f_product: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RobertsonReport {
    pub system: String,
    pub samples: Vec<RobertsonSample>,
    pub max_relative_deviation: f64,
    pub verdict: RobertsonVerdict,
}

pub const ROBERTSON_TOLERANCE: f64 = 1e-10;

/// Check h1*h2*h3/S == f1*f2*f3 at seeded random interior points.
pub fn robertson_check<S: Scalar>(
    system: &CoordinateSystem<S>,
    samples: usize,
    seed: u64,
) -> Result<RobertsonReport, StaeckelError> {
    if !system.has_staeckel_data() {
        return Err(StaeckelError::NoStaeckelData(system.name.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(samples);
    let mut max_dev = 0.0f64;
    for _ in 0..samples.max(1) {
        // uniform over the conservative 10-90% interior sub-box
        let mut p = [S::zero(); 3];
        for axis in 0..3 {
            let (lo, hi) = system.domain[axis];
            let t = S::from_f64(rng.gen_range(0.1..0.9)).unwrap();
            p[axis] = lo + (hi - lo) * t;
        }
        let h = match system.scale_factors(p) {
            Ok(h) => h,
            Err(_) => continue,
        };
        let phi = system.phi_matrix(p)?;
        let det = staeckel_determinant(&phi);
        let f = system.f_values(p)?;
        let lhs = (h[0] * h[1] * h[2] / det).to_f64().unwrap_or(f64::NAN);
        let rhs = (f[0] * f[1] * f[2]).to_f64().unwrap_or(f64::NAN);
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let dev = (lhs - rhs).abs() / scale;
        max_dev = max_dev.max(dev);
        records.push(RobertsonSample {
            point: [
                p[0].to_f64().unwrap_or(f64::NAN),
                p[1].to_f64().unwrap_or(f64::NAN),
                p[2].to_f64().unwrap_or(f64::NAN),
            ],
            h_product_over_s: lhs,
            f_product: rhs,
        });
    }
    if records.is_empty() {
        return Err(StaeckelError::NoValidSamples);
    }
    let verdict = if max_dev < ROBERTSON_TOLERANCE {
        RobertsonVerdict::Holds
    } else {
        RobertsonVerdict::Violated
    };
    Ok(RobertsonReport {
        system: system.name.clone(),
        samples: records,
        max_relative_deviation: max_dev,
        verdict,
    })
}

/// One separated one-dimensional equation:
/// (1/f) d/dxi (f dX/dxi) + [sum_{n != m} k_n^2 Phi_mn - v] X = k_m^2 (-Phi_mm) X.
#[derive(Debug, Clone)]
pub struct SeparatedEquation {
    pub axis: usize,
    pub f: SymbolicFunction,
    pub phi_row: [SymbolicFunction; 3],
    pub potential: SymbolicFunction,
    /// k'_n^2 for n = 1, 2, 3 as symbolic coefficients.
    pub constants: [Coefficient; 3],
}

impl SeparatedEquation {
    pub fn table(&self) -> &Arc<SymbolTable> {
        self.f.table()
    }

    /// f'/f, representable only for single-term f (e.g. x^2 -> 2/x).
    pub fn log_derivative(&self) -> Result<SymbolicFunction, StaeckelError> {
        self.f
            .differentiate()
            .div(&self.f)
            .map_err(|_| StaeckelError::NotRepresentable(format!("f'/f for f = {}", self.f)))
    }

    /// Zero-order part of the separated operator:
    /// sum_{n != m} k_n^2 Phi_mn - v.
    pub fn coupling_term(&self) -> SymbolicFunction {
        let mut acc = self.potential.neg();
        for n in 0..3 {
            if n == self.axis {
                continue;
            }
            acc = acc.add(&self.phi_row[n].scale(&self.constants[n]));
        }
        acc
    }

    /// The second-order operator H with H X = -k_m^2 Phi_mm X;
    /// for the shipped radial equations (Phi_mm = 1) this is the operator of
    /// the eigenproblem H X = lambda X with lambda = -epsilon.
    pub fn hamiltonian(&self) -> Result<DiffOperator, StaeckelError> {
        let table = self.table().clone();
        let one = SymbolicFunction::constant(Coefficient::one(&table));
        Ok(DiffOperator::new(one, self.log_derivative()?, self.coupling_term()))
    }

    /// The eigen-side factor -Phi_mm (so H X = k_m^2 * eigen_factor * X).
    pub fn eigen_factor(&self) -> SymbolicFunction {
        self.phi_row[self.axis].neg()
    }
}

/// Assemble the separated equation along `axis` (0-based) of `system` with
/// potential term `v` (a function of that coordinate) and the three
/// separation constants.
pub fn assemble_separated_equation<S: Scalar>(
    system: &CoordinateSystem<S>,
    axis: usize,
    potential: SymbolicFunction,
    constants: [Coefficient; 3],
) -> Result<SeparatedEquation, StaeckelError> {
    assert!(axis < 3);
    let f = system.f_sym[axis].clone().ok_or_else(|| {
        StaeckelError::NotRepresentable(format!(
            "f_{} of '{}' has no symbolic form",
            axis + 1,
            system.name
        ))
    })?;
    let mut row = Vec::with_capacity(3);
    for n in 0..3 {
        row.push(system.phi_sym[axis][n].clone().ok_or_else(|| {
            StaeckelError::NotRepresentable(format!(
                "Phi_{}{} of '{}' has no symbolic form",
                axis + 1,
                n + 1,
                system.name
            ))
        })?);
    }
    let phi_row: [SymbolicFunction; 3] = [row[0].clone(), row[1].clone(), row[2].clone()];
    Ok(SeparatedEquation {
        axis,
        f,
        phi_row,
        potential,
        constants,
    })
}

// ---------- builtin catalog ----------

fn none3<S: Scalar>() -> [Option<ScalarField<S>>; 3] {
    [None, None, None]
}

fn none33<S: Scalar>() -> [[Option<ScalarField<S>>; 3]; 3] {
    [none3(), none3(), none3()]
}

fn sym_none3() -> [Option<SymbolicFunction>; 3] {
    [None, None, None]
}

fn sym_none33() -> [[Option<SymbolicFunction>; 3]; 3] {
    [sym_none3(), sym_none3(), sym_none3()]
}

fn parse_sym(text: &str, table: &Arc<SymbolTable>) -> SymbolicFunction {
    crate::symexpr::parse_expr(text, table).expect("catalog expression parses")
}

/// The builtin catalog. The first four systems ship complete Stackel data;
/// the remaining seven ship transforms and scale factors only and accept
/// user-supplied Stackel data through the config file.
pub fn catalog<S: Scalar>() -> Vec<CoordinateSystem<S>> {
    let table = SymbolTable::new(&["l", "K", "s"]).unwrap();
    let two = S::from_f64(2.0).unwrap();
    let mut systems = Vec::new();

    // rectangular: identity transform, f = 1, Phi = identity
    {
        let one = parse_sym("1", &table);
        let zero = parse_sym("0", &table);
        let mut phi_sym = sym_none33();
        let mut phi_num = none33::<S>();
        for m in 0..3 {
            for n in 0..3 {
                phi_sym[m][n] = Some(if m == n { one.clone() } else { zero.clone() });
                let v = if m == n { S::one() } else { S::zero() };
                phi_num[m][n] = Some(ScalarField::of(move |_| v));
            }
        }
        systems.push(CoordinateSystem {
            name: "rectangular".into(),
            coords: ["x".into(), "y".into(), "z".into()],
            transform: [
                ScalarField::of(|p: [S; 3]| p[0]),
                ScalarField::of(|p: [S; 3]| p[1]),
                ScalarField::of(|p: [S; 3]| p[2]),
            ],
            partials: Some(Arc::new(|_p| {
                let mut j = [[S::zero(); 3]; 3];
                for i in 0..3 {
                    j[i][i] = S::one();
                }
                j
            })),
            f_sym: [Some(one.clone()), Some(one.clone()), Some(one.clone())],
            f_num: [
                Some(ScalarField::of(|_| S::one())),
                Some(ScalarField::of(|_| S::one())),
                Some(ScalarField::of(|_| S::one())),
            ],
            phi_sym,
            phi_num,
            domain: [
                (-S::from_f64(10.0).unwrap(), S::from_f64(10.0).unwrap()),
                (-S::from_f64(10.0).unwrap(), S::from_f64(10.0).unwrap()),
                (-S::from_f64(10.0).unwrap(), S::from_f64(10.0).unwrap()),
            ],
        });
    }

    // circular-cylindrical (rho, phi, z): f = (rho, 1, 1), S = 1
    {
        let mut phi_sym = sym_none33();
        phi_sym[0][0] = Some(parse_sym("1", &table));
        phi_sym[0][1] = Some(parse_sym("0 - 1/x^2", &table));
        phi_sym[0][2] = Some(parse_sym("1", &table));
        phi_sym[1] = [
            Some(parse_sym("0", &table)),
            Some(parse_sym("1", &table)),
            Some(parse_sym("0", &table)),
        ];
        phi_sym[2] = [
            Some(parse_sym("0", &table)),
            Some(parse_sym("0", &table)),
            Some(parse_sym("1", &table)),
        ];
        let mut phi_num = none33::<S>();
        let vals: [[fn([S; 3]) -> S; 3]; 3] = [
            [
                |_| S::one(),
                |p| -S::one() / (p[0] * p[0]),
                |_| S::one(),
            ],
            [|_| S::zero(), |_| S::one(), |_| S::zero()],
            [|_| S::zero(), |_| S::zero(), |_| S::one()],
        ];
        for m in 0..3 {
            for n in 0..3 {
                let f = vals[m][n];
                phi_num[m][n] = Some(ScalarField::of(move |p| f(p)));
            }
        }
        systems.push(CoordinateSystem {
            name: "circular-cylindrical".into(),
            coords: ["rho".into(), "phi".into(), "z".into()],
            transform: [
                ScalarField::of(|p: [S; 3]| p[0] * p[1].cos()),
                ScalarField::of(|p: [S; 3]| p[0] * p[1].sin()),
                ScalarField::of(|p: [S; 3]| p[2]),
            ],
            partials: Some(Arc::new(|p: [S; 3]| {
                [
                    [p[1].cos(), -p[0] * p[1].sin(), S::zero()],
                    [p[1].sin(), p[0] * p[1].cos(), S::zero()],
                    [S::zero(), S::zero(), S::one()],
                ]
            })),
            f_sym: [
                Some(parse_sym("x", &table)),
                Some(parse_sym("1", &table)),
                Some(parse_sym("1", &table)),
            ],
            f_num: [
                Some(ScalarField::of(|p: [S; 3]| p[0])),
                Some(ScalarField::of(|_| S::one())),
                Some(ScalarField::of(|_| S::one())),
            ],
            phi_sym,
            phi_num,
            domain: [
                (S::zero(), S::from_f64(10.0).unwrap()),
                (S::zero(), S::from_f64(std::f64::consts::TAU).unwrap()),
                (-S::from_f64(10.0).unwrap(), S::from_f64(10.0).unwrap()),
            ],
        });
    }

    // spherical, catalog convention: (r, u = cos(theta), phi),
    // f = (r^2, 1 - u^2, 1), S = 1/(1 - u^2)
    {
        let mut phi_sym = sym_none33();
        phi_sym[0] = [
            Some(parse_sym("1", &table)),
            Some(parse_sym("1/x^2", &table)),
            Some(parse_sym("0", &table)),
        ];
        // rows 2 and 3 involve 1/(1-u^2), outside the power basis; they are
        // numeric-only, which is all the Robertson check needs.
        let mut phi_num = none33::<S>();
        phi_num[0][0] = Some(ScalarField::of(|_| S::one()));
        phi_num[0][1] = Some(ScalarField::of(|p: [S; 3]| S::one() / (p[0] * p[0])));
        phi_num[0][2] = Some(ScalarField::of(|_| S::zero()));
        phi_num[1][0] = Some(ScalarField::of(|_| S::zero()));
        phi_num[1][1] = Some(ScalarField::of(|p: [S; 3]| {
            -S::one() / (S::one() - p[1] * p[1])
        }));
        phi_num[1][2] = Some(ScalarField::of(|p: [S; 3]| {
            let w = S::one() - p[1] * p[1];
            -S::one() / (w * w)
        }));
        phi_num[2][0] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][1] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][2] = Some(ScalarField::of(|_| -S::one()));
        systems.push(CoordinateSystem {
            name: "spherical".into(),
            coords: ["r".into(), "u".into(), "phi".into()],
            transform: [
                ScalarField::of(|p: [S; 3]| {
                    p[0] * (S::one() - p[1] * p[1]).sqrt() * p[2].cos()
                }),
                ScalarField::of(|p: [S; 3]| {
                    p[0] * (S::one() - p[1] * p[1]).sqrt() * p[2].sin()
                }),
                ScalarField::of(|p: [S; 3]| p[0] * p[1]),
            ],
            partials: Some(Arc::new(|p: [S; 3]| {
                let (r, u, phi) = (p[0], p[1], p[2]);
                let w = (S::one() - u * u).sqrt();
                [
                    [w * phi.cos(), -r * u * phi.cos() / w, -r * w * phi.sin()],
                    [w * phi.sin(), -r * u * phi.sin() / w, r * w * phi.cos()],
                    [u, r, S::zero()],
                ]
            })),
            f_sym: [
                Some(parse_sym("x^2", &table)),
                Some(parse_sym("1 - x^2", &table)),
                Some(parse_sym("1", &table)),
            ],
            f_num: [
                Some(ScalarField::of(|p: [S; 3]| p[0] * p[0])),
                Some(ScalarField::of(|p: [S; 3]| S::one() - p[1] * p[1])),
                Some(ScalarField::of(|_| S::one())),
            ],
            phi_sym,
            phi_num,
            domain: [
                (S::zero(), S::from_f64(10.0).unwrap()),
                (-S::one(), S::one()),
                (S::zero(), S::from_f64(std::f64::consts::TAU).unwrap()),
            ],
        });
    }

    // spherical-paper: literal (r, theta, phi) reading of the printed
    // Stackel matrix with f3 = sqrt(1 - cos^2(phi)); kept for the audit.
    {
        let mut phi_sym = sym_none33();
        phi_sym[0] = [
            Some(parse_sym("1", &table)),
            Some(parse_sym("1/x^2", &table)),
            Some(parse_sym("0", &table)),
        ];
        let mut phi_num = none33::<S>();
        phi_num[0][0] = Some(ScalarField::of(|_| S::one()));
        phi_num[0][1] = Some(ScalarField::of(|p: [S; 3]| S::one() / (p[0] * p[0])));
        phi_num[0][2] = Some(ScalarField::of(|_| S::zero()));
        phi_num[1][0] = Some(ScalarField::of(|_| S::zero()));
        phi_num[1][1] = Some(ScalarField::of(|p: [S; 3]| {
            S::one() / (p[1].cos() * p[1].cos() - S::one())
        }));
        phi_num[1][2] = Some(ScalarField::of(|p: [S; 3]| {
            let w = p[1].cos() * p[1].cos() - S::one();
            S::one() / (w * w)
        }));
        phi_num[2][0] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][1] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][2] = Some(ScalarField::of(|p: [S; 3]| {
            S::one() / (p[2].cos() * p[2].cos() - S::one())
        }));
        systems.push(CoordinateSystem {
            name: "spherical-paper".into(),
            coords: ["r".into(), "theta".into(), "phi".into()],
            transform: [
                ScalarField::of(|p: [S; 3]| p[0] * p[1].sin() * p[2].cos()),
                ScalarField::of(|p: [S; 3]| p[0] * p[1].sin() * p[2].sin()),
                ScalarField::of(|p: [S; 3]| p[0] * p[1].cos()),
            ],
            partials: Some(Arc::new(|p: [S; 3]| {
                let (r, th, phi) = (p[0], p[1], p[2]);
                [
                    [
                        th.sin() * phi.cos(),
                        r * th.cos() * phi.cos(),
                        -r * th.sin() * phi.sin(),
                    ],
                    [
                        th.sin() * phi.sin(),
                        r * th.cos() * phi.sin(),
                        r * th.sin() * phi.cos(),
                    ],
                    [th.cos(), -r * th.sin(), S::zero()],
                ]
            })),
            f_sym: [
                Some(parse_sym("x^2", &table)),
                None, // sin^2(theta): outside the power basis
                None, // |sin(phi)|: outside the power basis
            ],
            f_num: [
                Some(ScalarField::of(|p: [S; 3]| p[0] * p[0])),
                Some(ScalarField::of(|p: [S; 3]| {
                    S::one() - p[1].cos() * p[1].cos()
                })),
                Some(ScalarField::of(|p: [S; 3]| {
                    (S::one() - p[2].cos() * p[2].cos()).sqrt()
                })),
            ],
            phi_sym,
            phi_num,
            domain: [
                (S::zero(), S::from_f64(10.0).unwrap()),
                (S::zero(), S::from_f64(std::f64::consts::PI).unwrap()),
                (S::zero(), S::from_f64(std::f64::consts::PI).unwrap()),
            ],
        });
    }

    // parabolic (xi, eta, phi): f = (xi, eta, 1), S = xi^2 + eta^2
    {
        let mut phi_sym = sym_none33();
        phi_sym[0] = [
            Some(parse_sym("x^2", &table)),
            Some(parse_sym("0 - 1", &table)),
            Some(parse_sym("0 - 1/x^2", &table)),
        ];
        phi_sym[1] = [
            Some(parse_sym("x^2", &table)),
            Some(parse_sym("1", &table)),
            Some(parse_sym("0 - 1/x^2", &table)),
        ];
        phi_sym[2] = [
            Some(parse_sym("0", &table)),
            Some(parse_sym("0", &table)),
            Some(parse_sym("1", &table)),
        ];
        let mut phi_num = none33::<S>();
        phi_num[0][0] = Some(ScalarField::of(|p: [S; 3]| p[0] * p[0]));
        phi_num[0][1] = Some(ScalarField::of(|_| -S::one()));
        phi_num[0][2] = Some(ScalarField::of(|p: [S; 3]| -S::one() / (p[0] * p[0])));
        phi_num[1][0] = Some(ScalarField::of(|p: [S; 3]| p[1] * p[1]));
        phi_num[1][1] = Some(ScalarField::of(|_| S::one()));
        phi_num[1][2] = Some(ScalarField::of(|p: [S; 3]| -S::one() / (p[1] * p[1])));
        phi_num[2][0] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][1] = Some(ScalarField::of(|_| S::zero()));
        phi_num[2][2] = Some(ScalarField::of(|_| S::one()));
        systems.push(CoordinateSystem {
            name: "parabolic".into(),
            coords: ["xi".into(), "eta".into(), "phi".into()],
            transform: [
                ScalarField::of(|p: [S; 3]| p[0] * p[1] * p[2].cos()),
                ScalarField::of(|p: [S; 3]| p[0] * p[1] * p[2].sin()),
                ScalarField::of(move |p: [S; 3]| (p[0] * p[0] - p[1] * p[1]) / two),
            ],
            partials: Some(Arc::new(|p: [S; 3]| {
                let (xi, eta, phi) = (p[0], p[1], p[2]);
                [
                    [eta * phi.cos(), xi * phi.cos(), -xi * eta * phi.sin()],
                    [eta * phi.sin(), xi * phi.sin(), xi * eta * phi.cos()],
                    [xi, -eta, S::zero()],
                ]
            })),
            f_sym: [
                Some(parse_sym("x", &table)),
                Some(parse_sym("x", &table)),
                Some(parse_sym("1", &table)),
            ],
            f_num: [
                Some(ScalarField::of(|p: [S; 3]| p[0])),
                Some(ScalarField::of(|p: [S; 3]| p[1])),
                Some(ScalarField::of(|_| S::one())),
            ],
            phi_sym,
            phi_num,
            domain: [
                (S::zero(), S::from_f64(8.0).unwrap()),
                (S::zero(), S::from_f64(8.0).unwrap()),
                (S::zero(), S::from_f64(std::f64::consts::TAU).unwrap()),
            ],
        });
    }

    // The remaining seven ship transforms only.
    systems.push(transform_only(
        "elliptic-cylindrical",
        ["u", "v", "z"],
        [
            ScalarField::of(|p: [S; 3]| p[0].cosh() * p[1].cos()),
            ScalarField::of(|p: [S; 3]| p[0].sinh() * p[1].sin()),
            ScalarField::of(|p: [S; 3]| p[2]),
        ],
        [(0.0, 3.0), (0.0, std::f64::consts::TAU), (-10.0, 10.0)],
    ));
    systems.push(transform_only(
        "parabolic-cylindrical",
        ["sigma", "tau", "z"],
        [
            ScalarField::of(|p: [S; 3]| p[0] * p[1]),
            ScalarField::of(move |p: [S; 3]| (p[1] * p[1] - p[0] * p[0]) / two),
            ScalarField::of(|p: [S; 3]| p[2]),
        ],
        [(0.0, 5.0), (0.0, 5.0), (-10.0, 10.0)],
    ));
    systems.push(transform_only(
        "prolate-spheroidal",
        ["xi", "eta", "phi"],
        [
            ScalarField::of(|p: [S; 3]| p[0].sinh() * p[1].sin() * p[2].cos()),
            ScalarField::of(|p: [S; 3]| p[0].sinh() * p[1].sin() * p[2].sin()),
            ScalarField::of(|p: [S; 3]| p[0].cosh() * p[1].cos()),
        ],
        [
            (0.0, 3.0),
            (0.0, std::f64::consts::PI),
            (0.0, std::f64::consts::TAU),
        ],
    ));
    systems.push(transform_only(
        "oblate-spheroidal",
        ["xi", "eta", "phi"],
        [
            ScalarField::of(|p: [S; 3]| p[0].cosh() * p[1].cos() * p[2].cos()),
            ScalarField::of(|p: [S; 3]| p[0].cosh() * p[1].cos() * p[2].sin()),
            ScalarField::of(|p: [S; 3]| p[0].sinh() * p[1].sin()),
        ],
        [
            (0.0, 3.0),
            (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2),
            (0.0, std::f64::consts::TAU),
        ],
    ));
    // conical with parameters b = 1, c = 2: 1 < mu < 2, 0 < nu < 1
    systems.push(transform_only(
        "conical",
        ["r", "mu", "nu"],
        [
            ScalarField::of(move |p: [S; 3]| p[0] * p[1] * p[2] / two),
            ScalarField::of(|p: [S; 3]| {
                let (r, mu, nu) = (p[0], p[1], p[2]);
                let three = S::from_f64(3.0).unwrap();
                r * ((mu * mu - S::one()) * (S::one() - nu * nu) / three).sqrt()
            }),
            ScalarField::of(move |p: [S; 3]| {
                let (r, mu, nu) = (p[0], p[1], p[2]);
                let three = S::from_f64(3.0).unwrap();
                let four = two * two;
                r / two * ((four - mu * mu) * (four - nu * nu) / three).sqrt()
            }),
        ],
        [(0.0, 10.0), (1.0, 2.0), (0.0, 1.0)],
    ));
    // ellipsoidal with a^2 = 1, b^2 = 2, c^2 = 3:
    // lambda > -1 > mu > -2 > nu > -3
    systems.push(transform_only(
        "ellipsoidal",
        ["lambda", "mu", "nu"],
        [
            ScalarField::of(move |p: [S; 3]| {
                let one = S::one();
                ((one + p[0]) * (one + p[1]) * (one + p[2]) / two).sqrt()
            }),
            ScalarField::of(move |p: [S; 3]| {
                (-(two + p[0]) * (two + p[1]) * (two + p[2])).sqrt()
            }),
            ScalarField::of(move |p: [S; 3]| {
                let three = S::from_f64(3.0).unwrap();
                ((three + p[0]) * (three + p[1]) * (three + p[2]) / two).sqrt()
            }),
        ],
        [(-1.0, 10.0), (-2.0, -1.0), (-3.0, -2.0)],
    ));
    // paraboloidal with b^2 = 1, c^2 = 2: lambda < 1 < mu < 2 < nu
    systems.push(transform_only(
        "paraboloidal",
        ["lambda", "mu", "nu"],
        [
            ScalarField::of(|p: [S; 3]| {
                let one = S::one();
                (-(p[0] - one) * (p[1] - one) * (p[2] - one)).sqrt()
            }),
            ScalarField::of(move |p: [S; 3]| {
                ((p[0] - two) * (p[1] - two) * (p[2] - two)).sqrt()
            }),
            ScalarField::of(move |p: [S; 3]| {
                let three = S::from_f64(3.0).unwrap();
                (p[0] + p[1] + p[2] - three) / two
            }),
        ],
        [(0.0, 1.0), (1.0, 2.0), (2.0, 5.0)],
    ));

    systems
}

fn transform_only<S: Scalar>(
    name: &str,
    coords: [&str; 3],
    transform: [ScalarField<S>; 3],
    domain: [(f64, f64); 3],
) -> CoordinateSystem<S> {
    CoordinateSystem {
        name: name.into(),
        coords: coords.map(String::from),
        transform,
        partials: None,
        f_sym: sym_none3(),
        f_num: none3(),
        phi_sym: sym_none33(),
        phi_num: none33(),
        domain: domain.map(|(lo, hi)| {
            (S::from_f64(lo).unwrap(), S::from_f64(hi).unwrap())
        }),
    }
}

/// Catalog lookup plus any config-loaded systems (config shadows builtin).
pub fn find_system<S: Scalar>(
    extra: &[CoordinateSystem<S>],
    name: &str,
) -> Result<CoordinateSystem<S>, StaeckelError>
where
    CoordinateSystem<S>: Clone,
{
    if let Some(s) = extra.iter().find(|s| s.name == name) {
        return Ok(s.clone());
    }
    catalog::<S>()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| StaeckelError::UnknownSystem(name.to_string()))
}

impl<S: Scalar> Clone for CoordinateSystem<S> {
    fn clone(&self) -> Self {
        CoordinateSystem {
            name: self.name.clone(),
            coords: self.coords.clone(),
            transform: self.transform.clone(),
            partials: self.partials.clone(),
            f_sym: self.f_sym.clone(),
            f_num: self.f_num.clone(),
            phi_sym: self.phi_sym.clone(),
            phi_num: self.phi_num.clone(),
            domain: self.domain,
        }
    }
}

impl<S: Scalar> std::fmt::Debug for CoordinateSystem<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoordinateSystem")
            .field("name", &self.name)
            .field("coords", &self.coords)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}
