//! Manufactured solutions and engineering benchmarks.
//!
//! Each case carries its domain, material defaults, boundary layout and the
//! exact fields (displacement, gradient, pseudo-pressure, stress, body
//! force). Hand-derived loads are guarded by [`verify_case_consistency`],
//! which checks the constitutive relation and the equilibrium residual with
//! central finite differences at random interior points.

use crate::elements::MaterialParams;
use crate::geometry::generators::BoxDomain;
use crate::geometry::{BoundaryTag, Point};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

pub type VectorFn = Arc<dyn Fn(&Point) -> [f64; 3] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(&Point) -> [[f64; 3]; 3] + Send + Sync>;
pub type BoundaryFn = Arc<dyn Fn(&Point) -> BoundaryTag + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseName {
    Tc1,
    Tc2,
    Tc3Mixed,
    Tc3d1,
    Tc3d2,
    Cook,
    ShearBeam,
}

impl CaseName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseName::Tc1 => "tc1",
            CaseName::Tc2 => "tc2",
            CaseName::Tc3Mixed => "tc3_mixed",
            CaseName::Tc3d1 => "tc3d_1",
            CaseName::Tc3d2 => "tc3d_2",
            CaseName::Cook => "cook",
            CaseName::ShearBeam => "shear_beam",
        }
    }
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case '{0}' (known: tc1, tc2, tc3_mixed, tc3d_1, tc3d_2, cook, shear_beam)")]
    UnknownCase(String),
    #[error(transparent)]
    Material(#[from] crate::elements::KernelError),
}

impl std::str::FromStr for CaseName {
    type Err = CaseError;

    fn from_str(s: &str) -> Result<Self, CaseError> {
        match s.to_ascii_lowercase().as_str() {
            "tc1" => Ok(CaseName::Tc1),
            "tc2" => Ok(CaseName::Tc2),
            "tc3_mixed" | "tc3" | "tc3mixed" => Ok(CaseName::Tc3Mixed),
            "tc3d_1" | "tc3d1" => Ok(CaseName::Tc3d1),
            "tc3d_2" | "tc3d2" | "tc4" => Ok(CaseName::Tc3d2),
            "cook" => Ok(CaseName::Cook),
            "shear_beam" | "shearbeam" | "beam" => Ok(CaseName::ShearBeam),
            other => Err(CaseError::UnknownCase(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum CaseDomain {
    Box(BoxDomain),
    /// Tapered Cook membrane quadrilateral (0,0), (48,44), (48,60), (0,44).
    CookQuad,
}

pub struct AnalyticCase {
    pub name: CaseName,
    pub dim: usize,
    pub domain: CaseDomain,
    pub material: MaterialParams,
    /// Classifies boundary facets by midpoint.
    pub boundary: BoundaryFn,
    /// Exact displacement; absent for the Cook benchmark.
    pub displacement: Option<VectorFn>,
    /// Exact displacement gradient, grad[i][j] = du_i/dx_j.
    pub displacement_gradient: Option<TensorFn>,
    /// Exact pseudo-pressure lambda div(u).
    pub pressure: Option<ScalarFn>,
    /// Exact Cauchy stress.
    pub stress: Option<TensorFn>,
    pub body_force: VectorFn,
    /// Neumann traction rho = sigma n on Gamma_N.
    pub traction: VectorFn,
    /// Dirichlet datum g on Gamma_D.
    pub dirichlet: VectorFn,
    /// Published benchmark target (Cook tip displacement at (48, 52)).
    pub reference_tip: Option<f64>,
}

fn zero_vec(_: &Point) -> [f64; 3] {
    [0.0; 3]
}

/// Stress from a displacement gradient: 2 mu eps + lambda tr(grad) I.
pub fn stress_from_gradient(g: &[[f64; 3]; 3], lambda: f64, mu: f64) -> [[f64; 3]; 3] {
    let tr = g[0][0] + g[1][1] + g[2][2];
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = mu * (g[i][j] + g[j][i]);
        }
        s[i][i] += lambda * tr;
    }
    s
}

/// Truncated series for the shear-loaded beam (Barber's solution). Ratios of
/// hyperbolic functions are evaluated in exponential form so cosh(n pi) never
/// overflows; terms are summed until they drop below 1e-16 or the cap.
struct BeamSeries {
    f_load: f64,
    nu: f64,
    prefac: f64,
}

const BEAM_SERIES_CAP: usize = 2000;

impl BeamSeries {
    fn new(f_load: f64, nu: f64) -> Self {
        let pi = std::f64::consts::PI;
        BeamSeries {
            f_load,
            nu,
            prefac: 3.0 * f_load * nu / (2.0 * pi * pi * (1.0 + nu)),
        }
    }

    /// sinh(a)/cosh(b) for b > 0, |a| <= b.
    fn ratio_sinh(a: f64, b: f64) -> f64 {
        ((a - b).exp() - (-a - b).exp()) / (1.0 + (-2.0 * b).exp())
    }

    /// cosh(a)/cosh(b) for b > 0, |a| <= b.
    fn ratio_cosh(a: f64, b: f64) -> f64 {
        ((a - b).exp() + (-a - b).exp()) / (1.0 + (-2.0 * b).exp())
    }

    fn sum(&self, term: impl Fn(usize, f64, f64) -> f64) -> f64 {
        let pi = std::f64::consts::PI;
        let mut acc = 0.0;
        for n in 1..=BEAM_SERIES_CAP {
            let npi = n as f64 * pi;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let t = term(n, npi, sign);
            acc += t;
            if t.abs() < 1e-16 {
                break;
            }
        }
        self.prefac * acc
    }

    fn sigma31(&self, x: f64, y: f64) -> f64 {
        self.sum(|n, npi, sign| {
            sign / (n * n) as f64 * (npi * x).sin() * Self::ratio_sinh(npi * y, npi)
        })
    }

    fn sigma23(&self, x: f64, y: f64) -> f64 {
        let f = self.f_load;
        3.0 * f * (1.0 - y * y) / 8.0 + f * self.nu * (3.0 * x * x - 1.0) / (8.0 * (1.0 + self.nu))
            - self.sum(|n, npi, sign| {
                sign / (n * n) as f64 * (npi * x).cos() * Self::ratio_cosh(npi * y, npi)
            })
    }

    /// Antiderivative of sigma23 in y with psi(x, 0) = 0.
    fn psi(&self, x: f64, y: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let f = self.f_load;
        3.0 * f / 8.0 * (y - y * y * y / 3.0)
            + f * self.nu * (3.0 * x * x - 1.0) * y / (8.0 * (1.0 + self.nu))
            - self.sum(|n, npi, sign| {
                sign / ((n * n * n) as f64 * pi) * (npi * x).cos() * Self::ratio_sinh(npi * y, npi)
            })
    }

    fn psi_x(&self, x: f64, y: f64) -> f64 {
        let f = self.f_load;
        3.0 * f * self.nu * x * y / (4.0 * (1.0 + self.nu)) + self.sigma31(x, y)
    }

    fn psi_y(&self, x: f64, y: f64) -> f64 {
        self.sigma23(x, y)
    }
}

/// Builds a fully populated case; `e` and `nu` override the published
/// material defaults (tc2's exact field depends on lambda, so overriding the
/// material reshapes the solution as well).
pub fn get_case(name: CaseName, e: Option<f64>, nu: Option<f64>) -> Result<AnalyticCase, CaseError> {
    let defaults = match name {
        CaseName::Tc1 => (1.0, 0.45),
        CaseName::Tc2 => (1.0, 0.45),
        CaseName::Tc3Mixed => (1.0, 0.3),
        CaseName::Tc3d1 => (1.0, 0.1),
        CaseName::Tc3d2 => (1.0, 0.1),
        CaseName::Cook => (1.124_999_981_25, 0.499_999_975),
        CaseName::ShearBeam => (25.0, 0.3),
    };
    let material =
        MaterialParams::from_young_poisson(e.unwrap_or(defaults.0), nu.unwrap_or(defaults.1))?;
    let (lambda, mu) = (material.lambda, material.mu);

    let all_dirichlet: BoundaryFn = Arc::new(|_: &Point| BoundaryTag::Dirichlet);

    let case = match name {
        CaseName::Tc1 => {
            let grad: TensorFn = Arc::new(move |p: &Point| {
                let (x, y) = (p[0], p[1]);
                [
                    [2.0 * x, -2.0 * y, 0.0],
                    [2.0 * x, 2.0 * y, 0.0],
                    [0.0, 0.0, 0.0],
                ]
            });
            let g2 = grad.clone();
            let u: VectorFn =
                Arc::new(move |p: &Point| [p[0] * p[0] - p[1] * p[1], p[0] * p[0] + p[1] * p[1], 0.0]);
            AnalyticCase {
                name,
                dim: 2,
                domain: CaseDomain::Box(BoxDomain::unit_square()),
                material,
                boundary: all_dirichlet,
                displacement: Some(u.clone()),
                displacement_gradient: Some(grad),
                pressure: Some(Arc::new(move |p: &Point| {
                    lambda * (2.0 * p[0] + 2.0 * p[1])
                })),
                stress: Some(Arc::new(move |p: &Point| {
                    stress_from_gradient(&g2(p), lambda, mu)
                })),
                body_force: Arc::new(move |_: &Point| {
                    [-(2.0 * mu + 2.0 * lambda), -(6.0 * mu + 2.0 * lambda), 0.0]
                }),
                traction: Arc::new(zero_vec),
                dirichlet: u,
                reference_tip: None,
            }
        }
        CaseName::Tc2 | CaseName::Tc3Mixed => {
            // tc2 adds the lambda^{-1} (x, y) pressure mode; tc3_mixed is the
            // divergence-free trigonometric part with a Neumann side
            let with_linear = name == CaseName::Tc2;
            let lin = if with_linear { 1.0 / lambda } else { 0.0 };
            let u: VectorFn = Arc::new(move |p: &Point| {
                let (x, y) = (p[0], p[1]);
                [
                    x.sin() * y.sin() + lin * x,
                    x.cos() * y.cos() + lin * y,
                    0.0,
                ]
            });
            let grad: TensorFn = Arc::new(move |p: &Point| {
                let (x, y) = (p[0], p[1]);
                [
                    [x.cos() * y.sin() + lin, x.sin() * y.cos(), 0.0],
                    [-x.sin() * y.cos(), -x.cos() * y.sin() + lin, 0.0],
                    [0.0, 0.0, 0.0],
                ]
            });
            let g2 = grad.clone();
            let stress: TensorFn =
                Arc::new(move |p: &Point| stress_from_gradient(&g2(p), lambda, mu));
            let s2 = stress.clone();
            let boundary: BoundaryFn = if with_linear {
                Arc::new(|_: &Point| BoundaryTag::Dirichlet)
            } else {
                Arc::new(|p: &Point| {
                    if p[0].abs() < 1e-9 {
                        BoundaryTag::Dirichlet
                    } else {
                        BoundaryTag::Neumann
                    }
                })
            };
            // traction on the unit square: sigma n with the outward normal of
            // whichever side the point lies on
            let traction: VectorFn = Arc::new(move |p: &Point| {
                let n = unit_square_normal(p);
                let s = s2(p);
                apply_tensor(&s, &n)
            });
            AnalyticCase {
                name,
                dim: 2,
                domain: CaseDomain::Box(BoxDomain::unit_square()),
                material,
                boundary,
                displacement: Some(u.clone()),
                displacement_gradient: Some(grad),
                pressure: Some(Arc::new(move |_: &Point| if with_linear { 2.0 } else { 0.0 })),
                stress: Some(stress),
                body_force: Arc::new(move |p: &Point| {
                    let (x, y) = (p[0], p[1]);
                    [
                        2.0 * mu * x.sin() * y.sin(),
                        2.0 * mu * x.cos() * y.cos(),
                        0.0,
                    ]
                }),
                traction,
                dirichlet: u,
                reference_tip: None,
            }
        }
        CaseName::Tc3d1 => {
            let u: VectorFn = Arc::new(|p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                [x.sin() * y.cos(), x.cos() * y.sin(), (z - 0.5) * (z - 0.5)]
            });
            let grad: TensorFn = Arc::new(|p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                [
                    [x.cos() * y.cos(), -x.sin() * y.sin(), 0.0],
                    [-x.sin() * y.sin(), x.cos() * y.cos(), 0.0],
                    [0.0, 0.0, 2.0 * (z - 0.5)],
                ]
            });
            let g2 = grad.clone();
            AnalyticCase {
                name,
                dim: 3,
                domain: CaseDomain::Box(BoxDomain::unit_cube()),
                material,
                boundary: all_dirichlet,
                displacement: Some(u.clone()),
                displacement_gradient: Some(grad),
                pressure: Some(Arc::new(move |p: &Point| {
                    lambda * (2.0 * p[0].cos() * p[1].cos() + 2.0 * (p[2] - 0.5))
                })),
                stress: Some(Arc::new(move |p: &Point| {
                    stress_from_gradient(&g2(p), lambda, mu)
                })),
                body_force: Arc::new(move |p: &Point| {
                    let c = 4.0 * mu + 2.0 * lambda;
                    [
                        c * p[0].sin() * p[1].cos(),
                        c * p[0].cos() * p[1].sin(),
                        -c,
                    ]
                }),
                traction: Arc::new(zero_vec),
                dirichlet: u,
                reference_tip: None,
            }
        }
        CaseName::Tc3d2 => {
            // cubic field whose coefficients carry the case's own mu
            let m = mu;
            let u: VectorFn = Arc::new(move |p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                [
                    -x * y * z,
                    3.0 * m * z * (x * x - y * y) - z * z * z,
                    3.0 * y * z * z + m * y * (y * y - 3.0 * x * x),
                ]
            });
            let grad: TensorFn = Arc::new(move |p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                [
                    [-y * z, -x * z, -x * y],
                    [
                        6.0 * m * z * x,
                        -6.0 * m * z * y,
                        3.0 * m * (x * x - y * y) - 3.0 * z * z,
                    ],
                    [
                        -6.0 * m * x * y,
                        3.0 * z * z + 3.0 * m * (y * y - x * x),
                        6.0 * y * z,
                    ],
                ]
            });
            let g2 = grad.clone();
            AnalyticCase {
                name,
                dim: 3,
                domain: CaseDomain::Box(BoxDomain::unit_cube()),
                material,
                boundary: all_dirichlet,
                displacement: Some(u.clone()),
                displacement_gradient: Some(grad),
                pressure: Some(Arc::new(move |p: &Point| {
                    lambda * (5.0 - 6.0 * m) * p[1] * p[2]
                })),
                stress: Some(Arc::new(move |p: &Point| {
                    stress_from_gradient(&g2(p), lambda, mu)
                })),
                body_force: Arc::new(move |p: &Point| {
                    let c = (lambda + mu) * (5.0 - 6.0 * m);
                    [0.0, p[2] * (6.0 * mu - c), -p[1] * (6.0 * mu + c)]
                }),
                traction: Arc::new(zero_vec),
                dirichlet: u,
                reference_tip: None,
            }
        }
        CaseName::Cook => AnalyticCase {
            name,
            dim: 2,
            domain: CaseDomain::CookQuad,
            material,
            boundary: Arc::new(|p: &Point| {
                if p[0].abs() < 1e-9 {
                    BoundaryTag::Dirichlet
                } else {
                    BoundaryTag::Neumann
                }
            }),
            displacement: None,
            displacement_gradient: None,
            pressure: None,
            stress: None,
            body_force: Arc::new(zero_vec),
            traction: Arc::new(|p: &Point| {
                if (p[0] - 48.0).abs() < 1e-6 {
                    [0.0, 1.0 / 16.0, 0.0]
                } else {
                    [0.0; 3]
                }
            }),
            dirichlet: Arc::new(zero_vec),
            reference_tip: Some(16.442),
        },
        CaseName::ShearBeam => {
            let f_load = 0.1;
            let length = 10.0;
            let e_mod = material.youngs;
            let nu_val = material.poisson;
            let series = Arc::new(BeamSeries::new(f_load, nu_val));
            let s1 = series.clone();
            let u: VectorFn = Arc::new(move |p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                [
                    -3.0 * f_load * nu_val / (4.0 * e_mod) * x * y * z,
                    f_load / (8.0 * e_mod) * (3.0 * nu_val * z * (x * x - y * y) - z * z * z),
                    f_load / (8.0 * e_mod)
                        * (3.0 * y * z * z + nu_val * y * (y * y - 3.0 * x * x))
                        + 2.0 * (1.0 + nu_val) / e_mod * s1.psi(x, y),
                ]
            });
            let s2 = series.clone();
            let grad: TensorFn = Arc::new(move |p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                let a = f_load / (8.0 * e_mod);
                let b = 2.0 * (1.0 + nu_val) / e_mod;
                [
                    [
                        -3.0 * f_load * nu_val / (4.0 * e_mod) * y * z,
                        -3.0 * f_load * nu_val / (4.0 * e_mod) * x * z,
                        -3.0 * f_load * nu_val / (4.0 * e_mod) * x * y,
                    ],
                    [
                        a * 6.0 * nu_val * z * x,
                        -a * 6.0 * nu_val * z * y,
                        a * (3.0 * nu_val * (x * x - y * y) - 3.0 * z * z),
                    ],
                    [
                        a * (-6.0 * nu_val * x * y) + b * s2.psi_x(x, y),
                        a * (3.0 * z * z + 3.0 * nu_val * (y * y - x * x)) + b * s2.psi_y(x, y),
                        a * 6.0 * y * z,
                    ],
                ]
            });
            let s3 = series.clone();
            let stress: TensorFn = Arc::new(move |p: &Point| {
                let (x, y, z) = (p[0], p[1], p[2]);
                let s31 = s3.sigma31(x, y);
                let s23 = s3.sigma23(x, y);
                let s33 = 0.75 * f_load * y * z;
                [
                    [0.0, 0.0, s31],
                    [0.0, 0.0, s23],
                    [s31, s23, s33],
                ]
            });
            AnalyticCase {
                name,
                dim: 3,
                domain: CaseDomain::Box(BoxDomain::new_3d(
                    [-1.0, -1.0, 0.0],
                    [1.0, 1.0, length],
                )),
                material,
                boundary: Arc::new(|p: &Point| {
                    if p[2].abs() < 1e-9 {
                        BoundaryTag::Neumann
                    } else {
                        BoundaryTag::Dirichlet
                    }
                }),
                displacement: Some(u.clone()),
                displacement_gradient: Some(grad),
                // lambda div(u) collapses to a lambda-free expression here
                pressure: Some(Arc::new(move |p: &Point| {
                    3.0 * f_load * nu_val * p[1] * p[2] / (4.0 * (1.0 + nu_val))
                })),
                stress: Some(stress),
                body_force: Arc::new(zero_vec),
                traction: Arc::new(move |_: &Point| [0.0, f_load, 0.0]),
                dirichlet: u,
                reference_tip: None,
            }
        }
    };
    Ok(case)
}

fn unit_square_normal(p: &Point) -> Point {
    let tol = 1e-9;
    if p[1].abs() < tol {
        [0.0, -1.0, 0.0]
    } else if (p[1] - 1.0).abs() < tol {
        [0.0, 1.0, 0.0]
    } else if p[0].abs() < tol {
        [-1.0, 0.0, 0.0]
    } else {
        [1.0, 0.0, 0.0]
    }
}

fn apply_tensor(s: &[[f64; 3]; 3], n: &Point) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += s[i][j] * n[j];
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ConsistencyFailure {
    pub point: Point,
    pub check: String,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    /// False when the case ships no exact fields (Cook benchmark).
    pub applicable: bool,
    pub samples: usize,
    pub max_stress_residual: f64,
    pub max_equilibrium_residual: f64,
    pub failures: Vec<ConsistencyFailure>,
}

impl ConsistencyReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

const FD_STEP: f64 = 1e-5;
const STRESS_TOL: f64 = 1e-6;
const EQUILIBRIUM_TOL: f64 = 1e-5;

fn fd_gradient(f: &VectorFn, x: &Point, dim: usize) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for j in 0..dim {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += FD_STEP;
        xm[j] -= FD_STEP;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..3 {
            g[i][j] = (fp[i] - fm[i]) / (2.0 * FD_STEP);
        }
    }
    g
}

fn fd_stress_divergence(s: &TensorFn, x: &Point, dim: usize) -> [f64; 3] {
    let mut div = [0.0; 3];
    for j in 0..dim {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += FD_STEP;
        xm[j] -= FD_STEP;
        let sp = s(&xp);
        let sm = s(&xm);
        for i in 0..3 {
            div[i] += (sp[i][j] - sm[i][j]) / (2.0 * FD_STEP);
        }
    }
    div
}

/// Checks, at `samples` random interior points, that the case's stress equals
/// the constitutive stress of its displacement (tolerance 1e-6) and that the
/// body force balances the stress divergence (tolerance 1e-5), both via
/// central finite differences.
pub fn verify_case_consistency(case: &AnalyticCase, samples: usize, seed: u64) -> ConsistencyReport {
    let (u, stress) = match (&case.displacement, &case.stress) {
        (Some(u), Some(s)) => (u.clone(), s.clone()),
        _ => {
            return ConsistencyReport {
                applicable: false,
                samples: 0,
                max_stress_residual: 0.0,
                max_equilibrium_residual: 0.0,
                failures: Vec::new(),
            }
        }
    };
    let domain = match case.domain {
        CaseDomain::Box(b) => b,
        CaseDomain::CookQuad => unreachable!("cook ships no exact fields"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConsistencyReport {
        applicable: true,
        samples,
        max_stress_residual: 0.0,
        max_equilibrium_residual: 0.0,
        failures: Vec::new(),
    };
    let (lambda, mu) = (case.material.lambda, case.material.mu);
    for _ in 0..samples {
        let mut p = [0.0; 3];
        for k in 0..case.dim {
            let margin = (1e-3 * domain.extent(k)).max(4.0 * FD_STEP);
            p[k] = rng.gen_range(domain.lo[k] + margin..domain.hi[k] - margin);
        }
        let g = fd_gradient(&u, &p, case.dim);
        let s_fd = stress_from_gradient(&g, lambda, mu);
        let s_case = stress(&p);
        let mut stress_dev = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                stress_dev = stress_dev.max((s_case[i][j] - s_fd[i][j]).abs());
            }
        }
        report.max_stress_residual = report.max_stress_residual.max(stress_dev);
        if stress_dev > STRESS_TOL {
            report.failures.push(ConsistencyFailure {
                point: p,
                check: "stress-constitutive".to_string(),
                residual: stress_dev,
            });
        }
        let div = fd_stress_divergence(&stress, &p, case.dim);
        let f = (case.body_force)(&p);
        let mut eq_dev = 0.0f64;
        for i in 0..3 {
            eq_dev = eq_dev.max((f[i] + div[i]).abs());
        }
        report.max_equilibrium_residual = report.max_equilibrium_residual.max(eq_dev);
        if eq_dev > EQUILIBRIUM_TOL {
            report.failures.push(ConsistencyFailure {
                point: p,
                check: "equilibrium".to_string(),
                residual: eq_dev,
            });
        }
    }
    report
}
