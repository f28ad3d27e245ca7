//! Named benchmark systems with contraction bounds known in closed form.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{matrix_measure_inf, Matrix};
use crate::model::SystemModel;
use crate::region::Hyperbox;
use crate::scalar::{lit, Scalar};

/// Disturbance half-width used by every benchmark unless overridden.
pub const DEFAULT_DISTURBANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum Benchmark {
    /// `x' = -a x + d`.
    ScalarContracting { a: f64 },
    /// `x' = A x + d`.
    Linear2d { a: [[f64; 2]; 2] },
    /// `x' = -x^3 + d`.
    Cubic,
    /// `x1' = -c x1 + x2 + d1`, `x2' = -x1 - c x2 + m tanh(x2) + d2`.
    VanDerPolDamped { c: f64, m: f64 },
    /// `x' = a x + d` with `a > 0`.
    ScalarExpanding { a: f64 },
}

impl Benchmark {
    pub const NAMES: [&'static str; 5] = [
        "scalar-contracting",
        "linear-2d",
        "cubic",
        "vanderpol-damped",
        "scalar-expanding",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::ScalarContracting { .. } => "scalar-contracting",
            Benchmark::Linear2d { .. } => "linear-2d",
            Benchmark::Cubic => "cubic",
            Benchmark::VanDerPolDamped { .. } => "vanderpol-damped",
            Benchmark::ScalarExpanding { .. } => "scalar-expanding",
        }
    }

    /// Looks a benchmark up by name; `params` override the defaults.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let known: &[&str] = match name {
            "scalar-contracting" | "scalar-expanding" => &["a"],
            "linear-2d" => &["a11", "a12", "a21", "a22"],
            "cubic" => &[],
            "vanderpol-damped" => &["c", "m"],
            _ => return Err(Error::UnknownBenchmark(name.to_string())),
        };
        if let Some(bad) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParameter {
                name: "params",
                reason: format!("`{bad}` is not a parameter of {name}"),
            });
        }
        if let Some((k, _)) = params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "params",
                reason: format!("`{k}` must be finite"),
            });
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let bench = match name {
            "scalar-contracting" => Benchmark::ScalarContracting { a: get("a", 1.0) },
            "scalar-expanding" => {
                let a = get("a", 0.5);
                if !(a > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "a",
                        reason: "expanding rate must be positive".into(),
                    });
                }
                Benchmark::ScalarExpanding { a }
            }
            "linear-2d" => Benchmark::Linear2d {
                a: [[get("a11", -2.0), get("a12", 1.0)], [get("a21", 1.0), get("a22", -2.0)]],
            },
            "cubic" => Benchmark::Cubic,
            _ => {
                let m = get("m", 0.5);
                if m < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "m",
                        reason: "must be non-negative".into(),
                    });
                }
                Benchmark::VanDerPolDamped { c: get("c", 2.0), m }
            }
        };
        Ok(bench)
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Benchmark::Linear2d { .. } | Benchmark::VanDerPolDamped { .. } => 2,
            _ => 1,
        }
    }

    /// Upper bound on the matrix measure of the Jacobian, valid on all of
    /// `R^n x R^m` (not only on `K x D`).
    pub fn mu_bar(&self) -> f64 {
        match self {
            Benchmark::ScalarContracting { a } => -a,
            Benchmark::ScalarExpanding { a } => *a,
            Benchmark::Linear2d { a } => {
                let m = Matrix::from_rows(&[a[0].to_vec(), a[1].to_vec()]);
                matrix_measure_inf(&m).expect("square")
            }
            Benchmark::Cubic => 0.0,
            // Row sums: 1 - c and 1 - c + m sech^2(x2) <= 1 - c + m.
            Benchmark::VanDerPolDamped { c, m } => 1.0 - c + m,
        }
    }

    /// Default `K = [-1, 1]^n`.
    pub fn default_initial_set<T: Scalar>(&self) -> Hyperbox<T> {
        Hyperbox::ball(vec![T::zero(); self.state_dim()], T::one()).expect("valid box")
    }

    /// Default `D = [-0.05, 0.05]^n`.
    pub fn default_disturbance_set<T: Scalar>(&self) -> Hyperbox<T> {
        Hyperbox::ball(vec![T::zero(); self.state_dim()], lit(DEFAULT_DISTURBANCE)).expect("valid box")
    }

    /// Builds the model on the default sets.
    pub fn build<T: Scalar>(&self) -> Result<SystemModel<T>> {
        self.build_on(self.default_initial_set(), self.default_disturbance_set())
    }

    pub fn build_on<T: Scalar>(
        &self,
        initial_set: Hyperbox<T>,
        disturbance_set: Hyperbox<T>,
    ) -> Result<SystemModel<T>> {
        let name = self.name();
        let n = self.state_dim();
        match *self {
            Benchmark::ScalarContracting { a } | Benchmark::ScalarExpanding { a } => {
                let rate: T = if matches!(self, Benchmark::ScalarContracting { .. }) {
                    lit(-a)
                } else {
                    lit(a)
                };
                SystemModel::new(
                    name,
                    n,
                    n,
                    move |x, d, out| out[0] = rate * x[0] + d[0],
                    initial_set,
                    disturbance_set,
                )?
                .with_jacobian(move |_x, _d, j| j[(0, 0)] = rate)
            }
            Benchmark::Linear2d { a } => {
                let a: [[T; 2]; 2] = [[lit(a[0][0]), lit(a[0][1])], [lit(a[1][0]), lit(a[1][1])]];
                SystemModel::new(
                    name,
                    n,
                    n,
                    move |x, d, out| {
                        out[0] = a[0][0] * x[0] + a[0][1] * x[1] + d[0];
                        out[1] = a[1][0] * x[0] + a[1][1] * x[1] + d[1];
                    },
                    initial_set,
                    disturbance_set,
                )?
                .with_jacobian(move |_x, _d, j| {
                    for r in 0..2 {
                        for c in 0..2 {
                            j[(r, c)] = a[r][c];
                        }
                    }
                })
            }
            Benchmark::Cubic => SystemModel::new(
                name,
                n,
                n,
                |x: &[T], d: &[T], out: &mut [T]| out[0] = -x[0] * x[0] * x[0] + d[0],
                initial_set,
                disturbance_set,
            )?
            .with_jacobian(|x, _d, j| j[(0, 0)] = -lit::<T>(3.0) * x[0] * x[0]),
            Benchmark::VanDerPolDamped { c, m } => {
                let (c, m): (T, T) = (lit(c), lit(m));
                SystemModel::new(
                    name,
                    n,
                    n,
                    move |x, d, out| {
                        out[0] = -c * x[0] + x[1] + d[0];
                        out[1] = -x[0] - c * x[1] + m * x[1].tanh() + d[1];
                    },
                    initial_set,
                    disturbance_set,
                )?
                .with_jacobian(move |x, _d, j| {
                    let th = x[1].tanh();
                    j[(0, 0)] = -c;
                    j[(0, 1)] = T::one();
                    j[(1, 0)] = -T::one();
                    j[(1, 1)] = -c + m * (T::one() - th * th);
                })
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four benchmarks with default parameters.
pub fn standard_benchmarks() -> Vec<Benchmark> {
    ["scalar-contracting", "linear-2d", "cubic", "vanderpol-damped"]
        .iter()
        .map(|n| Benchmark::from_name(n, &BTreeMap::new()).expect("registered"))
        .collect()
}
