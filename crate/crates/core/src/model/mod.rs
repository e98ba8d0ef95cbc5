//! Physical constants, equation of state, pressure-gradient decomposition and
//! the scaling between physical and dimensionless scenarios.

mod config;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{self, advect_scalar, grad, Point2, ScalarExpr, VectorFieldSpec};

pub use config::{ConfigError, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("gas temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("constant `{name}` = {value} violates {requirement}")]
    InvalidConstant {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("window [{xmin}, {xmax}] x [{ymin}, {ymax}] must have positive finite area")]
    InvalidWindow { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
}

/// Equation-of-state family, `p = rho (beta T + delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluidKind {
    /// Ideal gas with specific gas constant `r` (J kg^-1 K^-1).
    Gas { r: f64 },
    /// Liquid with `p = rho (sigma T + gamma)`.
    Liquid { sigma: f64, gamma: f64 },
}

impl FluidKind {
    pub fn beta(&self) -> f64 {
        match *self {
            FluidKind::Gas { r } => r,
            FluidKind::Liquid { sigma, .. } => sigma,
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            FluidKind::Gas { .. } => 0.0,
            FluidKind::Liquid { gamma, .. } => gamma,
        }
    }
}

pub fn pressure_from_state(rho: f64, temperature: f64, kind: FluidKind) -> Result<f64, ModelError> {
    if !(rho > 0.0) {
        return Err(ModelError::NonPositiveDensity(rho));
    }
    if matches!(kind, FluidKind::Gas { .. }) && !(temperature > 0.0) {
        return Err(ModelError::NonPositiveTemperature(temperature));
    }
    Ok(rho * (kind.beta() * temperature + kind.delta()))
}

/// `-beta T grad(phi) - beta grad(T) - delta grad(phi)` with `phi = ln rho`.
pub fn pressure_gradient_decomposition(
    temperature: &ScalarExpr,
    phi: &ScalarExpr,
    beta: f64,
    delta: f64,
) -> VectorFieldSpec {
    let grad_phi = grad(phi);
    let grad_t = grad(temperature);
    let thermal = grad_phi.map(|g| -beta * (temperature * g));
    thermal
        .add(&grad_t.scale(-beta))
        .add(&grad_phi.scale(-delta))
}

/// Mass-conservation residual in log-density form, `phi_t + (u.grad) phi + div u`.
pub fn phi_transport_residual(u: &VectorFieldSpec, phi: &ScalarExpr, phi_t: &ScalarExpr) -> ScalarExpr {
    phi_t + &advect_scalar(u, phi) + fields::div(u)
}

/// Physical constants as they enter the reduced heat-coupled model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub mu: f64,
    pub kappa: f64,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub theta: f64,
}

impl Constants {
    /// Unit reference scales; `beta` and `kappa` carry the dimensionless groups.
    pub fn unit_scales(k: f64, inv_pr: f64) -> Self {
        Self {
            mu: 1.0,
            kappa: inv_pr,
            beta: k,
            delta: 0.0,
            length: 1.0,
            theta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks: [(&'static str, f64, bool, &'static str); 6] = [
            ("mu", self.mu, self.mu > 0.0, "mu > 0"),
            ("kappa", self.kappa, self.kappa >= 0.0, "kappa >= 0"),
            ("L", self.length, self.length > 0.0, "L > 0"),
            ("theta", self.theta, self.theta > 0.0, "theta > 0"),
            ("beta", self.beta, self.beta.is_finite(), "finite beta"),
            ("delta", self.delta, self.delta.is_finite(), "finite delta"),
        ];
        for (name, value, ok, requirement) in checks {
            if !ok || !value.is_finite() {
                return Err(ModelError::InvalidConstant { name, value, requirement });
            }
        }
        Ok(())
    }

    /// Thermal forcing group `L^2 beta theta / mu^2`.
    pub fn thermal_group(&self) -> f64 {
        self.length * self.length * self.beta * self.theta / (self.mu * self.mu)
    }

    pub fn inverse_prandtl(&self) -> f64 {
        self.kappa / self.mu
    }

    /// Dimensional time `(L^2 / mu) t`.
    pub fn time_scale(&self) -> f64 {
        self.length * self.length / self.mu
    }
}

/// Axis-aligned analysis rectangle in dimensionless coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, ModelError> {
        let w = Self { xmin, xmax, ymin, ymax };
        w.validate()?;
        Ok(w)
    }

    pub fn square(half: f64) -> Self {
        Self { xmin: -half, xmax: half, ymin: -half, ymax: half }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax].iter().all(|v| v.is_finite());
        if finite && self.xmax > self.xmin && self.ymax > self.ymin {
            Ok(())
        } else {
            Err(ModelError::InvalidWindow {
                xmin: self.xmin,
                xmax: self.xmax,
                ymin: self.ymin,
                ymax: self.ymax,
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.xmin >= self.xmin && other.xmax <= self.xmax && other.ymin >= self.ymin && other.ymax <= self.ymax
    }

    /// Window grown by `frac` of its size on every side.
    pub fn expanded(&self, frac: f64) -> Window {
        let dx = frac * self.width();
        let dy = frac * self.height();
        Window {
            xmin: self.xmin - dx,
            xmax: self.xmax + dx,
            ymin: self.ymin - dy,
            ymax: self.ymax + dy,
        }
    }

    /// `n x n` nodes including the edges, row by row.
    pub fn sample_grid(&self, n: usize) -> Vec<Point2> {
        assert!(n >= 2, "sample grid needs at least 2 nodes per side");
        let step = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| [step(self.xmin, self.xmax, i), step(self.ymin, self.ymax, j)])
            .collect()
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::square(2.0)
    }
}

/// The t = 0 data of the reduced model: velocity, temperature, force, heat source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialFields {
    pub psi: VectorFieldSpec,
    pub temp0: ScalarExpr,
    pub force0: VectorFieldSpec,
    pub heat_source: ScalarExpr,
}

impl InitialFields {
    fn rescaled(&self, length: f64, velocity: f64, temperature: f64, force: f64, heat: f64) -> Self {
        let arg = |e: &ScalarExpr, s: f64| s * e.rescale_args(length);
        Self {
            psi: self.psi.map(|c| arg(c, velocity)),
            temp0: arg(&self.temp0, temperature),
            force0: self.force0.map(|c| arg(c, force)),
            heat_source: arg(&self.heat_source, heat),
        }
    }
}

/// A physical scenario: fields over dimensional coordinates plus constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub fields: InitialFields,
    pub constants: Constants,
    /// Analysis window in dimensionless coordinates.
    pub window: Window,
}

impl Scenario {
    pub fn new(fields: InitialFields, constants: Constants, window: Window) -> Result<Self, ModelError> {
        constants.validate()?;
        window.validate()?;
        Ok(Self { fields, constants, window })
    }
}

/// Dimensionless scenario of the scaled model; `k` multiplies `grad T` in the
/// momentum equation and `inv_pr` (kappa / mu) the temperature Laplacian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionlessScenario {
    pub fields: InitialFields,
    #[serde(rename = "K")]
    pub k: f64,
    pub inv_pr: f64,
    pub window: Window,
    /// Constants the scenario was scaled with; unit scales when built directly.
    pub reference: Constants,
}

impl DimensionlessScenario {
    /// Builds a scenario directly in dimensionless form (unit reference scales).
    pub fn from_groups(fields: InitialFields, k: f64, inv_pr: f64, window: Window) -> Result<Self, ModelError> {
        let reference = Constants::unit_scales(k, inv_pr);
        reference.validate()?;
        window.validate()?;
        Ok(Self { fields, k, inv_pr, window, reference })
    }
}

/// `x = L x'`, `t = (L^2/mu) t'`, `u = (mu/L) u'`, `T = theta T'`,
/// `F = (mu^2/L^3) F'`, `Q = (mu theta / L^2) Q'`.
pub fn nondimensionalize(s: &Scenario) -> DimensionlessScenario {
    let c = &s.constants;
    let (l, mu, theta) = (c.length, c.mu, c.theta);
    DimensionlessScenario {
        fields: s.fields.rescaled(l, l / mu, 1.0 / theta, l.powi(3) / (mu * mu), l * l / (mu * theta)),
        k: c.thermal_group(),
        inv_pr: c.inverse_prandtl(),
        window: s.window,
        reference: *c,
    }
}

/// Inverse of [`nondimensionalize`], using the stored reference constants.
pub fn redimensionalize(ds: &DimensionlessScenario) -> Scenario {
    let c = &ds.reference;
    let (l, mu, theta) = (c.length, c.mu, c.theta);
    Scenario {
        fields: ds
            .fields
            .rescaled(1.0 / l, mu / l, theta, mu * mu / l.powi(3), mu * theta / (l * l)),
        constants: *c,
        window: ds.window,
    }
}

/// Dimensional time and position of a dimensionless event: `(L^2/mu) t0`, `L x`.
pub fn dimensionalize(t0: f64, x_bar: Point2, constants: &Constants) -> (f64, Point2) {
    (constants.time_scale() * t0, [constants.length * x_bar[0], constants.length * x_bar[1]])
}
