//! Ideal-gas thermodynamics and transport laws.

use crate::ad::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ViscosityLaw {
    Sutherland { mu_ref: f64, t_ref: f64, c: f64 },
    /// `mu = 0.0906 T^1.5 / (T + 0.0001406)` in the nondimensional flat-plate units.
    FlatPlate,
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasProperties {
    pub r: f64,
    pub gamma: f64,
    pub pr: f64,
    pub viscosity: ViscosityLaw,
}

impl GasProperties {
    pub fn air() -> Self {
        Self {
            r: 287.0,
            gamma: 1.4,
            pr: 0.71,
            viscosity: ViscosityLaw::Sutherland {
                mu_ref: 21.7e-6,
                t_ref: 373.15,
                c: 120.0,
            },
        }
    }

    pub fn inviscid_air() -> Self {
        Self {
            viscosity: ViscosityLaw::Constant(0.0),
            ..Self::air()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !(self.gamma > 1.0) || !(self.pr > 0.0) {
            return Err(Error::Config(format!(
                "gas properties need R > 0, gamma > 1, Pr > 0 (got {}, {}, {})",
                self.r, self.gamma, self.pr
            )));
        }
        Ok(())
    }

    /// Specific heat at constant pressure, `gamma R / (gamma - 1)`.
    pub fn cp(&self) -> f64 {
        self.gamma * self.r / (self.gamma - 1.0)
    }

    pub fn is_inviscid(&self) -> bool {
        matches!(self.viscosity, ViscosityLaw::Constant(m) if m == 0.0)
    }

    /// Viscosity at temperature `t` for any scalar type (no positivity check).
    pub fn mu<T: Scalar>(&self, t: T) -> T {
        match self.viscosity {
            ViscosityLaw::Sutherland { mu_ref, t_ref, c } => {
                (t / t_ref).powf(1.5) * (mu_ref * (t_ref + c)) / (t + c)
            }
            ViscosityLaw::FlatPlate => t.powf(1.5) * 0.0906 / (t + 0.0001406),
            ViscosityLaw::Constant(m) => T::cst(m),
        }
    }

    pub fn kappa<T: Scalar>(&self, mu: T) -> T {
        mu * (self.cp() / self.pr)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveState {
    pub p: f64,
    pub u: Vec<f64>,
    pub t: f64,
}

impl PrimitiveState {
    pub fn new(p: f64, u: &[f64], t: f64) -> Self {
        Self { p, u: u.to_vec(), t }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.p > 0.0) || !(self.t > 0.0) {
            return Err(Error::NonPhysicalState(format!(
                "p = {}, T = {}",
                self.p, self.t
            )));
        }
        Ok(())
    }

    /// Packed as `(p, u_1..u_n, T)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.p];
        v.extend_from_slice(&self.u);
        v.push(self.t);
        v
    }

    pub fn from_slice(y: &[f64]) -> Self {
        let n = y.len();
        Self {
            p: y[0],
            u: y[1..n - 1].to_vec(),
            t: y[n - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub rho_u: Vec<f64>,
    pub rho_e: f64,
}

pub fn primitive_to_conserved(y: &PrimitiveState, g: &GasProperties) -> Result<ConservedState> {
    y.check()?;
    let rho = y.p / (g.r * y.t);
    Ok(ConservedState {
        rho,
        rho_u: y.u.iter().map(|u| rho * u).collect(),
        rho_e: y.p / (g.gamma - 1.0),
    })
}

pub fn conserved_to_primitive(c: &ConservedState, g: &GasProperties) -> Result<PrimitiveState> {
    if !(c.rho > 0.0) || !(c.rho_e > 0.0) {
        return Err(Error::NonPhysicalState(format!(
            "rho = {}, rho e = {}",
            c.rho, c.rho_e
        )));
    }
    let p = c.rho_e * (g.gamma - 1.0);
    Ok(PrimitiveState {
        p,
        u: c.rho_u.iter().map(|m| m / c.rho).collect(),
        t: p / (c.rho * g.r),
    })
}

pub fn speed_of_sound(y: &PrimitiveState, g: &GasProperties) -> Result<f64> {
    if !(y.t > 0.0) {
        return Err(Error::NonPhysicalState(format!("T = {}", y.t)));
    }
    Ok((g.gamma * g.r * y.t).sqrt())
}

pub fn viscosity(t: f64, g: &GasProperties) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPhysicalState(format!("T = {t}")));
    }
    Ok(g.mu(t))
}

pub fn thermal_conductivity(mu: f64, g: &GasProperties) -> f64 {
    g.kappa(mu)
}
