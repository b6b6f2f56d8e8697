//! Linearized governor-turbine-generator (GTG) plant.
//!
//! State evolves as
//!
//! ```text
//! dθ/dt      = ω0·ω
//! J·dω/dt    = P_T + e_T·a − P_G − D·ω
//! T_u·dP_T/dt = −P_T + K_t·a
//! T_a·da/dt  = −r·a − ω + ω_ref
//! ```
//!
//! with ω, P_T, a and P_G in per-unit on the plant's own base. Setting the
//! derivatives of the last three equations to zero gives the droop line
//! `ω = (1 − σD)·ω_ref − σ·P_G` with `σ = r / (r·D + K_t + e_T)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_NOMINAL_HZ: f64 = 60.0;
pub const DEFAULT_BASE_MW: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtgParams {
    /// Inertia, pu·s².
    pub j: f64,
    /// Damping, pu.
    pub d: f64,
    /// Turbine time constant, s.
    pub t_u: f64,
    /// Turbine control gain, pu.
    pub k_t: f64,
    /// Governor valve time constant, s.
    pub t_a: f64,
    /// Governor regulation constant, pu.
    pub r: f64,
    /// Valve-to-shaft coupling coefficient, pu. Usually zero.
    pub e_t: f64,
    /// Nominal angular frequency, rad/s.
    pub omega_0: f64,
    /// Power base used to express per-unit quantities in MW.
    pub base_mw: f64,
}

impl Default for GtgParams {
    fn default() -> Self {
        Self {
            j: 0.5,
            d: 1.5,
            t_u: 1.5,
            k_t: 1.0,
            t_a: 0.03,
            r: 0.3,
            e_t: 0.0,
            omega_0: 2.0 * PI * DEFAULT_NOMINAL_HZ,
            base_mw: DEFAULT_BASE_MW,
        }
    }
}

impl GtgParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.j > 0.0, "J must be positive"),
            (self.t_u > 0.0, "T_u must be positive"),
            (self.t_a > 0.0, "T_a must be positive"),
            (self.r > 0.0, "r must be positive"),
            (self.d >= 0.0, "D must be nonnegative"),
            (self.k_t > 0.0, "K_t must be positive"),
            (self.omega_0 > 0.0, "omega_0 must be positive"),
            (self.base_mw > 0.0, "power base must be positive"),
            (self.e_t.is_finite(), "e_T must be finite"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::DegenerateParams(msg.into()));
            }
        }
        Ok(())
    }

    pub fn nominal_hz(&self) -> f64 {
        self.omega_0 / (2.0 * PI)
    }

    /// Integration step used by [`settle`]: a twentieth of the fastest
    /// time constant.
    pub fn default_dt(&self) -> f64 {
        self.t_u.min(self.t_a) / 20.0
    }

    pub fn max_dt(&self) -> f64 {
        self.t_a / 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GtgState {
    pub theta_g: f64,
    pub omega_g: f64,
    pub p_t: f64,
    pub a: f64,
}

impl GtgState {
    fn is_finite(&self) -> bool {
        self.theta_g.is_finite() && self.omega_g.is_finite() && self.p_t.is_finite() && self.a.is_finite()
    }

    fn axpy(&self, h: f64, k: &GtgState) -> GtgState {
        GtgState {
            theta_g: self.theta_g + h * k.theta_g,
            omega_g: self.omega_g + h * k.omega_g,
            p_t: self.p_t + h * k.p_t,
            a: self.a + h * k.a,
        }
    }
}

/// Steady-state droop of a single plant, per-unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantDroop {
    pub sigma: f64,
    pub alpha: f64,
}

pub fn analytic_droop(p: &GtgParams) -> Result<PlantDroop> {
    let stiffness = p.r * p.d + p.k_t + p.e_t;
    if !(stiffness > 0.0) || !p.r.is_finite() {
        return Err(Error::DegenerateParams(format!(
            "r·D + K_t + e_T = {stiffness} must be positive"
        )));
    }
    let sigma = p.r / stiffness;
    Ok(PlantDroop {
        sigma,
        alpha: 1.0 - sigma * p.d,
    })
}

/// Equilibrium of the valve, turbine and rotor-speed states for constant
/// set point and electrical load. The rotor angle is left at zero since it
/// drifts whenever the settled speed deviation is nonzero.
pub fn equilibrium(p: &GtgParams, omega_ref: f64, p_elec: f64) -> Result<GtgState> {
    p.validate()?;
    let droop = analytic_droop(p)?;
    let omega_g = droop.alpha * omega_ref - droop.sigma * p_elec;
    let a = (omega_ref - omega_g) / p.r;
    Ok(GtgState {
        theta_g: 0.0,
        omega_g,
        p_t: p.k_t * a,
        a,
    })
}

fn derivative(s: &GtgState, p: &GtgParams, omega_ref: f64, p_elec: f64) -> GtgState {
    GtgState {
        theta_g: p.omega_0 * s.omega_g,
        omega_g: (s.p_t + p.e_t * s.a - p_elec - p.d * s.omega_g) / p.j,
        p_t: (-s.p_t + p.k_t * s.a) / p.t_u,
        a: (-p.r * s.a - s.omega_g + omega_ref) / p.t_a,
    }
}

/// One classical fourth-order Runge-Kutta step of length `dt` seconds.
pub fn step_gtg(
    state: &GtgState,
    p: &GtgParams,
    omega_ref: f64,
    p_elec: f64,
    dt: f64,
) -> Result<GtgState> {
    p.validate()?;
    if !(dt > 0.0) || dt > p.max_dt() {
        return Err(Error::StepTooLarge { dt, max: p.max_dt() });
    }
    let k1 = derivative(state, p, omega_ref, p_elec);
    let k2 = derivative(&state.axpy(dt / 2.0, &k1), p, omega_ref, p_elec);
    let k3 = derivative(&state.axpy(dt / 2.0, &k2), p, omega_ref, p_elec);
    let k4 = derivative(&state.axpy(dt, &k3), p, omega_ref, p_elec);
    let next = GtgState {
        theta_g: state.theta_g + dt / 6.0 * (k1.theta_g + 2.0 * k2.theta_g + 2.0 * k3.theta_g + k4.theta_g),
        omega_g: state.omega_g + dt / 6.0 * (k1.omega_g + 2.0 * k2.omega_g + 2.0 * k3.omega_g + k4.omega_g),
        p_t: state.p_t + dt / 6.0 * (k1.p_t + 2.0 * k2.p_t + 2.0 * k3.p_t + k4.p_t),
        a: state.a + dt / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
    };
    if !next.is_finite() {
        return Err(Error::NonFiniteState);
    }
    Ok(next)
}

/// Integrates from `state` for `duration` seconds with constant inputs
/// using the default step.
pub fn integrate(
    state: GtgState,
    p: &GtgParams,
    omega_ref: f64,
    p_elec: f64,
    duration: f64,
) -> Result<GtgState> {
    let dt = p.default_dt();
    let steps = (duration / dt).ceil() as usize;
    let mut s = state;
    for _ in 0..steps {
        s = step_gtg(&s, p, omega_ref, p_elec, dt)?;
    }
    Ok(s)
}

/// Simulated time after which a plant is considered settled.
pub fn settling_horizon(p: &GtgParams) -> f64 {
    50.0 * p.t_u.max(p.t_a)
}

/// Integrates from rest over [`settling_horizon`].
pub fn settle(p: &GtgParams, omega_ref: f64, p_elec: f64) -> Result<GtgState> {
    integrate(GtgState::default(), p, omega_ref, p_elec, settling_horizon(p))
}
