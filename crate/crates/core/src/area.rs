//! Aggregation of plant droops into a single balancing-area droop.
//!
//! Plants share one steady-state frequency, so summing each plant's droop
//! line solved for power gives `P = Σ (α_j ω_j_ref − ω) / σ_j`. The area
//! therefore has `β = Σ 1/σ_j`, `σ = 1/β`, damping `D = Σ D_j` and
//! `α = 1 − σ·D`, with all constants expressed in Hz and MW.

use crate::error::{Error, Result};
use crate::gtg::{analytic_droop, GtgParams};
use crate::timeseries::BiasValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberDroop {
    /// Per-unit droop on the plant's own base.
    pub sigma_pu: f64,
    pub alpha: f64,
    pub sigma_hz_per_mw: f64,
    pub damping_mw_per_hz: f64,
}

impl MemberDroop {
    pub fn beta_mw_per_hz(&self) -> f64 {
        1.0 / self.sigma_hz_per_mw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaDroop {
    /// Area droop constant, Hz/MW.
    pub sigma: f64,
    pub alpha: f64,
    /// Natural response, MW/Hz.
    pub beta: BiasValue,
    pub damping_mw_per_hz: f64,
    pub members: Vec<MemberDroop>,
}

impl AreaDroop {
    /// Area described directly by its bias and reference gain, without
    /// constituent plants.
    pub fn from_bias(beta_mw_per_hz: f64, alpha: f64) -> Result<Self> {
        if !(beta_mw_per_hz > 0.0) || !beta_mw_per_hz.is_finite() || !alpha.is_finite() {
            return Err(Error::DegenerateParams(format!(
                "area bias {beta_mw_per_hz} MW/Hz and alpha {alpha} must be finite with positive bias"
            )));
        }
        let sigma = 1.0 / beta_mw_per_hz;
        Ok(Self {
            sigma,
            alpha,
            beta: BiasValue::mw_per_hz(beta_mw_per_hz),
            damping_mw_per_hz: (1.0 - alpha) * beta_mw_per_hz,
            members: Vec::new(),
        })
    }

    pub fn member_sigmas(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.sigma_pu).collect()
    }

    /// `Σ 1/σ_j` over per-unit droops. Only meaningful when every member
    /// shares the same power base and nominal frequency.
    pub fn per_unit_beta(&self) -> f64 {
        self.members.iter().map(|m| 1.0 / m.sigma_pu).sum()
    }

    /// Aggregate set point for per-member set points `refs`, from
    /// `α·ω_ref = σ · Σ (α_j / σ_j)·ω_j_ref`.
    pub fn aggregate_reference(&self, refs: &[f64]) -> Result<f64> {
        if refs.len() != self.members.len() || refs.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} set points for {} members",
                refs.len(),
                self.members.len()
            )));
        }
        let weighted: f64 = self
            .members
            .iter()
            .zip(refs)
            .map(|(m, w)| m.alpha / m.sigma_hz_per_mw * w)
            .sum();
        Ok(self.sigma * weighted / self.alpha)
    }
}

pub fn aggregate_area(units: &[GtgParams]) -> Result<AreaDroop> {
    if units.is_empty() {
        return Err(Error::EmptyArea);
    }
    let mut members = Vec::with_capacity(units.len());
    for p in units {
        p.validate()?;
        let droop = analytic_droop(p)?;
        let f_nom = p.nominal_hz();
        members.push(MemberDroop {
            sigma_pu: droop.sigma,
            alpha: droop.alpha,
            sigma_hz_per_mw: droop.sigma * f_nom / p.base_mw,
            damping_mw_per_hz: p.d * p.base_mw / f_nom,
        });
    }
    let beta: f64 = members.iter().map(MemberDroop::beta_mw_per_hz).sum();
    let damping: f64 = members.iter().map(|m| m.damping_mw_per_hz).sum();
    let sigma = 1.0 / beta;
    Ok(AreaDroop {
        sigma,
        alpha: 1.0 - sigma * damping,
        beta: BiasValue::mw_per_hz(beta),
        damping_mw_per_hz: damping,
        members,
    })
}
