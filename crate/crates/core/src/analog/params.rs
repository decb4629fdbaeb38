use serde::{Deserialize, Serialize};

use crate::level::LogicLevel;

/// Pneumatic constants. Pressures are gauge pascals (vacuum negative),
/// resistances Pa·s/m³, capacitances m³/Pa, times seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogParams {
    pub p_vac: f64,
    pub r_pull: f64,
    pub r_on: f64,
    pub r_off: f64,
    pub c_node: f64,
    pub c_gate: f64,
    pub c_act: f64,
    pub p_open: f64,
    pub p_close: f64,
    pub v_ih: f64,
    pub v_il: f64,
    pub p_eng: f64,
    /// Integrator step.
    pub h: f64,
    /// Ramp time of stimulus sources between 0 and `p_vac`.
    pub slew: f64,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl Default for AnalogParams {
    fn default() -> Self {
        Self {
            p_vac: -80_000.0,
            r_pull: 1e9,
            r_on: 2e7,
            r_off: 1e14,
            c_node: 5e-11,
            c_gate: 1e-10,
            c_act: 5e-10,
            p_open: -45_000.0,
            p_close: -25_000.0,
            v_ih: -50_000.0,
            v_il: -15_000.0,
            p_eng: -40_000.0,
            h: 5e-4,
            slew: 1e-3,
            stride: 1,
        }
    }
}

pub const PARAM_KEYS: &[&str] = &[
    "p_vac", "r_pull", "r_on", "r_off", "c_node", "c_gate", "c_act", "p_open", "p_close",
    "v_ih", "v_il", "p_eng", "h", "slew", "stride",
];

impl AnalogParams {
    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "p_vac" => &mut self.p_vac,
            "r_pull" => &mut self.r_pull,
            "r_on" => &mut self.r_on,
            "r_off" => &mut self.r_off,
            "c_node" => &mut self.c_node,
            "c_gate" => &mut self.c_gate,
            "c_act" => &mut self.c_act,
            "p_open" => &mut self.p_open,
            "p_close" => &mut self.p_close,
            "v_ih" => &mut self.v_ih,
            "v_il" => &mut self.v_il,
            "p_eng" => &mut self.p_eng,
            "h" => &mut self.h,
            "slew" => &mut self.slew,
            _ => return None,
        })
    }

    /// Sets one parameter by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if key == "stride" {
            if value < 1.0 || value.fract() != 0.0 {
                return Err("stride must be a positive integer".into());
            }
            self.stride = value as usize;
            return Ok(());
        }
        *self
            .slot(key)
            .ok_or_else(|| format!("unknown parameter `{key}`"))? = value;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        if key == "stride" {
            return Some(self.stride as f64);
        }
        self.clone().slot(key).map(|v| *v)
    }

    /// Ordering and positivity constraints between the constants.
    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if !(self.p_vac < self.p_open && self.p_open < self.p_close && self.p_close < 0.0) {
            problems.push("need p_vac < p_open < p_close < 0");
        }
        if !(self.p_vac <= self.v_ih && self.v_ih < self.v_il && self.v_il <= 0.0) {
            problems.push("need p_vac <= v_ih < v_il <= 0");
        }
        if !(self.r_on < self.r_pull && self.r_pull < self.r_off) {
            problems.push("need r_on < r_pull < r_off");
        }
        let positive = [
            self.r_on, self.r_pull, self.r_off, self.c_node, self.c_gate, self.c_act, self.h,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            problems.push("resistances, capacitances and h must be positive");
        }
        if !(self.p_vac < self.p_eng && self.p_eng < 0.0) {
            problems.push("need p_vac < p_eng < 0");
        }
        if !(self.slew >= 0.0) {
            problems.push("slew must be non-negative");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }

    /// Thresholded logic level of a pressure.
    pub fn classify(&self, p: f64) -> LogicLevel {
        if p <= self.v_ih {
            LogicLevel::L1
        } else if p >= self.v_il {
            LogicLevel::L0
        } else {
            LogicLevel::LX
        }
    }

    /// Ideal source pressure for a logic level.
    pub fn level_pressure(&self, level: bool) -> f64 {
        if level {
            self.p_vac
        } else {
            0.0
        }
    }
}
