// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Power model coefficients. Powers in pW (pJ/s), `p_s` in pJ per SOP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCoefficients {
    pub p_i: f64,
    pub p_b: f64,
    pub p_n: f64,
    pub p_s: f64,
}

pub const DEFAULT_PJ_PER_SOP: f64 = 5.47;

impl Default for EnergyCoefficients {
    fn default() -> Self {
        EnergyCoefficients { p_i: 0.0, p_b: 0.0, p_n: 0.0, p_s: DEFAULT_PJ_PER_SOP }
    }
}

impl EnergyCoefficients {
    pub fn is_valid(&self) -> bool {
        [self.p_i, self.p_b, self.p_n, self.p_s].iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

impl FromStr for EnergyCoefficients {
    type Err = String;

    /// `"PI,PB,PN,PS"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad coefficient {x:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [p_i, p_b, p_n, p_s] = v[..] else {
            return Err(format!("expected 4 coefficients, got {}", v.len()));
        };
        let c = EnergyCoefficients { p_i, p_b, p_n, p_s };
        if !c.is_valid() {
            return Err("coefficients must be finite and non-negative".into());
        }
        Ok(c)
    }
}

/// `P_I + P_B + P_N*n + P_S*s`.
pub fn total_power(c: &EnergyCoefficients, n: u64, s: f64) -> f64 {
    c.p_i + c.p_b + c.p_n * n as f64 + c.p_s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub neurons: u64,
    pub sops: u64,
    pub duration_s: f64,
    /// Average power with `s` taken as the SOP rate.
    pub power_pw: f64,
    pub energy_pj: f64,
    /// Energy added by one more SOP.
    pub marginal_pj_per_sop: f64,
}

/// Energy of a run with `n` active neurons and `sops` synaptic operations
/// spread over `duration_s` seconds.
pub fn estimate_energy(c: &EnergyCoefficients, n: u64, sops: u64, duration_s: f64) -> EnergyReport {
    // integrating the power over the run: static part times duration plus
    // P_S per operation, so the marginal cost of one SOP is P_S exactly
    let static_pw = total_power(c, n, 0.0);
    let e = static_pw * duration_s.max(0.0) + c.p_s * sops as f64;
    EnergyReport {
        neurons: n,
        sops,
        duration_s,
        power_pw: if duration_s > 0.0 { e / duration_s } else { 0.0 },
        energy_pj: e,
        marginal_pj_per_sop: c.p_s,
    }
}
