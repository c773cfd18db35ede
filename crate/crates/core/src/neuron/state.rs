// SPDX-License-Identifier: Apache-2.0

use crate::fixed::{Fixed, QFormat};
use crate::isa::{ParamReg, WorkReg};
use serde::{Deserialize, Serialize};

/// Index names for the `s` bank.
pub const V: usize = 0;
pub const G: usize = 1;
pub const I: usize = 2;
pub const H: usize = 3;
pub const V_ADP: usize = 4;
pub const V_TH: usize = 5;

/// Index names for the `ls` bank.
pub const X0: usize = 0;
pub const X1: usize = 1;
pub const X2: usize = 2;
pub const Y0: usize = 3;
pub const Y1: usize = 4;
pub const Y2: usize = 5;
pub const R0: usize = 6;
pub const R1: usize = 7;
pub const R2: usize = 8;

/// Per-logical-neuron register file as held in neuron-state memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NeuronRecord {
    pub s: [Fixed; 6],
    pub ls: [Fixed; 9],
    pub tr: [Fixed; 8],
    /// Weight of the synapse in context (learning runs only).
    pub w: Fixed,
    pub v0: Fixed,
    /// Sign of the last comparison: -1, 0 or 1.
    pub flag: i8,
}

impl NeuronRecord {
    pub fn read(&self, r: WorkReg, format: QFormat) -> Fixed {
        match r.id() {
            id @ 0..=7 => self.tr[id as usize],
            id @ 8..=13 => self.s[(id - 8) as usize],
            id @ 14..=22 => self.ls[(id - 14) as usize],
            23 => self.w,
            24 => self.v0,
            _ => format.from_int(self.flag as i32),
        }
    }

    pub fn write(&mut self, r: WorkReg, value: Fixed) {
        match r.id() {
            id @ 0..=7 => self.tr[id as usize] = value,
            id @ 8..=13 => self.s[(id - 8) as usize] = value,
            id @ 14..=22 => self.ls[(id - 14) as usize] = value,
            23 => self.w = value,
            24 => self.v0 = value,
            _ => self.flag = value.0.signum() as i8,
        }
    }
}

/// Per-core parameter memory (and the working bank loaded from it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ParameterBank {
    pub ip: [Fixed; 9],
    pub ic: [Fixed; 3],
    pub lp: [Fixed; 8],
    pub lc: [Fixed; 8],
}

impl ParameterBank {
    pub fn get(&self, p: ParamReg) -> Fixed {
        match p.id() {
            id @ 0..=8 => self.ip[id as usize],
            id @ 9..=11 => self.ic[(id - 9) as usize],
            id @ 12..=19 => self.lp[(id - 12) as usize],
            id => self.lc[(id - 20) as usize],
        }
    }

    pub fn set(&mut self, p: ParamReg, value: Fixed) {
        match p.id() {
            id @ 0..=8 => self.ip[id as usize] = value,
            id @ 9..=11 => self.ic[(id - 9) as usize] = value,
            id @ 12..=19 => self.lp[(id - 12) as usize] = value,
            id => self.lc[(id - 20) as usize] = value,
        }
    }
}

pub const EXP_LUT_LEN: usize = 64;

/// 64-entry exponential table over `[x_min, x_max]`; lookups pick the
/// nearest entry and clamp outside the domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpLut {
    pub x_min: Fixed,
    pub x_max: Fixed,
    pub entries: Vec<Fixed>,
}

impl ExpLut {
    /// Table of `scale * exp(x)` sampled uniformly over `[x_min, x_max]`.
    pub fn new(format: QFormat, x_min: f64, x_max: f64, scale: f64) -> ExpLut {
        assert!(x_max > x_min);
        let lo = format.from_f64_saturating(x_min);
        let hi = format.from_f64_saturating(x_max);
        let entries = (0..EXP_LUT_LEN)
            .map(|i| {
                let x = format.to_f64(lo) + (format.to_f64(hi) - format.to_f64(lo)) * i as f64 / (EXP_LUT_LEN - 1) as f64;
                format.from_f64_saturating(scale * x.exp())
            })
            .collect();
        ExpLut { x_min: lo, x_max: hi, entries }
    }

    /// Entry index for `x` and whether `x` fell outside the domain.
    pub fn index(&self, x: Fixed) -> (usize, bool) {
        let span = self.x_max.0 as i64 - self.x_min.0 as i64;
        let off = x.0 as i64 - self.x_min.0 as i64;
        if off < 0 {
            return (0, true);
        }
        if off > span {
            return (EXP_LUT_LEN - 1, true);
        }
        let last = (EXP_LUT_LEN - 1) as i64;
        let idx = (off * last + span / 2) / span.max(1);
        (idx.clamp(0, last) as usize, false)
    }

    pub fn lookup(&self, x: Fixed) -> (Fixed, bool) {
        let (i, clamped) = self.index(x);
        (self.entries[i], clamped)
    }

    /// Input value of entry `i`.
    pub fn sample_x(&self, format: QFormat, i: usize) -> f64 {
        let lo = format.to_f64(self.x_min);
        let hi = format.to_f64(self.x_max);
        lo + (hi - lo) * i as f64 / (EXP_LUT_LEN - 1) as f64
    }
}

impl Default for ExpLut {
    fn default() -> Self {
        ExpLut::new(QFormat::Q8_8, -4.0, 4.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lut_nearest_and_clamp() {
        let q = QFormat::Q8_8;
        let lut = ExpLut::new(q, -2.0, 2.0, 1.0);
        let (y, c) = lut.lookup(q.from_f64(0.0).unwrap());
        assert!(!c);
        assert!((q.to_f64(y) - 1.0).abs() < 0.08);
        let (_, c) = lut.lookup(q.from_f64(3.0).unwrap());
        assert!(c);
        assert_eq!(lut.index(q.from_f64(-5.0).unwrap()), (0, true));
    }

    #[test]
    fn flag_register_reads_as_integer() {
        let mut r = NeuronRecord::default();
        r.write(WorkReg::FLAG, Fixed(-7));
        assert_eq!(r.flag, -1);
        assert_eq!(r.read(WorkReg::FLAG, QFormat::Q8_8), Fixed(-256));
    }
}
