// SPDX-License-Identifier: Apache-2.0

use crate::fixed::{Fixed, QFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parameter {name} = {value} is outside [{min}, {max}] in Q{int}.{frac}")]
pub struct RangeError {
    pub name: String,
    pub value: f64,
    pub min: f64,
    pub max: f64,
    pub int: u8,
    pub frac: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QuantReport {
    /// `(name, value, quantized value, absolute error)`.
    pub entries: Vec<(String, f64, f64, f64)>,
    pub max_abs_error: f64,
}

impl QuantReport {
    pub fn merge(&mut self, other: QuantReport) {
        self.max_abs_error = self.max_abs_error.max(other.max_abs_error);
        self.entries.extend(other.entries);
    }
}

/// Round-to-nearest-even into `format`.
pub fn quantize_params(params: &[(String, f64)], format: QFormat) -> Result<(Vec<Fixed>, QuantReport), RangeError> {
    let mut out = Vec::with_capacity(params.len());
    let mut report = QuantReport::default();
    for (name, value) in params {
        let q = format.from_f64(*value).ok_or_else(|| RangeError {
            name: name.clone(),
            value: *value,
            min: format.min_value(),
            max: format.max_value(),
            int: 16 - format.frac_bits,
            frac: format.frac_bits,
        })?;
        let back = format.to_f64(q);
        let err = (back - value).abs();
        report.max_abs_error = report.max_abs_error.max(err);
        report.entries.push((name.clone(), *value, back, err));
        out.push(q);
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f64) -> Result<(Vec<Fixed>, QuantReport), RangeError> {
        quantize_params(&[("x".to_string(), v)], QFormat::Q8_8)
    }

    #[test]
    fn half_is_exact() {
        let (q, r) = one(0.5).unwrap();
        assert_eq!(q[0].raw(), 128);
        assert_eq!(r.max_abs_error, 0.0);
    }

    #[test]
    fn third_rounds_to_nearest() {
        let (q, r) = one(1.0 / 3.0).unwrap();
        assert_eq!(q[0].raw(), 85);
        assert!(r.max_abs_error <= 2f64.powi(-9));
        assert_eq!(r.max_abs_error, (1.0 / 3.0 - 85.0 / 256.0f64).abs());
    }

    #[test]
    fn out_of_range_names_parameter() {
        let e = one(200.0).unwrap_err();
        assert_eq!(e.name, "x");
        assert!((e.max - 127.996).abs() < 1e-3);
    }

    #[test]
    fn ties_go_to_even() {
        // 1.5 and 2.5 LSBs
        assert_eq!(one(1.5 / 256.0).unwrap().0[0].raw(), 2);
        assert_eq!(one(2.5 / 256.0).unwrap().0[0].raw(), 2);
    }
}
