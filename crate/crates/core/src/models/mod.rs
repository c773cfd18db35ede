// SPDX-License-Identifier: Apache-2.0

//! Reference dynamics, the program library and the energy model.

pub mod density;
pub mod energy;
pub mod oracle;
pub mod templates;

pub use energy::{estimate_energy, total_power, EnergyCoefficients, EnergyReport};
pub use templates::{template, ModelTemplate, SchemaEntry, Slot, TemplateKind};
