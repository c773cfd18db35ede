// SPDX-License-Identifier: Apache-2.0

pub mod connectivity;
pub mod fixed;
pub mod isa;
pub mod mapper;
pub mod maze;
pub mod models;
pub mod neuron;
pub mod noc;
pub mod sim;
