// SPDX-License-Identifier: Apache-2.0

pub mod analyzer;
pub mod fock;
pub mod keyrate;
pub mod protocol;
pub mod qubit;
pub mod scalar;
pub mod verify;
