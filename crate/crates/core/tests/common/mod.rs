#![allow(dead_code)]

pub mod audit;
pub mod flat;
pub mod plans;
