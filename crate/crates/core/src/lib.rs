//! Censoring-aware survival modeling toolkit.
//!
//! From-scratch decision trees, random forests, AdaBoost, gradient boosting
//! and a second-order tree booster, all able to work on exposure-weighted
//! pseudo data tables derived from right-censored survival data, alongside
//! classical estimators (Kaplan-Meier, Nelson-Aalen, Cox), censoring-
//! corrected metrics, model-agnostic interpretation tools and a simple
//! term-life pricing routine.

pub mod curves;
pub mod data;
pub mod error;
pub mod estimators;
pub mod optim;
pub mod rng;
pub mod trees;

pub use curves::{CumHazardCurve, SurvivalCurve};
pub use data::{
    aggregate_exposures, exposure_expansion, load_survival_table, one_hot_encode,
    stratified_split, Column, ColumnKind, EncodedMatrix, PseudoTable, Schema, SurvivalTable,
};
pub use error::{Error, Result};
pub use rng::SplitRng;
