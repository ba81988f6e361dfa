//! Nonparametric and semi-parametric survival estimators.

mod cox;
mod nonparametric;

pub use cox::{
    breslow_baseline, cox_fit, cox_log_likelihood, cox_survival, CoxConfig, CoxModel,
};
pub use nonparametric::{
    censoring_survival, kaplan_meier, logrank_statistic, nelson_aalen,
};
