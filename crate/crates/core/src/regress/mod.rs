//! Regressors mapping plan features to execution time, and their
//! operator-level composition.

mod kernel;
mod knn;
mod linear;
mod operator;
mod persist;
mod power_law;
mod predictor;
mod svr;

pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub use knn::{fit_knn, KnnModel, KnnWeighting, DEFAULT_K};
pub use linear::{fit_ols, LinearModel};
pub use operator::{
    fit_operator_level, BaseConfig, BaseModel, OperatorLevelModel, OperatorPrediction, DEFAULT_MIN_SAMPLES,
};
pub use persist::{load_model, model_from_value, model_to_value, save_model, MODEL_FORMAT_VERSION};
pub use power_law::{fit_power_law, PowerLawModel};
pub use predictor::{
    fit_predictor, Family, KnnParams, Level, PlanLevelModel, Prediction, Predictor, PredictorConfig, MAX_K,
};
pub use svr::{fit_svr, SvrModel, SvrParams};
