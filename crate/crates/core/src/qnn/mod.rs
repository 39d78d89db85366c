//! QNN classifiers: input encodings, ansatz templates, finite-shot
//! prediction, accuracy sampling and parameter-shift training.

mod build;
mod data;
mod eval;
mod model;
mod train;

pub use build::{
    amplitude_state, build_ansatz, build_template, AnsatzFamily, AnsatzSpec, EncodingSpec,
    Entangler, Slot, Template,
};
pub use data::{Dataset, FeatureScaling};
pub use eval::{accuracy, accuracy_distribution, correctly_classified};
pub use model::{Backend, Prediction, QnnModel, Shots};
pub use train::{
    dataset_loss, input_gradient, parameter_shift_grad, random_theta, score_jacobian, train,
    CrossEntropy, TrainConfig,
};
