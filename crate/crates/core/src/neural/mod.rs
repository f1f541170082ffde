//! Trainable transformer and LSTM character predictors.

pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod positional;
pub mod tensor;
pub mod transformer;

pub use gradcheck::{gradient_check, GroupCheck};
pub use loss::{loss_mse, predict_legal, THRESHOLD};
pub use lstm::{Lstm, LstmConfig};
pub use model::{Model, ModelConfig, Predictor};
pub use optim::RmsProp;
pub use positional::{positional_signal, PositionalScheme};
pub use tensor::{Mat, ParamSet};
pub use transformer::{ForwardTrace, LayerTrace, Transformer, TransformerConfig};
