pub mod classify;
pub mod conceptor;
pub mod datasets;
pub mod error;
pub mod features;
pub mod io;
pub mod numerics;
pub mod reservoir;
mod series;

pub use classify::{evaluate, train, ClassifierModel, EvidenceReport, OpenSet, Prediction, TrainConfig};
pub use conceptor::{Aggregate, Conceptor, Correlation, EvidenceMode};
pub use error::{Error, Result};
pub use numerics::Matrix;
pub use reservoir::{Activation, Reservoir, ReservoirParams, StateSequence};
pub use series::LabeledSeries;
