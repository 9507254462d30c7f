//! Core machinery for joint person identity, gender and age-group
//! classification from hand images: a small convolutional backbone with
//! three independent affine heads, a label-smoothed summed cross-entropy
//! objective with exact gradients, Adam with L2 regularization and a
//! warmup/step learning-rate schedule, the dataset preparation protocol
//! (accessory filtering, aspect partitioning, age binning, stratified
//! splitting, augmentation), and closed/open-set evaluation metrics.
//!
//! Everything in this crate is pure: outputs are a deterministic function
//! of (inputs, seed). File formats, persistence and the command line live
//! in the companion `igae` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod data;
pub mod eval;
pub mod image;
pub mod loss;
pub mod model;
pub mod optim;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod train;

pub use augment::AugmentConfig;
pub use data::{
    bin_age, filter_accessories, partition_by_aspect, stratified_split, AgeGroupScheme, DataError,
    Gender, HandAspect, LabelMaps, ManifestRecord, SplitSpec,
};
pub use eval::{cosine_similarity, evaluate, open_set_match, ConfusionMatrix, EvalReport,
    FeatureSource};
pub use loss::{head_loss, smoothed_targets, total_loss, BatchLoss, LossError};
pub use model::{
    init_params, softmax, BackboneSpec, ClassCounts, ModelError, ModelParams, PixelBatch, Task,
};
pub use optim::{adam_step, lr_at, make_param_groups, AdamConfig, AdamState, LrSchedule,
    OptimError, ParamGroup};
pub use tensor::{Precision, Tensor};
pub use train::{run_epoch, EpochStats, TrainSample, TrainSettings};
