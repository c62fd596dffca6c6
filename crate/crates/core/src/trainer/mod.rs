//! Desk-scale dual-encoder trainer: a linear shared encoder over sparse
//! features, contrastive losses with analytic gradients, hard-negative
//! mining, and an AdamW loop with warmup/linear-decay.

mod encoder;
mod features;
mod losses;
mod mining;
mod optim;
mod train;

pub use encoder::ToyEncoder;
pub use features::{SparseVector, ToyDataset};
pub use losses::{
    decoupled_softmax_loss, rae_training_loss, softmax_ce_loss, TrainBatch, TrainBatchItem,
};
pub use mining::hard_negative_mine;
pub use optim::{warmup_linear_decay_lr, AdamW};
pub use train::{dual_encoder_p_at_1, train, CurvePoint, TrainConfig};
