//! Small feedforward and convolutional networks with hand-written reverse-mode
//! gradients, Adam training, and explicit ReLU constructions.

mod construct;
mod layer;
mod network;
mod signals;
mod train;

pub use construct::{
    corrected_decoder_network, corrected_matrix, identity_relu_gadget, interpolatory_network,
    least_squares_interpolant, pinv_decoder_network, unet, UnetConfig, MAX_INTERPOLATION_PAIRS,
};
pub use layer::{Layer, Shape};
pub use network::{mlp, Gradients, Network, Sample};
pub use signals::piecewise_poly_signals;
pub use train::{
    multi_mask_samples, refit_output_layer, train, train_multi_mask, train_regularized, zero_fill,
    Adam, MaskedNetwork, Regularizer, TrainConfig, TrainOutcome,
};
