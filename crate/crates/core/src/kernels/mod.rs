//! Graphlet sampling, graphlet embeddings, and the kernels built on them.

pub mod cache;
pub mod combined;
pub mod embedding;
pub mod graph_kernel;
pub mod graphlet;
pub mod vector;

pub use cache::{read_kernel_cache, write_kernel_cache};
pub use combined::{CombinedKernel, KernelParams};
pub use embedding::{train_embeddings, EmbeddingModel, SkipGramConfig, GRID_VALUES};
pub use graph_kernel::{
    base_graphlet_kernel, deep_graphlet_kernel, normalize_kernel, GraphKernelBank, GraphKernelConfig, GraphletProfile,
    KernelVariant,
};
pub use graphlet::{graphlet_census, sample_graphlets, GraphletCounts, GraphletId};
pub use vector::seard;
