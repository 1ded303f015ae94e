//! Feature extraction chain: LDA ⧺ FA, then t-SNE, UMAP and z-scoring.

mod chain;
mod fa;
mod lda;
mod scale;
pub mod tsne;
pub mod umap;

pub use chain::{place_by_neighbors, reduce_chain, ChainConfig, ChainStages, FittedChain, UmapInput, PLACEMENT_NEIGHBORS};
pub use fa::{fa_fit, fa_transform, FaModel};
pub use lda::{lda_fit, lda_transform, LdaModel};
pub use scale::{standard_scale_apply, standard_scale_fit, ScalerModel};
pub use tsne::{tsne_embed, TsneConfig, TsneResult};
pub use umap::{umap_embed, UmapConfig};
