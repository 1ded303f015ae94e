use serde::{Deserialize, Serialize};

use super::fa::{fa_fit, fa_transform, FaModel};
use super::lda::{lda_fit, lda_transform, LdaModel};
use super::scale::{standard_scale_apply, standard_scale_fit, ScalerModel};
use super::tsne::{tsne_embed, TsneConfig};
use super::umap::{umap_embed, UmapConfig};
use crate::error::{Error, Result, StageExt};
use crate::numerics::{sq_dist, Matrix, SeededRng};

/// Neighbour count for placing unseen rows into a fitted embedding.
pub const PLACEMENT_NEIGHBORS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UmapInput {
    /// UMAP embeds the t-SNE output.
    #[default]
    Tsne,
    /// UMAP embeds the LDA ⧺ FA concatenation directly.
    Concat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub lda_dims: usize,
    pub fa_factors: usize,
    pub tsne: TsneConfig,
    pub umap: UmapConfig,
    pub umap_input: UmapInput,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            lda_dims: 1,
            fa_factors: 3,
            tsne: TsneConfig::default(),
            umap: UmapConfig::default(),
            umap_input: UmapInput::Tsne,
        }
    }
}

/// Intermediate matrices of a fitted chain, in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStages {
    pub lda: Matrix,
    pub fa: Matrix,
    pub concat: Matrix,
    pub tsne: Matrix,
    pub umap: Matrix,
    pub scaled: Matrix,
}

#[derive(Debug, Clone)]
pub struct FittedChain {
    pub config: ChainConfig,
    pub lda: LdaModel,
    pub fa: FaModel,
    pub scaler: ScalerModel,
    pub stages: ChainStages,
    pub kl_trace: Vec<(usize, f64)>,
}

impl FittedChain {
    pub fn output(&self) -> &Matrix {
        &self.stages.scaled
    }

    pub fn stage_matrices(&self) -> [(&'static str, &Matrix); 6] {
        let s = &self.stages;
        [
            ("lda", &s.lda),
            ("fa", &s.fa),
            ("concat", &s.concat),
            ("tsne", &s.tsne),
            ("umap", &s.umap),
            ("scaled", &s.scaled),
        ]
    }

    pub fn stage_widths(&self) -> Vec<(&'static str, usize)> {
        self.stage_matrices().iter().map(|(n, m)| (*n, m.cols())).collect()
    }

    fn umap_source(&self) -> &Matrix {
        match self.config.umap_input {
            UmapInput::Tsne => &self.stages.tsne,
            UmapInput::Concat => &self.stages.concat,
        }
    }

    /// Maps unseen rows through the fitted chain. LDA, FA and the scaler are
    /// applied directly; the t-SNE and UMAP coordinates are the mean of the
    /// embeddings of the nearest training rows in each stage's input space.
    pub fn embed_new(&self, x: &Matrix) -> Result<Matrix> {
        let lda = lda_transform(&self.lda, x).stage("lda")?;
        let fa = fa_transform(&self.fa, x).stage("fa")?;
        let concat = lda.hstack(&fa)?;
        let tsne = place_by_neighbors(&self.stages.concat, &self.stages.tsne, &concat, PLACEMENT_NEIGHBORS)
            .stage("tsne")?;
        let umap_in = match self.config.umap_input {
            UmapInput::Tsne => &tsne,
            UmapInput::Concat => &concat,
        };
        let umap = place_by_neighbors(self.umap_source(), &self.stages.umap, umap_in, PLACEMENT_NEIGHBORS)
            .stage("umap")?;
        standard_scale_apply(&self.scaler, &umap).stage("scale")
    }
}

pub fn reduce_chain(x: &Matrix, y: &[u8], cfg: &ChainConfig, rng: &SeededRng) -> Result<FittedChain> {
    let lda_model = lda_fit(x, y, cfg.lda_dims).stage("lda")?;
    let lda = lda_transform(&lda_model, x).stage("lda")?;
    let fa_model = fa_fit(x, cfg.fa_factors).stage("fa")?;
    let fa = fa_transform(&fa_model, x).stage("fa")?;
    let concat = lda.hstack(&fa).stage("concat")?;
    log::info!("chain: lda {} + fa {} -> concat {}", lda.cols(), fa.cols(), concat.cols());

    let tsne_out = tsne_embed(&concat, &cfg.tsne, &mut rng.derive_substream(0)).stage("tsne")?;
    log::info!(
        "chain: t-SNE KL {:.4} -> {:.4}",
        tsne_out.initial_kl(),
        tsne_out.final_kl()
    );
    let tsne = tsne_out.embedding;
    let umap_in = match cfg.umap_input {
        UmapInput::Tsne => &tsne,
        UmapInput::Concat => &concat,
    };
    let umap = umap_embed(umap_in, &cfg.umap, &mut rng.derive_substream(1)).stage("umap")?;
    let scaler = standard_scale_fit(&umap).stage("scale")?;
    let scaled = standard_scale_apply(&scaler, &umap).stage("scale")?;

    Ok(FittedChain {
        config: cfg.clone(),
        lda: lda_model,
        fa: fa_model,
        scaler,
        stages: ChainStages {
            lda,
            fa,
            concat,
            tsne,
            umap,
            scaled,
        },
        kl_trace: tsne_out.kl_trace,
    })
}

/// Mean embedding of the `k` nearest training rows (ties by index) for every
/// row of `new_in`.
pub fn place_by_neighbors(
    train_in: &Matrix,
    train_out: &Matrix,
    new_in: &Matrix,
    k: usize,
) -> Result<Matrix> {
    if train_in.rows() != train_out.rows() {
        return Err(Error::Input("training input and embedding row counts differ".into()));
    }
    if train_in.cols() != new_in.cols() {
        return Err(Error::Input(format!(
            "placement expects width {}, got {}",
            train_in.cols(),
            new_in.cols()
        )));
    }
    let k = k.min(train_in.rows());
    if k == 0 {
        return Err(Error::Input("placement needs at least one training row".into()));
    }
    let mut out = Matrix::zeros(new_in.rows(), train_out.cols());
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(train_in.rows());
    for i in 0..new_in.rows() {
        cand.clear();
        cand.extend(train_in.row_iter().enumerate().map(|(j, r)| (sq_dist(new_in.row(i), r), j)));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, cmp);
        }
        let row = out.row_mut(i);
        for &(_, j) in &cand[..k] {
            for (o, v) in row.iter_mut().zip(train_out.row(j)) {
                *o += v;
            }
        }
        row.iter_mut().for_each(|o| *o /= k as f64);
    }
    Ok(out)
}
