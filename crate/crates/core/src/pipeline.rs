//! Stage composition shared by the commands: top-N selection, features,
//! filter embedding, Mapper and component ranking.

use serde::{Deserialize, Serialize};

use crate::analyze::{rank_components, ClusterComponent, Thresholds};
use crate::embed::{pca, tsne, EmbedMethod, FilterEmbedding, TsneParams};
use crate::error::{Error, Result, StageExt};
use crate::export::RenderSpec;
use crate::ingest::{top_n_by_stars, ProjectTable, DEFAULT_TOP_N};
use crate::knowledge::{ChannelRegistry, EVOLUTION_CHANNELS, POPULARITY_CHANNELS};
use crate::mapper::{run_mapper, MapperOutput, MapperParams};
use crate::normalize::{normalize_features, FeatureMatrix};

/// Every tunable of a run. Loadable from TOML; CLI flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    /// feature channels; empty means every registry channel
    pub channels: Vec<String>,
    /// channel columns of the rendered reports; empty means the command's
    /// default set
    pub report_channels: Vec<String>,
    pub top_n: usize,
    pub filter: EmbedMethod,
    /// components per period in reports
    pub components: usize,
    pub tsne: TsneParams,
    pub mapper: MapperParams,
    pub thresholds: Thresholds,
    pub render: RenderSpec,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            channels: Vec::new(),
            report_channels: Vec::new(),
            top_n: DEFAULT_TOP_N,
            filter: EmbedMethod::Tsne,
            components: 3,
            tsne: TsneParams::default(),
            mapper: MapperParams::default(),
            thresholds: Thresholds::default(),
            render: RenderSpec {
                color_channel: Some(crate::knowledge::names::CONTRIBUTING_GUIDELINES.to_owned()),
                ..RenderSpec::default()
            },
        }
    }
}

impl PipelineParams {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("params serialize to TOML")
    }

    pub fn feature_channels(&self, registry: &ChannelRegistry) -> Vec<String> {
        if self.channels.is_empty() {
            registry.names()
        } else {
            self.channels.clone()
        }
    }

    /// Report columns, falling back to `default` when none are configured.
    pub fn report_channels_or(&self, default: &[&str]) -> Vec<String> {
        if self.report_channels.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.report_channels.clone()
        }
    }

    /// Checks channel names and numeric ranges before any stage runs.
    pub fn validate(&self, registry: &ChannelRegistry) -> Result<()> {
        let features = self.feature_channels(registry);
        registry.subset(&features)?;
        let defaults: Vec<&str> = EVOLUTION_CHANNELS.iter().chain(&POPULARITY_CHANNELS).copied().collect();
        for c in &self.report_channels_or(&defaults) {
            if !features.contains(c) {
                return Err(Error::arg(format!("report channel {c:?} is not a feature channel")));
            }
        }
        if let Some(c) = &self.render.color_channel {
            if !features.contains(c) {
                return Err(Error::arg(format!("color channel {c:?} is not a feature channel")));
            }
        }
        if self.top_n == 0 || self.components == 0 {
            return Err(Error::arg("top_n and components must be positive"));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Topology {
    /// projects kept after top-N selection, in matrix row order
    pub table: ProjectTable,
    pub matrix: FeatureMatrix,
    pub embedding: FilterEmbedding,
    /// `(iteration, KL)` for t-SNE runs
    pub kl_trace: Vec<(usize, f64)>,
    pub kl_after_exaggeration: Option<f64>,
    pub saturated_rows: Vec<usize>,
    pub mapper: MapperOutput,
    pub components: Vec<ClusterComponent>,
}

pub fn select_and_normalize(
    table: &ProjectTable,
    registry: &ChannelRegistry,
    params: &PipelineParams,
) -> Result<(ProjectTable, FeatureMatrix)> {
    let top = top_n_by_stars(table, params.top_n).stage("select")?;
    if top.is_empty() {
        return Err(Error::arg("no projects to analyze").in_stage("select"));
    }
    let matrix = normalize_features(&top, registry, &params.feature_channels(registry)).stage("normalize")?;
    Ok((top, matrix))
}

/// Runs every stage from top-N selection to ranked components.
pub fn build_topology(
    table: &ProjectTable,
    registry: &ChannelRegistry,
    params: &PipelineParams,
) -> Result<Topology> {
    params.validate(registry).stage("configure")?;
    let (top, matrix) = select_and_normalize(table, registry, params)?;
    let rows = matrix.to_rows();
    log::info!("embedding {} projects x {} channels ({:?})", rows.len(), matrix.n_cols(), params.filter);
    let (embedding, kl_trace, kl_after, saturated) = match params.filter {
        EmbedMethod::Tsne => {
            let run = tsne(&rows, &params.tsne).stage("embed")?;
            for &(it, kl) in &run.kl_trace {
                log::debug!("t-SNE iteration {it}: KL {kl:.6}");
            }
            if !run.saturated_rows.is_empty() {
                log::info!("{} affinity rows saturated at their perplexity limit", run.saturated_rows.len());
            }
            (run.embedding, run.kl_trace, Some(run.kl_after_exaggeration), run.saturated_rows)
        }
        EmbedMethod::Pca => {
            let k = matrix.n_cols().min(2);
            (pca(&rows, k).stage("embed")?.embedding(), Vec::new(), None, Vec::new())
        }
    };
    let mapper = run_mapper(&matrix, &embedding, &params.mapper).stage("mapper")?;
    log::info!("nerve: {} nodes, {} edges", mapper.graph.nodes.len(), mapper.graph.edges.len());
    let components = rank_components(&mapper.graph);
    Ok(Topology {
        table: top,
        matrix,
        embedding,
        kl_trace,
        kl_after_exaggeration: kl_after,
        saturated_rows: saturated,
        mapper,
        components,
    })
}
