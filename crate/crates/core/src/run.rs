//! Commands that write a run directory: outputs plus a manifest holding
//! every input digest and parameter, enough to replay the run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analyze::{evolution_report, popularity_groups, render_popularity_table, PopularityReport};
use crate::embed::pca;
use crate::error::{Error, Result, StageExt};
use crate::export::{self, render_svg, to_dot, to_graphml, write_text};
use crate::ingest::{load_projects, slice_by_year, Ecosystem, ProjectTable, RowReject, Schema};
use crate::knowledge::{registry_default, ChannelRegistry, EVOLUTION_CHANNELS, POPULARITY_CHANNELS};
use crate::pipeline::{build_topology, select_and_normalize, PipelineParams, Topology};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "CHANTOPO_CONFIG";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandSpec {
    Topology {
        inputs: Vec<PathBuf>,
    },
    /// One topology per creation year; all years present when `years` is empty.
    Evolve {
        inputs: Vec<PathBuf>,
        years: Vec<i32>,
    },
    /// One topology per ecosystem; all present when `ecosystems` is empty.
    Compare {
        inputs: Vec<PathBuf>,
        ecosystems: Vec<String>,
    },
    PcaBaseline {
        inputs: Vec<PathBuf>,
        components: usize,
    },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Topology { .. } => "topology",
            CommandSpec::Evolve { .. } => "evolve",
            CommandSpec::Compare { .. } => "compare",
            CommandSpec::PcaBaseline { .. } => "pca-baseline",
        }
    }

    pub fn inputs(&self) -> &[PathBuf] {
        match self {
            CommandSpec::Topology { inputs }
            | CommandSpec::Evolve { inputs, .. }
            | CommandSpec::Compare { inputs, .. }
            | CommandSpec::PcaBaseline { inputs, .. } => inputs,
        }
    }
}

/// Everything a run depends on besides file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    #[serde(flatten)]
    pub command: CommandSpec,
    pub schema: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub params: PipelineParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub setup: RunSetup,
    pub inputs: Vec<FileDigest>,
    /// paths relative to the run directory
    pub outputs: Vec<FileDigest>,
    pub run_digest: String,
    pub started_at: String,
    pub duration_seconds: f64,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest {}: {e}", path.display())))
    }

    pub fn output(&self, rel: &str) -> Option<&FileDigest> {
        self.outputs.iter().find(|o| o.path == Path::new(rel))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

/// Collects output files relative to the run directory.
struct RunDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl RunDir {
    fn write(&mut self, rel: impl AsRef<Path>, text: &str) -> Result<()> {
        let rel = rel.as_ref();
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_text(&path, text)?;
        self.written.push(rel.to_path_buf());
        Ok(())
    }
}

fn input_digests(setup: &RunSetup) -> Result<Vec<FileDigest>> {
    let mut paths: Vec<&PathBuf> = setup.command.inputs().iter().collect();
    paths.extend(setup.schema.iter());
    paths.extend(setup.registry.iter());
    paths.into_iter().map(|p| FileDigest::of(p)).collect()
}

fn run_digest(setup: &RunSetup, inputs: &[FileDigest]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(setup).expect("setup serializes"));
    for d in inputs {
        h.update(d.sha256.as_bytes());
    }
    hex::encode(h.finalize())
}

fn create_run_dir(out_root: &Path, digest: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!("{stamp}-{}", &digest[..12]);
    let mut dir = out_root.join(&base);
    let mut n = 2;
    while dir.exists() {
        dir = out_root.join(format!("{base}-{n}"));
        n += 1;
    }
    std::fs::create_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn load_inputs(setup: &RunSetup) -> Result<(ProjectTable, ChannelRegistry, Vec<RowReject>)> {
    let schema = match &setup.schema {
        Some(p) => Schema::load(p)?,
        None => Schema::libraries_io(),
    };
    let registry = match &setup.registry {
        Some(p) => ChannelRegistry::load(p)?,
        None => registry_default(),
    };
    let inputs = setup.command.inputs();
    if inputs.is_empty() {
        return Err(Error::arg("no input files"));
    }
    let mut tables = Vec::new();
    let mut rejected = Vec::new();
    for path in inputs {
        let (t, report) = load_projects(path, &schema, &registry)?;
        log::info!("{}: {} rows read, {} rejected", path.display(), report.rows_read, report.rejected.len());
        rejected.extend(report.rejected);
        tables.push(t);
    }
    Ok((ProjectTable::merge(tables)?, registry, rejected))
}

fn rejects_csv(rejected: &[RowReject]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["line", "reason"]).expect("in-memory CSV write");
    for r in rejected {
        wtr.write_record([r.line.to_string(), r.reason.clone()]).expect("in-memory CSV write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory CSV flush")).expect("UTF-8")
}

fn embedding_csv(t: &Topology) -> Result<String> {
    let mut buf = Vec::new();
    t.embedding.write_csv(t.matrix.row_index(), &mut buf)?;
    Ok(String::from_utf8(buf).expect("UTF-8"))
}

fn features_csv(t: &Topology) -> String {
    let mut buf = Vec::new();
    t.matrix.write_csv(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("UTF-8")
}

fn kl_csv(trace: &[(usize, f64)]) -> String {
    let mut s = String::from("iteration,kl\n");
    for (it, kl) in trace {
        s.push_str(&format!("{it},{kl}\n"));
    }
    s
}

/// Graph exports and diagnostics of one topology under `prefix`.
fn write_topology(dir: &mut RunDir, prefix: &Path, t: &Topology, params: &PipelineParams) -> Result<()> {
    let g = &t.mapper.graph;
    dir.write(prefix.join("features.csv"), &features_csv(t))?;
    dir.write(prefix.join("embedding.csv"), &embedding_csv(t)?)?;
    if !t.kl_trace.is_empty() {
        dir.write(prefix.join("kl_trace.csv"), &kl_csv(&t.kl_trace))?;
    }
    dir.write(prefix.join("graph.json"), &export::to_json(g))?;
    dir.write(prefix.join("graph.graphml"), &to_graphml(g))?;
    dir.write(prefix.join("graph.dot"), &to_dot(g, params.render.color_channel.as_deref())?)?;
    dir.write(prefix.join("graph.svg"), &render_svg(g, &params.render)?)?;
    Ok(())
}

fn topology_in_stage(table: &ProjectTable, registry: &ChannelRegistry, params: &PipelineParams) -> Result<Topology> {
    build_topology(table, registry, params)
}

fn run_topology(dir: &mut RunDir, table: &ProjectTable, registry: &ChannelRegistry, p: &PipelineParams) -> Result<()> {
    let t = topology_in_stage(table, registry, p)?;
    write_topology(dir, Path::new(""), &t, p).stage("export")?;
    let channels = p.report_channels_or(&EVOLUTION_CHANNELS);
    let report = evolution_report(
        [("all".to_owned(), &t.mapper.graph, &t.matrix)],
        p.components,
        &channels,
        registry,
        &p.thresholds,
    )
    .stage("analyze")?;
    dir.write("components.txt", &report.to_text())?;
    dir.write("components.csv", &report.to_csv())?;
    Ok(())
}

fn run_evolve(
    dir: &mut RunDir,
    table: &ProjectTable,
    registry: &ChannelRegistry,
    p: &PipelineParams,
    years: &[i32],
) -> Result<()> {
    let years: Vec<i32> = if years.is_empty() {
        table.years().into_iter().collect()
    } else {
        let mut y = years.to_vec();
        y.sort_unstable();
        y.dedup();
        y
    };
    if years.is_empty() {
        return Err(Error::arg("no year slices").in_stage("select"));
    }
    let slices: Vec<(i32, ProjectTable)> = years.iter().map(|&y| (y, slice_by_year(table, y))).collect();
    if let Some((y, _)) = slices.iter().find(|(_, t)| t.is_empty()) {
        return Err(Error::arg(format!("no projects created in {y}")).in_stage("select"));
    }
    let topologies = slices
        .par_iter()
        .map(|(_, t)| topology_in_stage(t, registry, p))
        .collect::<Result<Vec<_>>>()?;
    for ((y, _), t) in slices.iter().zip(&topologies) {
        write_topology(dir, Path::new(&y.to_string()), t, p).stage("export")?;
    }
    let channels = p.report_channels_or(&EVOLUTION_CHANNELS);
    let report = evolution_report(
        slices
            .iter()
            .zip(&topologies)
            .map(|((y, _), t)| (y.to_string(), &t.mapper.graph, &t.matrix)),
        p.components,
        &channels,
        registry,
        &p.thresholds,
    )
    .stage("analyze")?;
    dir.write("evolution.txt", &report.to_text())?;
    dir.write("evolution.csv", &report.to_csv())?;
    dir.write("evolution.json", &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(())
}

fn run_compare(
    dir: &mut RunDir,
    table: &ProjectTable,
    registry: &ChannelRegistry,
    p: &PipelineParams,
    ecosystems: &[String],
) -> Result<()> {
    let ecos: Vec<Ecosystem> = if ecosystems.is_empty() {
        table.ecosystems().into_iter().collect()
    } else {
        ecosystems
            .iter()
            .map(|e| e.parse::<Ecosystem>())
            .collect::<Result<_>>()?
    };
    if ecos.is_empty() {
        return Err(Error::arg("no ecosystems").in_stage("select"));
    }
    let slices: Vec<(Ecosystem, ProjectTable)> = ecos.iter().map(|e| (e.clone(), table.filter_ecosystem(e))).collect();
    if let Some((e, _)) = slices.iter().find(|(_, t)| t.is_empty()) {
        return Err(Error::arg(format!("no projects in ecosystem {e}")).in_stage("select"));
    }
    let channels = p.report_channels_or(&POPULARITY_CHANNELS);
    let results = slices
        .par_iter()
        .map(|(_, t)| {
            let topo = topology_in_stage(t, registry, p)?;
            let report = popularity_groups(&topo.mapper.graph, &topo.matrix, &channels, registry, &p.thresholds)
                .stage("analyze")?;
            Ok((topo, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports: BTreeMap<String, &PopularityReport> = BTreeMap::new();
    for ((eco, _), (topo, report)) in slices.iter().zip(&results) {
        let name = eco.to_string();
        write_topology(dir, Path::new(&name), topo, p).stage("export")?;
        dir.write(Path::new(&name).join("popularity.csv"), &report.to_csv())?;
        reports.insert(name, report);
    }
    let ordered: Vec<(String, &PopularityReport)> = slices
        .iter()
        .map(|(e, _)| (e.to_string(), reports[&e.to_string()]))
        .collect();
    dir.write("popularity.txt", &render_popularity_table(&ordered))?;
    dir.write("popularity.json", &serde_json::to_string_pretty(&reports).expect("report serializes"))?;
    Ok(())
}

fn run_pca(dir: &mut RunDir, table: &ProjectTable, registry: &ChannelRegistry, p: &PipelineParams, k: usize) -> Result<()> {
    p.validate(registry).stage("configure")?;
    let (_, matrix) = select_and_normalize(table, registry, p)?;
    let k = if k == 0 { matrix.n_cols() } else { k.min(matrix.n_cols()) };
    let result = pca(&matrix.to_rows(), k).stage("embed")?;
    let mut buf = Vec::new();
    result.embedding().write_csv(matrix.row_index(), &mut buf)?;
    dir.write("pca_embedding.csv", &String::from_utf8(buf).expect("UTF-8"))?;

    let mut var = String::from("component,variance,ratio,cumulative\n");
    let mut cum = 0.0;
    for (i, (v, r)) in result.explained_variance.iter().zip(&result.explained_variance_ratio).enumerate() {
        cum += r;
        var.push_str(&format!("{},{v},{r},{cum}\n", i + 1));
    }
    dir.write("explained_variance.csv", &var)?;

    let mut load = String::from("component");
    for c in matrix.col_index() {
        load.push(',');
        load.push_str(&csv_field(c));
    }
    load.push('\n');
    for (i, comp) in result.components.iter().enumerate() {
        load.push_str(&(i + 1).to_string());
        for v in comp {
            load.push_str(&format!(",{v}"));
        }
        load.push('\n');
    }
    dir.write("loadings.csv", &load)?;

    let mut text = format!("PCA of {} projects x {} channels\n\n", matrix.n_rows(), matrix.n_cols());
    for (i, r) in result.explained_variance_ratio.iter().enumerate() {
        text.push_str(&format!("PC{:<3} {:>8.4}%\n", i + 1, 100.0 * r));
    }
    text.push_str(&format!("\nfirst two components: {:.4}% of variance\n", 100.0 * result.explained_variance_ratio.iter().take(2).sum::<f64>()));
    dir.write("pca.txt", &text)?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Runs `setup` into a fresh directory under `out_root`. On failure the
/// partial directory is left in place for inspection.
pub fn execute(setup: &RunSetup, out_root: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let inputs = input_digests(setup).stage("ingest")?;
    let digest = run_digest(setup, &inputs);
    let root = create_run_dir(out_root, &digest)?;
    log::info!("{} run in {}", setup.command.name(), root.display());
    let mut dir = RunDir { root: root.clone(), written: Vec::new() };

    let (table, registry, rejected) = load_inputs(setup).stage("ingest")?;
    let mut warnings = Vec::new();
    if !rejected.is_empty() {
        warnings.push(format!("{} input rows rejected; see rejected_rows.csv", rejected.len()));
        dir.write("rejected_rows.csv", &rejects_csv(&rejected))?;
    }
    let p = &setup.params;
    match &setup.command {
        CommandSpec::Topology { .. } => run_topology(&mut dir, &table, &registry, p)?,
        CommandSpec::Evolve { years, .. } => run_evolve(&mut dir, &table, &registry, p, years)?,
        CommandSpec::Compare { ecosystems, .. } => run_compare(&mut dir, &table, &registry, p, ecosystems)?,
        CommandSpec::PcaBaseline { components, .. } => run_pca(&mut dir, &table, &registry, p, *components)?,
    }

    let outputs = dir
        .written
        .iter()
        .map(|rel| {
            FileDigest::of(&root.join(rel)).map(|mut d| {
                d.path = rel.clone();
                d
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        setup: setup.clone(),
        inputs,
        outputs,
        run_digest: digest,
        started_at,
        duration_seconds: start.elapsed().as_secs_f64(),
        warnings,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&root.join(MANIFEST_FILE), &text)?;
    Ok(RunOutcome { dir: root, manifest })
}

/// Re-runs a manifest after checking that its inputs are unchanged.
pub fn replay(manifest_path: &Path, out_root: &Path) -> Result<RunOutcome> {
    let old = RunManifest::load(manifest_path)?;
    for d in &old.inputs {
        let now = FileDigest::of(&d.path).stage("ingest")?;
        if now.sha256 != d.sha256 {
            return Err(Error::arg(format!(
                "input {} changed since the recorded run (sha256 {} != {})",
                d.path.display(),
                now.sha256,
                d.sha256
            ))
            .in_stage("ingest"));
        }
    }
    execute(&old.setup, out_root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::EmbedMethod;
    use crate::fixture::planted_blobs;
    use crate::ingest::write_projects;

    fn setup_with(input: PathBuf, command: impl FnOnce(Vec<PathBuf>) -> CommandSpec) -> RunSetup {
        RunSetup {
            command: command(vec![input]),
            schema: None,
            registry: None,
            params: PipelineParams {
                filter: EmbedMethod::Pca,
                ..PipelineParams::default()
            },
        }
    }

    #[test]
    fn topology_run_writes_manifest_and_replays() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in.csv");
        write_projects(&planted_blobs(120, 5).unwrap().table, &input, &Schema::libraries_io()).unwrap();
        let setup = setup_with(input.clone(), |inputs| CommandSpec::Topology { inputs });
        let out = tmp.path().join("runs");
        let a = execute(&setup, &out).unwrap();
        assert!(a.dir.join(MANIFEST_FILE).exists());
        for f in ["graph.json", "graph.graphml", "graph.svg", "graph.dot", "components.txt"] {
            assert!(a.manifest.output(f).is_some(), "{f} missing");
        }
        let b = replay(&a.dir.join(MANIFEST_FILE), &out).unwrap();
        assert_ne!(a.dir, b.dir);
        assert_eq!(a.manifest.outputs, b.manifest.outputs);
        assert_eq!(a.manifest.run_digest, b.manifest.run_digest);

        std::fs::write(&input, "ID\n").unwrap();
        let err = replay(&a.dir.join(MANIFEST_FILE), &out).unwrap_err();
        assert!(err.to_string().contains("changed"));
    }

    #[test]
    fn missing_input_names_the_stage() {
        let tmp = tempfile::tempdir().unwrap();
        let setup = setup_with(tmp.path().join("nope.csv"), |inputs| CommandSpec::Topology { inputs });
        let err = execute(&setup, tmp.path()).unwrap_err();
        assert!(err.to_string().starts_with("ingest stage failed"));
    }

    #[test]
    fn unknown_year_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in.csv");
        write_projects(&planted_blobs(60, 1).unwrap().table, &input, &Schema::libraries_io()).unwrap();
        let setup = setup_with(input, |inputs| CommandSpec::Evolve { inputs, years: vec![1999] });
        let err = execute(&setup, tmp.path()).unwrap_err();
        assert!(err.to_string().contains("1999"));
    }
}
