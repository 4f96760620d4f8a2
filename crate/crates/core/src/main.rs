use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use chantopo::embed::EmbedMethod;
use chantopo::export::Layout;
use chantopo::fixture::{self, Fixture};
use chantopo::ingest::{write_projects, Ecosystem, ProjectTable, Schema};
use chantopo::knowledge::{registry_default, validate_registry, ChannelRegistry};
use chantopo::mapper::ClusterSpace;
use chantopo::pipeline::PipelineParams;
use chantopo::run::{execute, replay, CommandSpec, RunOutcome, RunSetup, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "chantopo", version, about = "Topological maps of project communication channels")]
struct Cli {
    /// log filter, e.g. info or chantopo=debug
    #[arg(long, global = true, default_value = "warn")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed, cover and cluster one project set; rank its components
    Topology {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// One topology per creation year with a feature table per year
    Evolve {
        inputs: Vec<PathBuf>,
        /// years to slice; default every year present
        #[arg(long, value_delimiter = ',')]
        years: Vec<i32>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// One topology per ecosystem with popular and non-popular groups
    Compare {
        inputs: Vec<PathBuf>,
        /// ecosystems to compare; default every ecosystem present
        #[arg(long, value_delimiter = ',')]
        ecosystems: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Principal components of the normalized features
    PcaBaseline {
        inputs: Vec<PathBuf>,
        /// number of components; 0 keeps all
        #[arg(long, default_value_t = 0)]
        n_components: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a synthetic project table with known structure
    GenFixture(FixtureArgs),
    /// Check a channel registry file, or the built-in one
    ValidateRegistry {
        registry: Option<PathBuf>,
        /// write the built-in registry as CSV to this path
        #[arg(long)]
        write_default: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with pipeline parameters
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// directory that receives the run directory
    #[arg(long, short, default_value = "runs")]
    out: PathBuf,
    /// re-run a recorded manifest; inputs and flags are taken from it
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,
    /// column schema of the input files
    #[arg(long)]
    schema: Option<PathBuf>,
    /// channel registry CSV
    #[arg(long)]
    registry: Option<PathBuf>,
    /// print the effective parameters as TOML and exit
    #[arg(long)]
    print_config: bool,

    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    report_channels: Option<Vec<String>>,
    #[arg(long)]
    top_n: Option<usize>,
    /// tsne or pca
    #[arg(long)]
    filter: Option<EmbedMethod>,
    /// components listed per period
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    perplexity: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    intervals: Option<usize>,
    #[arg(long)]
    overlap: Option<f64>,
    /// features or embedding
    #[arg(long)]
    cluster_space: Option<ClusterSpace>,
    #[arg(long)]
    histogram_bins: Option<usize>,
    #[arg(long)]
    min_node_size: Option<usize>,
    #[arg(long)]
    dominant: Option<f64>,
    #[arg(long)]
    strongly_dominant: Option<f64>,
    /// channel that colors the rendered graph
    #[arg(long)]
    color_channel: Option<String>,
    /// render nodes in a neutral color
    #[arg(long, conflicts_with = "color_channel")]
    no_color: bool,
    /// force-directed or bin-grid
    #[arg(long)]
    layout: Option<Layout>,
}

impl RunArgs {
    fn params(&self) -> anyhow::Result<PipelineParams> {
        let mut p = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                PipelineParams::from_toml(&text)?
            }
            None => PipelineParams::default(),
        };
        macro_rules! set {
            ($flag:ident => $($field:tt)+) => {
                if let Some(v) = self.$flag.clone() {
                    p.$($field)+ = v;
                }
            };
        }
        set!(channels => channels);
        set!(report_channels => report_channels);
        set!(top_n => top_n);
        set!(filter => filter);
        set!(components => components);
        set!(perplexity => tsne.perplexity);
        set!(iterations => tsne.iterations);
        set!(learning_rate => tsne.learning_rate);
        set!(intervals => mapper.intervals);
        set!(overlap => mapper.overlap);
        set!(cluster_space => mapper.cluster_space);
        set!(histogram_bins => mapper.histogram_bins);
        set!(min_node_size => mapper.min_node_size);
        set!(dominant => thresholds.dominant);
        set!(strongly_dominant => thresholds.strongly_dominant);
        set!(layout => render.layout);
        if let Some(seed) = self.seed {
            p.tsne.seed = seed;
            p.render.seed = seed;
        }
        if self.color_channel.is_some() {
            p.render.color_channel = self.color_channel.clone();
        }
        if self.no_color {
            p.render.color_channel = None;
        }
        Ok(p)
    }
}

fn pipeline_run(run: &RunArgs, command: impl FnOnce() -> anyhow::Result<CommandSpec>) -> anyhow::Result<()> {
    let outcome: RunOutcome = if let Some(manifest) = &run.from_manifest {
        replay(manifest, &run.out)?
    } else {
        let setup = RunSetup {
            command: command()?,
            schema: run.schema.clone(),
            registry: run.registry.clone(),
            params: run.params()?,
        };
        if run.print_config {
            print!("{}", setup.params.to_toml());
            return Ok(());
        }
        execute(&setup, &run.out)?
    };
    for w in &outcome.manifest.warnings {
        log::warn!("{w}");
    }
    println!("{}", outcome.dir.display());
    Ok(())
}

fn need_inputs(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        bail!("no input files given");
    }
    Ok(inputs.to_vec())
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureKind {
    /// three planted channel profiles in one year
    Blobs,
    /// three years with one channel fading
    Decline,
    /// popular and non-popular profiles with star ranges
    Popularity,
    /// popularity profiles in all seven ecosystems
    Ecosystems,
    /// unstructured random projects
    Random,
    /// seven ecosystems over three years
    Sample,
}

#[derive(Args)]
struct FixtureArgs {
    kind: FixtureKind,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: PathBuf,
    /// also write `id,label` rows of the planted profiles
    #[arg(long)]
    labels: Option<PathBuf>,
    /// faded channel of the decline fixture
    #[arg(long, default_value = "Wiki")]
    channel: String,
    /// presence of the faded channel per year
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.5, 0.1])]
    presence: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2015, 2016, 2017])]
    years: Vec<i32>,
    /// ecosystem of the popularity fixture
    #[arg(long, default_value = "Npm")]
    ecosystem: Ecosystem,
}

fn write_labels(f: &Fixture, path: &Path) -> anyhow::Result<()> {
    let mut wtr = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    wtr.write_record(["id", "label"])?;
    for (id, &l) in &f.labels {
        wtr.write_record([id.as_str(), f.profiles[l].label.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn gen_fixture(a: &FixtureArgs) -> anyhow::Result<()> {
    let three = |v: &[f64]| -> anyhow::Result<[f64; 3]> {
        v.try_into().map_err(|_| anyhow::anyhow!("expected three values, got {}", v.len()))
    };
    let years: [i32; 3] = a
        .years
        .as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("expected three years, got {}", a.years.len()))?;
    let (table, planted): (ProjectTable, Option<Fixture>) = match a.kind {
        FixtureKind::Blobs => split(fixture::planted_blobs(a.n, a.seed)?),
        FixtureKind::Decline => split(fixture::decline(a.n, &a.channel, years, three(&a.presence)?, a.seed)?),
        FixtureKind::Popularity => split(fixture::popularity(a.n, a.ecosystem.clone(), a.seed)?),
        FixtureKind::Ecosystems => split(fixture::seven_ecosystems(a.n, a.seed)?),
        FixtureKind::Random => (fixture::random_projects(a.n, &Ecosystem::KNOWN, &a.years, a.seed)?, None),
        FixtureKind::Sample => (fixture::sample_population(a.n, a.seed)?, None),
    };
    write_projects(&table, &a.output, &Schema::libraries_io())?;
    if let Some(path) = &a.labels {
        match &planted {
            Some(f) => write_labels(f, path)?,
            None => bail!("this fixture kind has no planted labels"),
        }
    }
    println!("{} projects written to {}", table.len(), a.output.display());
    Ok(())
}

fn split(f: Fixture) -> (ProjectTable, Option<Fixture>) {
    (f.table.clone(), Some(f))
}

fn validate(registry: Option<&Path>, write_default: Option<&Path>) -> anyhow::Result<bool> {
    if let Some(path) = write_default {
        registry_default().save(path)?;
        println!("built-in registry written to {}", path.display());
    }
    let violations = match registry {
        Some(path) => match ChannelRegistry::load(path) {
            Ok(_) => Vec::new(),
            Err(chantopo::Error::Registry(v)) => v,
            Err(e) => return Err(e.into()),
        },
        None => validate_registry(&registry_default()),
    };
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() {
        println!("registry is valid");
    }
    Ok(violations.is_empty())
}

fn dispatch(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Topology { inputs, run } => pipeline_run(&run, || {
            Ok(CommandSpec::Topology {
                inputs: need_inputs(&inputs)?,
            })
        })?,
        Command::Evolve { inputs, years, run } => pipeline_run(&run, || {
            Ok(CommandSpec::Evolve {
                inputs: need_inputs(&inputs)?,
                years,
            })
        })?,
        Command::Compare { inputs, ecosystems, run } => pipeline_run(&run, || {
            Ok(CommandSpec::Compare {
                inputs: need_inputs(&inputs)?,
                ecosystems,
            })
        })?,
        Command::PcaBaseline { inputs, n_components, run } => pipeline_run(&run, || {
            Ok(CommandSpec::PcaBaseline {
                inputs: need_inputs(&inputs)?,
                components: n_components,
            })
        })?,
        Command::GenFixture(a) => gen_fixture(&a)?,
        Command::ValidateRegistry { registry, write_default } => {
            return validate(registry.as_deref(), write_default.as_deref());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
