use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wavegrid::codec::Codec;
use wavegrid::pipeline::{
    demo_discontinuous, restore_file, run, sweep, transform_file, PipelineError, RunOptions, Scheme, SimConfig,
    SweepConfig, DEMO_THRESHOLD,
};
use wavegrid::threshold::{ThresholdMode, ThresholdSpec};

#[derive(Parser)]
#[command(name = "wavegrid", version, about = "Mass-conserving wavelet compression for finite-volume grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a WGRD snapshot into a WGC1 container.
    Transform(TransformArgs),
    /// Decompress a WGC1 container back into a WGRD snapshot.
    Restore {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a finite-volume simulation with a compression cycle after every step.
    Simulate(SimulateArgs),
    /// Run every combination listed in a key = value config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Built-in demonstrations.
    Demo {
        #[arg(value_enum)]
        case: DemoCase,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEMO_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoCase {
    Discontinuous,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Transport,
    Swe,
}

#[derive(Args)]
struct CompressionArgs {
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long, default_value = "capped")]
    mode: String,
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    #[arg(long, default_value = "csr")]
    codec: String,
    #[arg(long)]
    chunk_size: Option<usize>,
}

impl CompressionArgs {
    fn spec(&self) -> Result<ThresholdSpec, PipelineError> {
        let mode: ThresholdMode = self.mode.parse()?;
        Ok(ThresholdSpec::new(mode, self.threshold)?)
    }

    fn codec(&self) -> Result<Codec, PipelineError> {
        let codec: Codec = self.codec.parse().map_err(|e: wavegrid::codec::CodecError| PipelineError::Config(e.to_string()))?;
        match (codec, self.chunk_size) {
            (Codec::Lz { .. }, Some(chunk_size)) => Ok(Codec::Lz { chunk_size }),
            (Codec::Csr, Some(_)) => Err(PipelineError::Config("--chunk-size only applies to the lz codec".into())),
            (c, None) => Ok(c),
        }
    }
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    compression: CompressionArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    splits: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    compression: CompressionArgs,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    snapshot_at: Vec<f64>,
    /// Directory for snapshots; defaults to the metrics file's directory.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    #[arg(long)]
    csv_snapshots: bool,
    #[arg(long)]
    no_compression: bool,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    threads: Option<usize>,
}

impl SimulateArgs {
    fn config(&self) -> Result<SimConfig, PipelineError> {
        let mut c = match self.scheme {
            SchemeArg::Transport => SimConfig::transport(),
            SchemeArg::Swe => SimConfig::swe(),
        };
        if let Some(v) = self.nx {
            c.nx = v;
        }
        if let Some(s) = &self.splits {
            c.splits = wavegrid::pipeline::parse_splits(s)?;
        }
        if let Some(v) = self.cfl {
            c.cfl = v;
        }
        if let Some(v) = self.t_end {
            c.t_end = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.beta {
            c.beta = v;
        }
        if let Some(v) = self.compression.levels {
            c.compression.levels = v;
        }
        c.compression.threshold = self.compression.spec()?;
        c.compression.codec = self.compression.codec()?;
        c.compression.enabled = !self.no_compression;
        c.strict = self.strict;
        c.threads = self.threads;
        c.snapshot_times = self.snapshot_at.clone();
        c.validate()?;
        Ok(c)
    }

    fn options(&self, scheme: Scheme) -> RunOptions {
        let prefix = self
            .metrics
            .as_deref()
            .and_then(Path::file_stem)
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| scheme.to_string());
        let dir = self.snapshot_dir.clone().or_else(|| {
            let parent = self.metrics.as_deref().and_then(Path::parent)?;
            Some(if parent.as_os_str().is_empty() { PathBuf::from(".") } else { parent.to_path_buf() })
        });
        RunOptions {
            metrics_path: self.metrics.clone(),
            snapshot_dir: dir.or_else(|| (!self.snapshot_at.is_empty()).then(|| PathBuf::from("."))),
            snapshot_prefix: prefix,
            csv_snapshots: self.csv_snapshots,
        }
    }
}

fn execute(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Transform(a) => {
            let levels = a
                .compression
                .levels
                .ok_or_else(|| PipelineError::Config("--levels is required".into()))?;
            let r = transform_file(&a.input, &a.output, levels, &a.compression.spec()?, a.compression.codec()?)?;
            println!("dims             {:?}", r.dims);
            println!("components       {}", r.components);
            println!("zeroed details   {}", r.zeroed);
            println!("dense bytes      {}", r.dense_bytes);
            println!("compressed bytes {}", r.compressed_bytes);
            println!("file bytes       {}", r.file_bytes);
            println!("ratio            {:.3}", r.ratio());
        }
        Command::Restore { input, output } => {
            let fields = restore_file(&input, &output)?;
            println!("restored {} component(s) of shape {:?}", fields.len(), fields[0].dims());
        }
        Command::Simulate(a) => {
            let config = a.config()?;
            let report = run(&config, &a.options(config.scheme))?;
            print!("{}", report.metrics.summary());
            for s in &report.snapshots {
                println!("snapshot         {}", s.display());
            }
        }
        Command::Sweep { config, out_dir } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = SweepConfig::parse(&text)?;
            let rows = sweep(&cfg, &out_dir)?;
            for r in &rows {
                let l2 = r.final_l2_error.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
                println!(
                    "{:<12} L{} c={:<8} steps={:<5} ratio={:<10.3} l2={l2}",
                    r.codec.to_string(),
                    r.levels,
                    r.threshold,
                    r.steps,
                    r.average_ratio
                );
            }
            println!("summary          {}", out_dir.join("summary.csv").display());
        }
        Command::Demo { case: DemoCase::Discontinuous, out_dir, threshold } => {
            let r = demo_discontinuous(Some(&out_dir), threshold)?;
            print!("{}", r.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
