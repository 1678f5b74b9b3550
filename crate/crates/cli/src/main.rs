//! Command-line driver: segmentation, phantom generation, mask comparison,
//! slice export and the two-seed benchmark.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volseg::io::{self, Axis};
use volseg::pipeline::{self, BenchArgs, SegmentArgs};
use volseg::{Error, VoxelIndex};

#[derive(Parser)]
#[command(
    name = "volseg",
    version,
    about = "Seeded level-set segmentation of 3D volumes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a volume from one seed point; writes mask, mesh and report.
    Segment {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long)]
        header: PathBuf,
        /// Seed voxel as `i,j,k`.
        #[arg(long, value_parser = parse_seed)]
        seed: VoxelIndex,
        /// Flat `key = value` parameter file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_prefix: PathBuf,
        /// Ground-truth mask (`.raw` with `.json` sidecar) to score against.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "structure")]
        label: String,
    },
    /// Generate a synthetic volume and its ground-truth mask from a JSON spec.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Dice and overlap between two masks (`.raw` with `.json` sidecars).
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Export one slice as a binary PPM, optionally tinting a mask.
    Slices {
        #[arg(long)]
        volume: PathBuf,
        /// Defaults to the volume's `.json` sidecar.
        #[arg(long)]
        header: Option<PathBuf>,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment a phantom with cluster and sphere seeds and tabulate both.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON table; the text table is written next to it as `.txt`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_seed(s: &str) -> Result<VoxelIndex, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected i,j,k".into());
    }
    let mut v = [0usize; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| format!("bad coordinate {p:?}"))?;
    }
    Ok(VoxelIndex::from(v))
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_mask(raw: &Path) -> volseg::Result<volseg::LabelMask> {
    io::read_mask(raw, &io::sidecar_path(raw))
}

fn run(cli: Cli) -> volseg::Result<()> {
    match cli.command {
        Command::Segment {
            volume,
            header,
            seed,
            config,
            out_prefix,
            truth,
            label,
        } => {
            let report = pipeline::run_segment(&SegmentArgs {
                volume,
                header,
                seed,
                config,
                out_prefix,
                truth,
                label,
            })?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if !report.converged {
                eprintln!(
                    "warning: {}: reached max_iters without converging",
                    pipeline::NON_CONVERGED
                );
            }
        }
        Command::Phantom { spec, out_prefix } => {
            pipeline::run_phantom(&pipeline::read_phantom_spec(&spec)?, &out_prefix)?;
        }
        Command::Compare { a, b } => {
            let report = volseg::compare(&read_mask(&a)?, &read_mask(&b)?)?;
            println!(
                "{}",
                serde_json::to_string(&report).expect("report serializes")
            );
        }
        Command::Slices {
            volume,
            header,
            mask,
            axis,
            index,
            out,
        } => {
            let header = header.unwrap_or_else(|| io::sidecar_path(&volume));
            let vol = io::read_volume(&volume, &header)?;
            let mask = mask.as_deref().map(read_mask).transpose()?;
            io::export_slice(&vol, mask.as_ref(), axis, index, &out)?;
        }
        Command::Bench { spec, config, out } => {
            let table = pipeline::run_bench(&BenchArgs { spec, config, out })?;
            print!("{}", table.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.category(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
