//! Command-line front end: render, edit, export, fit and evaluate flat
//! Gaussian splat scenes.
//!
//! Exit codes: 0 on success, 1 on I/O or format errors, 2 on invalid flags.

mod commands;
mod parse;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::parse::{parse_light, parse_mesh, MeshArg};
use crate::settings::SettingsFlags;

/// An error caused by invalid flags or settings (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "octasplat", version, about = "Ray-traced flat Gaussian splats with mesh proxies")]
struct Cli {
    #[command(flatten)]
    settings: SettingsFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Obj,
    Ply,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render one PNG per camera.
    Render {
        splats: PathBuf,
        cameras: PathBuf,
        /// Output directory; images are named by frame index.
        #[arg(long)]
        out: PathBuf,
        /// Solid mesh as path:material[:ior] (diffuse, mirror or glass).
        #[arg(long = "mesh", value_parser = parse_mesh)]
        meshes: Vec<MeshArg>,
        /// Point light as x,y,z[:r,g,b].
        #[arg(long = "light", value_parser = parse_light)]
        lights: Vec<octasplat::PointLight>,
    },
    /// Apply an edit spec (JSON) through the splat polygons.
    Edit {
        splats: PathBuf,
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export splat polygons as a mesh for external tools.
    Export {
        splats: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit splats to target views.
    Fit {
        /// Initial splats.
        #[arg(long, conflicts_with = "synthetic")]
        init: Option<PathBuf>,
        /// Generate a seeded ground-truth scene with this many splats and
        /// fit to its renders.
        #[arg(long)]
        synthetic: Option<usize>,
        /// Number of random initial splats for synthetic runs.
        #[arg(long, default_value_t = 64)]
        init_splats: usize,
        /// Start from the ground truth itself (the optimum).
        #[arg(long)]
        self_fit: bool,
        /// Directory of target PNGs, paired with cameras in name order.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long)]
        cameras: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Fitted splats.
        #[arg(long)]
        out: PathBuf,
        /// Loss history (iteration, loss, psnr).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Per-image and mean PSNR/SSIM between two directories of PNGs.
    Eval { renders: PathBuf, references: PathBuf },
    /// Write a seeded synthetic scene and orbit cameras.
    Synth {
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        views: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
