use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "fovkit", version, about = "Arbitrary-FOV sampling and reconstruction")]
struct Cli {
    /// Worker threads for the data-parallel kernels (0 = one per core).
    #[arg(long, global = true, env = "FOVKIT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rasterise a JSON phantom description into an image and its support mask.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_img: PathBuf,
        #[arg(long)]
        out_mask: PathBuf,
    },
    /// Derive the reduced sampling pattern for a support mask.
    Pattern {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        coils: CoilArgs,
    },
    /// Sample the spectrum of an image on a pattern.
    Simulate {
        #[arg(long)]
        img: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        /// Coil sensitivities, one layer per coil.
        #[arg(long)]
        coils: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON with the applied normalisation factor.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Reconstruct an image from k-space samples.
    Recon {
        method: Method,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[command(flatten)]
        coils: CoilArgs,
        #[arg(long, default_value_t = fovkit::mbr::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = fovkit::mbr::DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Merge per-coil images with sensitivity weighting.
    Combine {
        #[arg(long)]
        imgs: PathBuf,
        #[arg(long)]
        sens: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error metrics between two images.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a 16-bit PGM of the magnitude.
    Export {
        #[arg(long)]
        img: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fixed scale applied to |z| before clamping; min-max scaling otherwise.
        #[arg(long)]
        scale: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct CoilArgs {
    /// Coil sensitivities, one layer per coil.
    #[arg(long)]
    coils: Option<PathBuf>,
    /// Relative magnitude threshold for each coil's support.
    #[arg(long, default_value_t = fovkit::coils::DEFAULT_SUPPORT_THRESHOLD)]
    theta: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Direct,
    Lsqr,
    Pocs,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Lsqr => "lsqr",
            Method::Pocs => "pocs",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = fovkit::configure_threads(n) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
