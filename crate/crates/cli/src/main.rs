use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use tgkt_cli::commands;
use tgkt_cli::config::{RunArgs, Settings};

#[derive(Parser)]
#[command(name = "tgkt", version, about = "Weighted t-product Golub-Kahan-Tikhonov deblurring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur test images and add correlated noise.
    Synth(RunArgs),
    /// Restore the output of `synth`.
    Deblur(RunArgs),
    /// Sweep methods, regularizers and noise levels.
    Bench(RunArgs),
    /// Convert between PGM/PPM images and T3B tensors.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => {
            let s = Settings::resolve(&args)?;
            let out = commands::synth(&s)?;
            println!(
                "wrote {:?} data, delta = {}",
                out.degraded.dims(),
                out.meta.require("delta")?
            );
        }
        Command::Deblur(args) => {
            let s = Settings::resolve(&args)?;
            let out = commands::deblur(&s)?;
            for r in &out.run.rows {
                println!(
                    "{} L={} slice={} k={} mu={:.4e} psnr={:.2}",
                    r.method,
                    r.reg,
                    r.slice.map_or("all".into(), |j| j.to_string()),
                    r.k.unwrap_or(0),
                    r.mu.unwrap_or(f64::NAN),
                    r.psnr.unwrap_or(f64::NAN)
                );
            }
            println!("report: {}", out.report.display());
        }
        Command::Bench(args) => {
            let s = Settings::resolve(&args)?;
            let rows = commands::bench(&s)?;
            let failed = rows.iter().filter(|r| r.failed()).count();
            println!("{} rows, {failed} failed", rows.len());
        }
        Command::Convert(args) => {
            for p in commands::convert(&args.inputs, &args.out)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
