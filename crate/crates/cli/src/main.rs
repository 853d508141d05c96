use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fic_core::decoder::{decode, DecodeParams, InitialImage};
use fic_core::encoder::{encode_parallel, encode_sequential, ChunkShape, CodecParams};
use fic_core::format::{deserialize, reduction_pct, serialize};
use fic_core::pixmap::{load_pgm, validate_geometry, write_pgm};
use fic_core::{metrics, synth, GrayImage};

mod bench;

#[derive(Parser)]
#[command(name = "fic", version, about = "Grayscale fractal image codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PGM image into a FIC1 file.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        /// Worker threads; 1 runs the sequential encoder.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Range blocks per parallel work unit, as COLSxROWS.
        #[arg(long, default_value = "16x16")]
        chunk: ChunkShape,
    },
    /// Reconstruct a PGM image from a FIC1 file.
    Decode {
        input: PathBuf,
        output: PathBuf,
        /// Linear magnification factor.
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long, default_value_t = 16)]
        iterations: usize,
        /// Starting image: mid-gray, black, or a PGM path of the output size.
        #[arg(long, default_value = "mid-gray")]
        initial: String,
    },
    /// Report RMSE and PSNR between two PGM images.
    Metrics { a: PathBuf, b: PathBuf },
    /// Time sequential and parallel encodes over a directory of PGM images.
    Bench(bench::BenchArgs),
    /// Write a synthetic test image.
    Synth {
        output: PathBuf,
        #[arg(long, default_value_t = 256)]
        side: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Uniform noise instead of the structured pattern.
        #[arg(long)]
        noise: bool,
    },
}

#[derive(Args, Clone)]
pub struct CodecArgs {
    /// Range block side.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Domain grid spacing; defaults to the range side.
    #[arg(long)]
    step: Option<usize>,
    #[arg(long, default_value_t = 5)]
    s_bits: u8,
    #[arg(long, default_value_t = 9)]
    o_bits: u8,
    #[arg(long, default_value_t = 1.0)]
    s_max: f64,
}

impl CodecArgs {
    pub fn params(&self) -> fic_core::Result<CodecParams> {
        CodecParams::builder()
            .n(self.n)
            .step(self.step.unwrap_or(self.n))
            .s_bits(self.s_bits)
            .o_bits(self.o_bits)
            .s_max(self.s_max)
            .build()
    }
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn encode_with(
    img: &GrayImage,
    params: &CodecParams,
    workers: usize,
    chunk: ChunkShape,
) -> fic_core::Result<Vec<u8>> {
    let enc = if workers == 1 {
        encode_sequential(img, params)?
    } else {
        encode_parallel(img, params, workers, chunk)?
    };
    serialize(&enc)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            codec,
            workers,
            chunk,
        } => {
            let img = read_pgm(&input)?;
            let params = codec.params()?;
            validate_geometry(&img, &params)?;
            let start = Instant::now();
            let bytes = encode_with(&img, &params, workers, chunk)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            write_file(&output, &bytes)?;
            let mappings = (img.width() / params.n()) * (img.height() / params.n());
            println!("encode_ms={ms:.3}");
            println!("mappings={mappings}");
            println!("bytes={}", bytes.len());
            println!(
                "size_reduction_pct={:.4}",
                reduction_pct(bytes.len(), img.pixel_count())?
            );
        }
        Command::Decode {
            input,
            output,
            scale,
            iterations,
            initial,
        } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let enc =
                deserialize(&bytes).with_context(|| format!("parsing {}", input.display()))?;
            let initial = match initial.as_str() {
                "mid-gray" => InitialImage::MidGray,
                "black" => InitialImage::Black,
                path => InitialImage::Supplied(read_pgm(Path::new(path))?),
            };
            let p = DecodeParams {
                scale,
                iterations,
                initial,
                convergence_eps: None,
            };
            let start = Instant::now();
            let img = decode(&enc, &p)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            write_file(&output, &write_pgm(&img))?;
            println!("decode_ms={ms:.3}");
            println!("width={}", img.width());
            println!("height={}", img.height());
        }
        Command::Metrics { a, b } => {
            let rmse = metrics::rmse(&read_pgm(&a)?, &read_pgm(&b)?)?;
            let psnr = metrics::psnr(rmse);
            println!("rmse={rmse:.6}");
            if psnr.is_infinite() {
                println!("psnr=inf");
            } else {
                println!("psnr={psnr:.4}");
            }
        }
        Command::Bench(args) => bench::run(&args)?,
        Command::Synth {
            output,
            side,
            seed,
            noise,
        } => {
            let img = if noise {
                synth::noise(side, seed)
            } else {
                synth::test_pattern(side, seed)
            };
            write_file(&output, &write_pgm(&img))?;
        }
    }
    Ok(())
}

/// Codec and I/O failures are the caller's fault; anything else is ours.
fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<fic_core::Error>().is_some()
            || e.downcast_ref::<std::io::Error>().is_some()
            || e.downcast_ref::<bench::UsageError>().is_some()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_input_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
