//! Benchmark harness: sequential baseline plus parallel encodes over a
//! corpus, written as CSV and echoed as a table.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use fic_core::encoder::ChunkShape;
use fic_core::format::reduction_pct;
use fic_core::GrayImage;
use serde::Serialize;

use crate::{encode_with, read_pgm, CodecArgs};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Args)]
pub struct BenchArgs {
    /// Directory of .pgm images.
    corpus: PathBuf,
    /// Image sides to resample each corpus image to; native size if empty.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Worker counts; 1 is the sequential baseline.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    workers: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "16x16")]
    chunks: Vec<ChunkShape>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    image: String,
    side: usize,
    #[serde(rename = "impl")]
    implementation: &'static str,
    workers: usize,
    chunk: String,
    encode_ms: f64,
    speedup: f64,
    size_reduction_pct: f64,
}

/// Box-averages or replicates a square image to `side`.
fn resample(img: &GrayImage, side: usize) -> Result<GrayImage> {
    let src = img.width();
    if img.height() != src {
        bail!(fic_core::Error::NotSquare {
            width: src,
            height: img.height()
        });
    }
    if side == src {
        return Ok(img.clone());
    }
    if side > src && side.is_multiple_of(src) {
        let k = side / src;
        return Ok(GrayImage::from_fn(side, side, |x, y| img.get(x / k, y / k)));
    }
    if side < src && side > 0 && src.is_multiple_of(side) {
        let k = src / side;
        let area = (k * k) as u32;
        return Ok(GrayImage::from_fn(side, side, |x, y| {
            let mut acc = 0u32;
            for dy in 0..k {
                for dx in 0..k {
                    acc += u32::from(img.get(x * k + dx, y * k + dy));
                }
            }
            ((acc + area / 2) / area) as u8
        }));
    }
    bail!(UsageError(format!("cannot resample side {src} to {side}")))
}

fn min_time(
    repeats: usize,
    mut f: impl FnMut() -> fic_core::Result<Vec<u8>>,
) -> Result<(f64, Vec<u8>)> {
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        out = f()?;
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((best, out))
}

fn corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading corpus {}", dir.display()))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        bail!(UsageError(format!("no .pgm files in {}", dir.display())));
    }
    Ok(paths)
}

/// Rows for one image at one side: the sequential baseline, then every
/// parallel configuration that reproduced its bytes.
fn bench_image(name: &str, img: &GrayImage, args: &BenchArgs) -> Result<Vec<BenchRecord>> {
    let params = args.codec.params()?;
    let side = img.width();
    let (seq_ms, seq_bytes) = min_time(args.repeats, || {
        encode_with(img, &params, 1, ChunkShape::default())
    })?;
    let reduction = reduction_pct(seq_bytes.len(), img.pixel_count())?;
    let record = |implementation, workers, chunk: String, ms: f64| BenchRecord {
        image: name.to_string(),
        side,
        implementation,
        workers,
        chunk,
        encode_ms: ms,
        speedup: seq_ms / ms,
        size_reduction_pct: reduction,
    };
    let mut rows = vec![record("sequential", 1, "-".into(), seq_ms)];
    for &workers in args.workers.iter().filter(|&&w| w != 1) {
        for &chunk in &args.chunks {
            let outcome = encode_with(img, &params, workers, chunk)
                .map_err(anyhow::Error::from)
                .and_then(|bytes| {
                    if bytes != seq_bytes {
                        bail!("parallel output differs from sequential");
                    }
                    min_time(args.repeats, || encode_with(img, &params, workers, chunk))
                });
            match outcome {
                Ok((ms, _)) => rows.push(record("parallel", workers, chunk.to_string(), ms)),
                Err(e) => {
                    eprintln!("skipping {name} side {side} workers {workers} chunk {chunk}: {e:#}")
                }
            }
        }
    }
    Ok(rows)
}

pub fn run(args: &BenchArgs) -> Result<()> {
    if args.workers.contains(&0) {
        bail!(UsageError("worker counts must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for path in corpus(&args.corpus)? {
        let name = path
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let img = read_pgm(&path)?;
        let sides = if args.sizes.is_empty() {
            vec![img.width()]
        } else {
            args.sizes.clone()
        };
        for side in sides {
            match resample(&img, side).and_then(|img| bench_image(&name, &img, args)) {
                Ok(r) => rows.extend(r),
                Err(e) => eprintln!("skipping {name} side {side}: {e:#}"),
            }
        }
    }

    let mut csv = csv::Writer::from_path(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    for row in &rows {
        csv.serialize(row)?;
    }
    csv.flush()?;

    println!(
        "{:<16} {:>6} {:<10} {:>7} {:>7} {:>12} {:>8} {:>10}",
        "image", "side", "impl", "workers", "chunk", "encode_ms", "speedup", "reduction%"
    );
    for r in &rows {
        println!(
            "{:<16} {:>6} {:<10} {:>7} {:>7} {:>12.3} {:>8.3} {:>10.3}",
            r.image,
            r.side,
            r.implementation,
            r.workers,
            r.chunk,
            r.encode_ms,
            r.speedup,
            r.size_reduction_pct
        );
    }
    println!("csv={}", args.out.display());
    Ok(())
}
