//! `kpsc` command line: encode, decode, bench and inspect.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    bits_per_point, compression_ratio, fixed_baseline_bits, run_matrix, synth_generate, write_csv,
    write_json, BenchInput, MatrixSpec, ModeConfig, SynthKind, SynthParams,
};
use crate::codec::{decode_stream, encode_sequence_with, CodecConfig, DecodeOptions};
use crate::ingest::{
    parse_mot, parse_profile_text, read_kpjson, resolve_profile, write_kpjson, QuantSpec,
};
use crate::model::{IncidenceProfile, Sequence};
use crate::modesel::ModeWeights;
use crate::predict::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "kpsc",
    version,
    about = "Lossless key-point sequence compression"
)]
pub struct Cli {
    /// Print extra detail.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a kpjson or MOT file into a .kpsc stream.
    Encode(EncodeArgs),
    /// Expand a .kpsc stream back into kpjson.
    Decode(DecodeArgs),
    /// Run the evaluation matrix and write a report.
    Bench(BenchArgs),
    /// Describe an existing .kpsc stream.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Kpjson,
    Mot,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "kpjson")]
    pub format: InputFormat,
    /// Builtin profile the input must use (bbox2d, box3d, skeleton15, face68).
    #[arg(long, conflicts_with = "profile_file")]
    pub profile: Option<String>,
    /// Text profile description: `name N D` then one `from to` edge per line.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    /// Vote weights for t-1, t-2 and the spatial parent.
    #[arg(long, value_parser = parse_weights, default_value = "2,1,2")]
    pub weights: ModeWeights,
    /// Grid units per input unit, `N/D` or `N`. Quantizes MOT input; for
    /// kpjson it replaces the scale recorded in the document.
    #[arg(long)]
    pub scale: Option<QuantSpec>,
    /// Output path; defaults to the input with a .kpsc extension.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    /// Output kpjson path; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Generate one synthetic sequence of this kind per seed.
    #[arg(long, value_parser = parse_kind, required_unless_present = "input", conflicts_with = "input")]
    pub synthetic: Option<SynthKind>,
    /// kpjson files to evaluate.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub skips: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_sigma, default_value = "0", allow_negative_numbers = true)]
    pub sigmas: Vec<f64>,
    /// Seed for noise and synthetic data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coder configurations: multimodal, temporal, spatial_temporal,
    /// trajectory, independent.
    #[arg(long, value_delimiter = ',', value_parser = parse_config, default_value = "multimodal")]
    pub configs: Vec<ModeConfig>,
    #[arg(long, value_parser = parse_weights, default_value = "2,1,2")]
    pub weights: ModeWeights,
    /// Profile of synthetic sequences.
    #[arg(long, default_value = "skeleton15")]
    pub profile: String,
    #[arg(long, default_value_t = 3)]
    pub objects: usize,
    #[arg(long, default_value_t = 60)]
    pub frames: usize,
    #[arg(long, default_value_t = 2.0)]
    pub step_std: f64,
    #[arg(long, default_value_t = 0.0)]
    pub occlusion: f64,
    /// Number of synthetic sequences, seeded `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub input: PathBuf,
}

fn parse_weights(s: &str) -> Result<ModeWeights, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err("expected three comma-separated weights A,B,C".into());
    };
    let w = |v: &str| {
        v.parse::<u8>()
            .map_err(|_| format!("weight '{v}' is not in 1..=255"))
    };
    ModeWeights::new(w(a)?, w(b)?, w(c)?).map_err(|e| e.to_string())
}

fn parse_sigma(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("sigma must be non-negative, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_kind(s: &str) -> Result<SynthKind, String> {
    s.parse()
        .map_err(|e: crate::bench::BenchError| e.to_string())
}

fn parse_config(s: &str) -> Result<ModeConfig, String> {
    s.parse()
        .map_err(|e: crate::bench::BenchError| e.to_string())
}

pub fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Encode(args) => cmd_encode(&args, cli.verbose, &mut out),
        Command::Decode(args) => cmd_decode(&args, &mut out),
        Command::Bench(args) => cmd_bench(&args, &mut out),
        Command::Inspect(args) => cmd_inspect(&args, &mut out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn requested_profile(args: &EncodeArgs) -> Result<Option<IncidenceProfile>> {
    if let Some(name) = &args.profile {
        return Ok(Some(resolve_profile(name)?));
    }
    if let Some(path) = &args.profile_file {
        let profile =
            parse_profile_text(&read_text(path)?).with_context(|| format!("{}", path.display()))?;
        return Ok(Some(profile));
    }
    Ok(None)
}

pub fn cmd_encode(args: &EncodeArgs, verbose: bool, out: &mut impl Write) -> Result<()> {
    let profile = requested_profile(args)?;
    let text = read_text(&args.input)?;
    let context = || format!("{}", args.input.display());
    let (seq, scale) = match args.format {
        InputFormat::Kpjson => {
            let doc = read_kpjson(&text).with_context(context)?;
            (doc.sequence, args.scale.unwrap_or(doc.scale))
        }
        InputFormat::Mot => {
            let scale = args.scale.unwrap_or_default();
            (parse_mot(&text, scale).with_context(context)?, scale)
        }
    };
    if let Some(p) = profile {
        if p != seq.profile {
            bail!(
                "profile mismatch: input uses '{}', requested '{}'",
                seq.profile.name,
                p.name
            );
        }
    }
    let config = CodecConfig {
        weights: args.weights,
        scale,
        ..CodecConfig::default()
    };
    let stream = encode_sequence_with(&seq, &config)?;
    let bytes = stream.to_bytes()?;
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| args.input.with_extension("kpsc"));
    fs::write(&path, &bytes).with_context(|| format!("cannot write {}", path.display()))?;

    let stats = &stream.stats;
    write!(
        out,
        "{}: {} frames, {} points, {} bytes",
        path.display(),
        seq.frames.len(),
        stats.points(),
        bytes.len()
    )?;
    if stats.points() > 0 {
        let baseline = fixed_baseline_bits(&seq)?;
        let ratio = compression_ratio(stream.payload.len() as u64 * 8, baseline)?;
        write!(
            out,
            ", {:.3} bits/point, {:.2}% of the 16-bit baseline",
            bits_per_point(&stream)?,
            ratio
        )?;
    }
    writeln!(out)?;
    if verbose {
        write_mode_counts(out, &stats.mode_counts)?;
    }
    Ok(())
}

pub fn cmd_decode(args: &DecodeArgs, out: &mut impl Write) -> Result<()> {
    let bytes =
        fs::read(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let decoded = decode_stream(&bytes, &DecodeOptions::default())
        .with_context(|| format!("{}", args.input.display()))?;
    let text = write_kpjson(&decoded.sequence, decoded.header.scale);
    match &args.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs, out: &mut impl Write) -> Result<()> {
    let mut inputs = Vec::new();
    if let Some(kind) = args.synthetic {
        let profile = resolve_profile(&args.profile)?;
        for k in 0..args.count {
            let seed = args.seed.wrapping_add(k);
            let params = SynthParams {
                objects: args.objects,
                frames: args.frames,
                step_std: args.step_std,
                occlusion: args.occlusion,
                ..SynthParams::new(kind, profile.clone(), seed)
            };
            inputs.push(BenchInput {
                name: format!("{kind}-{seed}"),
                sequence: synth_generate(&params)?,
            });
        }
    }
    for path in &args.input {
        let sequence: Sequence = read_kpjson(&read_text(path)?)
            .with_context(|| format!("{}", path.display()))?
            .sequence;
        inputs.push(BenchInput {
            name: path.display().to_string(),
            sequence,
        });
    }
    let spec = MatrixSpec {
        skips: args.skips.clone(),
        sigmas: args.sigmas.clone(),
        seed: args.seed,
        configs: args.configs.clone(),
        weights: args.weights,
    };
    let rows = run_matrix(&inputs, &spec)?;
    if let Some(path) = &args.out_csv {
        let file =
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        write_csv(&rows, io::BufWriter::new(file))?;
    }
    if let Some(path) = &args.out_json {
        let file =
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        write_json(&rows, io::BufWriter::new(file))?;
    }
    if args.out_csv.is_none() && args.out_json.is_none() {
        write_csv(&rows, &mut *out)?;
    }
    Ok(())
}

pub fn cmd_inspect(args: &InspectArgs, out: &mut impl Write) -> Result<()> {
    let bytes =
        fs::read(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let decoded = decode_stream(&bytes, &DecodeOptions::default())
        .with_context(|| format!("{}", args.input.display()))?;
    let h = &decoded.header;
    let stats = &decoded.stats;
    let kind = match h.builtin() {
        Some(_) => "builtin",
        None => "custom",
    };
    writeln!(out, "version: {}", h.version)?;
    writeln!(
        out,
        "profile: {} ({kind}, N={}, D={}, {} edges)",
        h.profile.name,
        h.profile.n,
        h.profile.d,
        h.profile.edges.len()
    )?;
    writeln!(
        out,
        "weights: {},{},{}",
        h.weights.prev1, h.weights.prev2, h.weights.spatial
    )?;
    writeln!(out, "scale: {}", h.scale)?;
    writeln!(out, "frames: {}", h.frame_count)?;
    writeln!(out, "points: {}", stats.points())?;
    writeln!(
        out,
        "bytes: {} (header {}, payload {})",
        bytes.len(),
        bytes.len() as u64 - stats.total_bits.div_ceil(8),
        stats.total_bits.div_ceil(8)
    )?;
    writeln!(
        out,
        "payload bits: {} (aux {}, coordinates {})",
        stats.total_bits, stats.aux_bits, stats.coord_bits
    )?;
    write_mode_counts(out, &stats.mode_counts)?;
    if !stats.frames.is_empty() {
        writeln!(out, "frame,objects,points,bits,aux_bits")?;
        for f in &stats.frames {
            writeln!(
                out,
                "{},{},{},{},{}",
                f.index, f.objects, f.points, f.bits, f.aux_bits
            )?;
        }
    }
    Ok(())
}

fn write_mode_counts(out: &mut impl Write, counts: &[u64; 4]) -> io::Result<()> {
    let parts: Vec<String> = Mode::ALL
        .iter()
        .map(|m| format!("{} {}", m.name(), counts[m.tag() as usize]))
        .collect();
    writeln!(out, "modes: {}", parts.join(", "))
}
