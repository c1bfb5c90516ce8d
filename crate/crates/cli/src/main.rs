//! `lzdp` command-line tool. Reports go to stdout as JSON, diagnostics to
//! stderr. Exit status is 0 iff every `pass` flag in the report is true.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lzdp::analysis::{analyze_pair, global_sensitivity_exhaustive, local_sensitivity, pair_report, DEFAULT_BUDGET};
use lzdp::container::{encode_payload, serialize_padded};
use lzdp::dp::{dp_compress, gs_upper_bound, gs_upper_bound_real, seeded_rng, DpParams};
use lzdp::quinstr::{predicted_len, quinstr, verify_lower_bound, WidthMode};
use lzdp::{
    bit_length, compress, decompress, deserialize_blocks, serialize_blocks, Alphabet, CompressionConfig, Error, Text,
    Variant, Window,
};

#[derive(Parser)]
#[command(name = "lzdp", version, about = "LZ77 compression with differentially private length padding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into an unpadded container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Restore the original file from a container (padded or not).
    Decompress { input: PathBuf, output: PathBuf },
    /// Compress and append randomized length padding.
    DpCompress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        dp: DpArgs,
        /// Print the drawn padding length. Testing only.
        #[arg(long, hide = true)]
        reveal_pad: bool,
    },
    /// Strip padding from a padded container and decompress it.
    DpDecompress { input: PathBuf, output: PathBuf },
    /// Classify the blocks of two neighbouring texts.
    Analyze {
        w: PathBuf,
        w_prime: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Local sensitivity of one text, or exhaustive global sensitivity.
    Sensitivity {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Text for local mode.
        #[arg(long, required_if_eq("mode", "local"))]
        input: Option<PathBuf>,
        /// Text length for global mode.
        #[arg(long, required_if_eq("mode", "global"))]
        n: Option<usize>,
        /// Alphabet size for global mode.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u16).range(1..=256))]
        k: u16,
        #[command(flatten)]
        codec: CodecArgs,
        /// Maximum compressor invocations for global mode.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// Enumerate every string instead of one per relabelling class.
        #[arg(long)]
        unpruned: bool,
    },
    /// Build the neighbouring lower-bound strings.
    Quinstr {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=64))]
        m: u64,
        #[arg(long, value_enum, default_value_t = Width::Injective)]
        width: Width,
        /// Compress both strings and check the predicted block counts.
        #[arg(long)]
        verify: bool,
    },
    /// Tabulate the closed-form sensitivity bounds.
    Bounds {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        window: Option<u64>,
        #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
}

#[derive(Args)]
struct CodecArgs {
    /// Sliding-window length; unbounded when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    window: Option<u64>,
    /// Allow copies that overlap the text being produced.
    #[arg(long)]
    self_ref: bool,
    /// "bytes", or the symbols themselves, e.g. "abcd".
    #[arg(long, default_value = "bytes")]
    alphabet: String,
}

impl CodecArgs {
    fn config(&self) -> Result<CompressionConfig> {
        let window = self.window.map_or(Window::Unbounded, |w| Window::Bounded(w as usize));
        let variant = if self.self_ref {
            Variant::SelfReferencing
        } else {
            Variant::NonOverlapping
        };
        Ok(CompressionConfig::new(window, variant)?)
    }

    fn alphabet(&self) -> Result<Alphabet> {
        if self.alphabet == "bytes" {
            return Ok(Alphabet::bytes());
        }
        Alphabet::new(self.alphabet.as_bytes().to_vec()).with_context(|| format!("invalid alphabet {:?}", self.alphabet))
    }

    fn read_text(&self, path: &Path) -> Result<Text> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        Text::from_labels(self.alphabet()?, &bytes).with_context(|| format!("in {}", path.display()))
    }
}

#[derive(Args)]
struct DpArgs {
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: f64,
    #[arg(long, value_parser = parse_delta)]
    delta: f64,
    /// Sensitivity in bits; defaults to the closed-form bound.
    #[arg(long)]
    gs: Option<u64>,
    /// RNG seed; falls back to LZDP_SEED, then to OS entropy.
    #[arg(long, env = "LZDP_SEED")]
    seed: Option<u64>,
}

fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("epsilon must be positive and finite".into())
    }
}

fn parse_delta(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("delta must lie in (0, 1)".into())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Local,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum Width {
    /// ceil(log2 m)-bit codes, truncated
    #[value(name = "paper")]
    Compact,
    /// codes wide enough for every index up to 2m
    Injective,
}

/// A JSON report and whether all of its checks passed.
struct Report {
    body: Value,
    pass: bool,
}

impl Report {
    fn ok(body: Value) -> Self {
        Self { body, pass: true }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn cmd_compress(input: &Path, output: &Path, codec: &CodecArgs) -> Result<Report> {
    let text = codec.read_text(input)?;
    let file = compress(&text, codec.config()?);
    write_file(output, &serialize_blocks(&file)?)?;
    let bits = bit_length(&file);
    let ratio = if text.is_empty() {
        json!("empty")
    } else {
        json!(bits as f64 / (8 * text.len()) as f64)
    };
    Ok(Report::ok(json!({ "n": text.len(), "t": file.t(), "payload_bits": bits, "ratio": ratio })))
}

fn cmd_decompress(input: &Path, output: &Path, require_padded: bool) -> Result<Report> {
    let bytes = read_file(input)?;
    let file = deserialize_blocks(&bytes).with_context(|| format!("in {}", input.display()))?;
    let padded = bytes.get(5).is_some_and(|f| f & lzdp::container::FLAG_PADDED != 0);
    if require_padded && !padded {
        bail!("{} is not a padded container", input.display());
    }
    let text = decompress(&file)?;
    write_file(output, &text.to_labels())?;
    Ok(Report::ok(json!({ "n": file.n(), "t": file.t(), "padded": padded })))
}

fn default_gs(text: &Text, config: CompressionConfig) -> Result<u64> {
    let n = text.len().max(1);
    let w = config.window.effective(n).max(1);
    Ok(gs_upper_bound(n, w, text.alphabet().size(), config.variant)?)
}

fn cmd_dp_compress(input: &Path, output: &Path, codec: &CodecArgs, dp: &DpArgs, reveal_pad: bool) -> Result<Report> {
    let text = codec.read_text(input)?;
    let config = codec.config()?;
    let gs = match dp.gs {
        Some(gs) => gs,
        None => default_gs(&text, config)?,
    };
    let seed = dp.seed.unwrap_or_else(rand::random);
    let params = DpParams::new(dp.epsilon, dp.delta, gs, seed)?;
    let mut rng = seeded_rng(seed);
    let padded = dp_compress(&text, config, &params, &mut rng)?;
    let file = compress(&text, config);
    write_file(output, &serialize_padded(&file, &padded.bits)?)?;
    let mut body = json!({
        "payload_bits": encode_payload(&file)?.len(),
        "total_bits": padded.total_bits(),
        "k": params.offset(),
        "gs_bits": gs,
    });
    if reveal_pad {
        body["p"] = json!(padded.p);
    }
    Ok(Report::ok(body))
}

fn cmd_analyze(w: &Path, w_prime: &Path, codec: &CodecArgs) -> Result<Report> {
    let a = codec.read_text(w)?;
    let b = codec.read_text(w_prime)?;
    let pa = analyze_pair(&a, &b, codec.config()?)?;
    let report = pair_report(&pa);
    Ok(Report {
        pass: report.pass(),
        body: serde_json::to_value(&report)?,
    })
}

fn cmd_sensitivity(
    mode: Mode,
    input: Option<&Path>,
    n: Option<usize>,
    k: usize,
    codec: &CodecArgs,
    budget: u128,
    unpruned: bool,
) -> Result<Report> {
    let config = codec.config()?;
    match mode {
        Mode::Local => {
            let text = codec.read_text(input.expect("required by clap"))?;
            if text.is_empty() {
                bail!("local sensitivity needs a nonempty text");
            }
            let n = text.len();
            let k = text.alphabet().size();
            let ls = local_sensitivity(&text, config);
            let bound = gs_upper_bound(n, config.window.effective(n), k, config.variant)?;
            Ok(Report {
                pass: ls.bits <= bound,
                body: json!({
                    "mode": "local", "n": n, "k": k, "W": config.window.effective(n),
                    "variant": config.variant, "bits": ls.bits, "block_gap": ls.block_gap,
                    "witness": ls.witness.map(|(j, s)| json!({ "j": j, "symbol": s })),
                    "bound": bound, "pass": ls.bits <= bound,
                }),
            })
        }
        Mode::Global => {
            let n = n.expect("required by clap");
            let w = config.window.effective(n);
            match global_sensitivity_exhaustive(n, k, config, budget, !unpruned) {
                Ok(gs) => {
                    let bound = gs_upper_bound(n, w, k, config.variant)?;
                    let pass = gs.bits <= bound;
                    let mut body = serde_json::to_value(&gs)?;
                    body["mode"] = json!("global");
                    body["W"] = json!(w);
                    body["variant"] = json!(config.variant);
                    body["bound"] = json!(bound);
                    body["pass"] = json!(pass);
                    Ok(Report { body, pass })
                }
                Err(Error::BudgetExceeded { required, budget }) => Ok(Report {
                    pass: false,
                    body: json!({
                        "mode": "global", "n": n, "k": k, "refused": "budget_exceeded",
                        "required": required.to_string(), "budget": budget.to_string(), "pass": false,
                    }),
                }),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn cmd_quinstr(m: usize, width: Width, verify: bool) -> Result<Report> {
    let mode = match width {
        Width::Compact => WidthMode::Compact,
        Width::Injective => WidthMode::Injective,
    };
    if verify {
        let r = verify_lower_bound(m, mode, CompressionConfig::unbounded())?;
        return Ok(Report {
            pass: r.pass,
            body: serde_json::to_value(&r)?,
        });
    }
    let q = quinstr(m, mode)?;
    let digits = |v: &[u8]| v.iter().map(|&d| (b'0' + d) as char).collect::<String>();
    Ok(Report::ok(json!({
        "m": m, "width_mode": mode, "b": q.b, "n": q.n(), "predicted_len": predicted_len(m, q.b),
        "j": q.j, "w": digits(&q.w), "w_prime": digits(&q.w_prime),
    })))
}

fn cmd_bounds(n: usize, window: Option<usize>, k: usize) -> Result<Report> {
    let mut rows = Vec::new();
    for variant in [Variant::NonOverlapping, Variant::SelfReferencing] {
        rows.push(json!({
            "variant": variant, "form": "n", "window": n,
            "bits": gs_upper_bound(n, n, k, variant)?,
            "real": gs_upper_bound_real(n, n, k, variant)?,
        }));
        match window.filter(|&w| w < n) {
            Some(w) => rows.push(json!({
                "variant": variant, "form": "window", "window": w,
                "bits": gs_upper_bound(n, w, k, variant)?,
                "real": gs_upper_bound_real(n, w, k, variant)?,
            })),
            None => rows.push(json!({
                "variant": variant, "form": "window", "window": window, "bits": null,
                "note": "window form applies only when window < n",
            })),
        }
    }
    Ok(Report::ok(json!({ "n": n, "k": k, "window": window, "rows": rows })))
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Compress { input, output, codec } => cmd_compress(&input, &output, &codec),
        Command::Decompress { input, output } => cmd_decompress(&input, &output, false),
        Command::DpCompress {
            input,
            output,
            codec,
            dp,
            reveal_pad,
        } => cmd_dp_compress(&input, &output, &codec, &dp, reveal_pad),
        Command::DpDecompress { input, output } => cmd_decompress(&input, &output, true),
        Command::Analyze { w, w_prime, codec } => cmd_analyze(&w, &w_prime, &codec),
        Command::Sensitivity {
            mode,
            input,
            n,
            k,
            codec,
            budget,
            unpruned,
        } => {
            if matches!(mode, Mode::Global) && codec.alphabet != "bytes" {
                bail!("global mode takes --k, not --alphabet");
            }
            cmd_sensitivity(mode, input.as_deref(), n, k as usize, &codec, budget, unpruned)
        }
        Command::Quinstr { m, width, verify } => cmd_quinstr(m as usize, width, verify),
        Command::Bounds { n, window, k } => cmd_bounds(n as usize, window.map(|w| w as usize), k as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            println!("{}", report.body);
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
