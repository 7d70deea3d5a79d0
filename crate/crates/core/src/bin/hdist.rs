use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hdist::bench::{
    run_bench, run_mode, summarize, verify, write_records, write_trace, BenchConfig, BenchRecord,
    Mode, VerifyConfig,
};
use hdist::mesh_io::scene::{CloudSource, Decimated, SceneSpec};
use hdist::narrow_phase::{HausdorffConfig, HausdorffResult, Side};
use hdist::{build_index_space, Axis, CloudFormat, Error, R0Policy};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "hdist", version, about = "Exact Hausdorff distance between 3-D point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute H(A, B) for two clouds or one benchmark scene.
    Compute(ComputeArgs),
    /// Compare the pipeline against the all-pairs oracle on random instances.
    Verify(VerifyArgs),
    /// Time the pipeline modes on a benchmark scene and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Bit count: 2^k cells along the longest axis of the target box.
    #[arg(long, default_value_t = hdist::narrow_phase::DEFAULT_BITS)]
    k: u32,
    /// Initial search radius: auto, sqrt3, or a positive multiple of √3.
    #[arg(long, default_value = "auto")]
    r0: R0Policy,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Input clouds: file paths or synthetic:<shape>:<count>[:<seed>].
    /// One input with --translate-ratio or --subsample, two otherwise.
    inputs: Vec<String>,
    /// Force the input format instead of using the file extension.
    #[arg(long, value_parser = ["obj", "ply"])]
    format: Option<String>,
    /// Translation scene: shift a copy of the input by ratio × axis extent.
    #[arg(long)]
    translate_ratio: Option<f64>,
    #[arg(long, default_value = "x")]
    translate_axis: Axis,
    /// Decimation scene with a seeded subsample as the coarse side.
    #[arg(long)]
    subsample: Option<usize>,
    /// Treat the two inputs as unrelated objects (labels the scene only).
    #[arg(long)]
    different: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, default_value = "full")]
    mode: Mode,
    /// Append a result row to this CSV file (header written if new).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the per-sweep broad-phase trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the index space over B (cell index and member count per line).
    #[arg(long)]
    dump_index: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Largest cloud size per side.
    #[arg(long, default_value_t = 2000)]
    max_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    k_min: u32,
    #[arg(long, default_value_t = 8)]
    k_max: u32,
    #[arg(long, default_value = "auto")]
    r0: R0Policy,
    #[arg(long)]
    threads: Option<usize>,
    /// Perturb one result to check that mismatches are reported.
    #[arg(long)]
    self_test: bool,
    /// Print one line per instance.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Bit counts to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "6,7,8")]
    k: Vec<u32>,
    /// Translation ratios to sweep (translation scenes only).
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "full,nois")]
    mode: Vec<Mode>,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value = "auto")]
    r0: R0Policy,
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Verify(a) => Ok(verify_cmd(a)),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn source(s: &str, format: Option<&str>) -> hdist::Result<CloudSource> {
    let src: CloudSource = s.parse()?;
    Ok(match (src, format) {
        (CloudSource::File { path, .. }, Some("obj")) => CloudSource::File {
            path,
            format: Some(CloudFormat::Obj),
        },
        (CloudSource::File { path, .. }, Some(_)) => {
            let format = Some(CloudFormat::detect_ply(&path)?);
            CloudSource::File { path, format }
        }
        (other, _) => other,
    })
}

fn scenes(args: &SceneArgs, ratios: &[f64]) -> hdist::Result<Vec<SceneSpec>> {
    let fmt = args.format.as_deref();
    let inputs = args
        .inputs
        .iter()
        .map(|s| source(s, fmt))
        .collect::<hdist::Result<Vec<_>>>()?;
    let mut ratios = ratios.to_vec();
    if let Some(r) = args.translate_ratio {
        ratios.insert(0, r);
    }
    match (inputs.as_slice(), ratios.is_empty(), args.subsample) {
        ([src], false, None) => Ok(ratios
            .into_iter()
            .map(|ratio| SceneSpec::Translation {
                source: src.clone(),
                axis: args.translate_axis,
                ratio,
            })
            .collect()),
        ([src], true, Some(count)) => Ok(vec![SceneSpec::Decimation {
            original: src.clone(),
            decimated: Decimated::Subsample {
                count,
                seed: args.seed,
            },
        }]),
        ([a, b], true, None) if args.different => Ok(vec![SceneSpec::DifferentObjects {
            a: a.clone(),
            b: b.clone(),
        }]),
        ([a, b], true, None) => Ok(vec![SceneSpec::RawPair {
            a: a.clone(),
            b: b.clone(),
        }]),
        _ => Err(Error::InvalidArgument(
            "give two inputs, or one input with --translate-ratio/--ratios or --subsample".into(),
        )),
    }
}

fn open(path: &Path) -> hdist::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn print_result(label: &str, mode: Mode, r: &HausdorffResult) {
    let t = r.timings();
    let (wa, wb) = r.witness.ab_pair();
    println!("scene      {label}");
    println!("mode       {mode}");
    println!("H          {:?}", r.h);
    println!("h(A,B)     {:?}", r.h_ab);
    println!("h(B,A)     {:?}", r.h_ba);
    println!("witness    A[{wa}] B[{wb}] ({})", r.witness.side);
    for (side, s) in [(Side::AtoB, &r.ab), (Side::BtoA, &r.ba)] {
        if s.fallback {
            println!("side {side}    brute-force fallback (target has no extent)");
        } else if mode != Mode::BruteForce {
            println!(
                "side {side}    reps {} sweeps {} r0 {}·√3 gray {} candidate pairs {}",
                s.representatives, s.iterations, s.r0_multiple, s.gray_queries, s.candidate_pairs
            );
        }
    }
    println!(
        "time       index {:.3}s broad {:.3}s narrow {:.3}s total {:.3}s",
        t.index.as_secs_f64(),
        t.broad.as_secs_f64(),
        t.narrow.as_secs_f64(),
        r.elapsed.as_secs_f64()
    );
}

fn compute(args: ComputeArgs) -> hdist::Result<ExitCode> {
    let specs = scenes(&args.scene, &[])?;
    let cfg = HausdorffConfig {
        bits: args.pipeline.k,
        r0: args.pipeline.r0,
        threads: args.pipeline.threads,
    };
    let scene = specs[0].build()?;
    let result = run_mode(args.mode, &scene.a, &scene.b, &cfg)?;
    if result.fallback() {
        eprintln!("notice: a cloud has all points at one location; that side used brute force");
    }
    print_result(&scene.label, args.mode, &result);

    if let Some(path) = &args.dump_index {
        let space = build_index_space(&scene.b, cfg.bits)?;
        space.write_dump(open(path)?).map_err(io_err(path))?;
    }
    if let Some(path) = &args.trace {
        let mut w = open(path)?;
        write_trace(&mut w, Side::AtoB, &result.ab.trace, true).map_err(io_err(path))?;
        write_trace(&mut w, Side::BtoA, &result.ba.trace, false).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))?;
    }
    if let Some(path) = &args.csv {
        let k = (args.mode != Mode::BruteForce).then_some(cfg.bits);
        let record = BenchRecord::from_result(&scene.label, args.mode, k, 0, &scene.a, &scene.b, &result);
        append_csv(path, &record)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn append_csv(path: &Path, record: &BenchRecord) -> hdist::Result<()> {
    let mut buf = Vec::new();
    write_records(std::slice::from_ref(record), &mut buf)
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    let text = String::from_utf8(buf).expect("csv output is utf-8");
    let body = if path.exists() {
        text.split_once('\n').map(|(_, rest)| rest.to_string()).unwrap_or_default()
    } else {
        text
    };
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    f.write_all(body.as_bytes()).map_err(io_err(path))
}

fn verify_cmd(args: VerifyArgs) -> ExitCode {
    let cfg = VerifyConfig {
        instances: args.instances,
        max_size: args.max_size,
        seed: args.seed,
        bits: args.k_min..=args.k_max,
        r0: args.r0,
        threads: args.threads,
        self_test: args.self_test,
    };
    let report = verify(&cfg);
    for i in &report.instances {
        if args.verbose || !i.passed() {
            println!(
                "{} #{:<4} {:<9} |A|={:<5} |B|={:<5} k={} H={:?} oracle={:?} witness={}{}",
                if i.passed() { "PASS" } else { "FAIL" },
                i.index,
                i.family.name(),
                i.size_a,
                i.size_b,
                i.bits,
                i.h,
                i.oracle_h,
                if i.witness_ok { "ok" } else { "bad" },
                i.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default()
            );
        }
    }
    println!("{}/{} instances match the oracle", report.passed(), report.instances.len());
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn bench(args: BenchArgs) -> hdist::Result<ExitCode> {
    let specs = scenes(&args.scene, &args.ratios)?;
    let mut records = Vec::new();
    let mut consistent = true;
    for scene in specs {
        let cfg = BenchConfig {
            scene,
            bits: args.k.clone(),
            r0: args.r0,
            repetitions: args.repetitions,
            modes: args.mode.clone(),
            threads: args.threads,
        };
        let out = run_bench(&cfg)?;
        eprintln!("{}", out.label);
        for s in summarize(&out.records) {
            let k = s.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
            eprintln!(
                "  {:<6} k={:<3} runs {:<3} min {:.3}s median {:.3}s H {:?}",
                s.mode, k, s.runs, s.min_s, s.median_s, s.h
            );
        }
        if !out.consistent {
            eprintln!("  H differs across runs (max relative deviation {:e})", out.max_rel_deviation);
            consistent = false;
        }
        records.extend(out.records);
    }
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    match &args.csv {
        Some(path) => write_records(&records, open(path)?).map_err(csv_err)?,
        None => write_records(&records, std::io::stdout().lock()).map_err(csv_err)?,
    }
    Ok(if consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    })
}
