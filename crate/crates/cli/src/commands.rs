use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use seqentropy::event::{intern_rows, read_rows};
use seqentropy::{
    entropy_series, parse_events, run_ensemble, segment, validate, CheckpointStats, Checkpoints,
    EnsembleConfig, EnsembleStats, EntropySnapshot, EventSequence, Measure, Role, SegmentSpec,
    Violation,
};

use crate::args::{
    AnalyzeArgs, BaselineArgs, EnsembleArgs, InputArgs, SegmentArgs, SeriesArgs, ValidateArgs,
    ZscoreArgs,
};
use crate::output::{get_f64, get_i64, Cell, Records, Table};

#[derive(Debug, Clone, Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    master_seed: Option<u64>,
    inputs: Vec<InputDigest>,
}

fn write_manifest<C: Serialize>(
    path: &Path,
    command: &'static str,
    config: &C,
    master_seed: Option<u64>,
    inputs: Vec<InputDigest>,
) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_BIN_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        master_seed,
        inputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn read_digested(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = InputDigest {
        path: path.to_owned(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok((bytes, digest))
}

fn load(input: &InputArgs) -> Result<(EventSequence, InputDigest)> {
    let (bytes, digest) = read_digested(&input.input)?;
    let seq = parse_events(bytes.as_slice(), &input.to_format()?)
        .with_context(|| format!("cannot parse {}", input.input.display()))?;
    ensure!(!seq.is_empty(), "{}: no events", input.input.display());
    Ok((seq, digest))
}

fn split(seq: EventSequence, segments: &Option<Vec<i64>>) -> Result<Vec<EventSequence>> {
    match segments {
        Some(bounds) => Ok(segment(&seq, &SegmentSpec::new(bounds.clone())?)),
        None => Ok(vec![seq]),
    }
}

fn checkpoints(series: &SeriesArgs) -> Checkpoints {
    Checkpoints::Stride(series.stride as usize)
}

fn ensemble_config(series: &SeriesArgs, ens: &EnsembleArgs) -> EnsembleConfig {
    EnsembleConfig {
        replicas: ens.replicas as usize,
        selector: ens.selector.into(),
        role: series.role.into(),
        checkpoints: checkpoints(series),
        master_seed: ens.seed,
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub const ANALYZE_COLUMNS: [&str; 16] = [
    "segment",
    "event_index",
    "timestamp",
    "n",
    "s1",
    "s2",
    "s3",
    "s1_max",
    "s2_max",
    "s3_max",
    "s1_norm",
    "s2_norm",
    "s3_norm",
    "s1_degenerate",
    "s2_degenerate",
    "s3_degenerate",
];

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let (seq, digest) = load(&args.input)?;
    let role: Role = args.series.role.into();
    let mut table = Table::new(cols(&ANALYZE_COLUMNS));
    for (seg, part) in split(seq, &args.series.segments)?.iter().enumerate() {
        for snap in entropy_series(part, role, &checkpoints(&args.series))? {
            let mut row = vec![
                Cell::Int(seg as i64),
                Cell::Int(snap.event_index as i64),
                Cell::Int(snap.timestamp),
                Cell::Int(snap.nodes as i64),
            ];
            row.extend(snap.entropy.iter().map(|&v| Cell::Num(v)));
            row.extend(snap.max_entropy.iter().map(|&v| Cell::Num(v)));
            row.extend(snap.normalized.iter().map(|&v| Cell::Num(v)));
            row.extend(snap.degenerate.iter().map(|&v| Cell::Bool(v)));
            table.push(row);
        }
    }
    table.write_file(&args.output.out, args.output.emit)?;
    write_manifest(
        &manifest_path(&args.output.out),
        "analyze",
        args,
        None,
        vec![digest],
    )
}

fn baseline_columns() -> Vec<String> {
    let mut c = cols(&["segment", "event_index", "timestamp"]);
    for m in Measure::ALL {
        c.push(format!("{}_mean", m.name()));
        c.push(format!("{}_sd", m.name()));
    }
    c
}

pub fn baseline(args: &BaselineArgs) -> Result<()> {
    let (seq, digest) = load(&args.input)?;
    let config = ensemble_config(&args.series, &args.ensemble);
    let mut table = Table::new(baseline_columns());
    for (seg, part) in split(seq, &args.series.segments)?.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let stats = run_ensemble(part, &config).with_context(|| format!("segment {seg}"))?;
        for row in &stats.rows {
            let mut cells = vec![
                Cell::Int(seg as i64),
                Cell::Int(row.event_index as i64),
                Cell::Int(row.timestamp),
            ];
            for m in Measure::ALL {
                cells.push(Cell::Num(row.mean(m)));
                cells.push(Cell::Num(row.sd(m)));
            }
            table.push(cells);
        }
    }
    table.write_file(&args.output.out, args.output.emit)?;
    write_manifest(
        &manifest_path(&args.output.out),
        "baseline",
        args,
        Some(args.ensemble.seed),
        vec![digest],
    )
}

/// Real series and ensemble statistics of one segment.
struct SegmentPair {
    segment: i64,
    real: Vec<EntropySnapshot>,
    stats: EnsembleStats,
}

pub fn zscore(args: &ZscoreArgs) -> Result<()> {
    let (pairs, digests, seed) = match args.input_args() {
        Some(input) => {
            let (seq, digest) = load(&input)?;
            let config = ensemble_config(&args.series, &args.ensemble);
            let mut pairs = Vec::new();
            for (seg, part) in split(seq, &args.series.segments)?.iter().enumerate() {
                if part.is_empty() {
                    continue;
                }
                pairs.push(SegmentPair {
                    segment: seg as i64,
                    real: entropy_series(part, config.role, &config.checkpoints)?,
                    stats: run_ensemble(part, &config).with_context(|| format!("segment {seg}"))?,
                });
            }
            (pairs, vec![digest], Some(args.ensemble.seed))
        }
        None => {
            let real_path = args.real.as_ref().expect("clap enforces --real");
            let stats_path = args.stats.as_ref().expect("clap enforces --stats");
            let (_, real_digest) = read_digested(real_path)?;
            let (_, stats_digest) = read_digested(stats_path)?;
            let pairs = pair_from_files(
                &Records::read(real_path)?.rows,
                &Records::read(stats_path)?.rows,
            )?;
            (pairs, vec![real_digest, stats_digest], None)
        }
    };

    let mut columns = cols(&["segment", "event_index", "timestamp"]);
    for m in Measure::ALL {
        columns.push(format!("z_{}", m.name()));
        if args.trend {
            columns.push(format!("z_{}_trend", m.name()));
            columns.push(format!("z_{}_trend_sd", m.name()));
        }
    }
    let mut table = Table::new(columns);
    for pair in &pairs {
        let series = Measure::ALL
            .iter()
            .map(|&m| seqentropy::zscore_series(&pair.real, &pair.stats, m))
            .collect::<seqentropy::Result<Vec<_>>>()
            .with_context(|| format!("segment {}", pair.segment))?;
        let trends: Vec<_> = series
            .iter()
            .map(|s| s.trend(args.trend_x.into()).ok())
            .collect();
        for (i, snap) in pair.real.iter().enumerate() {
            let mut row = vec![
                Cell::Int(pair.segment),
                Cell::Int(snap.event_index as i64),
                Cell::Int(snap.timestamp),
            ];
            for (s, fit) in series.iter().zip(&trends) {
                let point = s.points[i];
                row.push(point.z.into());
                if args.trend {
                    let x = match args.trend_x {
                        crate::args::TrendAxisArg::Index => point.event_index as f64,
                        crate::args::TrendAxisArg::Timestamp => point.timestamp as f64,
                    };
                    row.push(fit.map(|f| f.at(x)).into());
                    row.push(fit.map(|f| f.residual_sd).into());
                }
            }
            table.push(row);
        }
    }
    table.write_file(&args.output.out, args.output.emit)?;
    write_manifest(
        &manifest_path(&args.output.out),
        "zscore",
        args,
        seed,
        digests,
    )
}

/// Rebuilds per-segment series from `analyze` and `baseline` output rows.
/// Both files must list the same checkpoints in the same order.
fn pair_from_files(
    real: &[Map<String, Value>],
    stats: &[Map<String, Value>],
) -> Result<Vec<SegmentPair>> {
    if real.len() != stats.len() {
        bail!(
            "checkpoint mismatch: {} real rows vs {} baseline rows (different stride or segments?)",
            real.len(),
            stats.len()
        );
    }
    let mut pairs: Vec<SegmentPair> = Vec::new();
    for (line, (r, s)) in real.iter().zip(stats).enumerate() {
        let key = |row: &Map<String, Value>| -> Result<(i64, i64, i64)> {
            Ok((
                get_i64(row, "segment")?,
                get_i64(row, "event_index")?,
                get_i64(row, "timestamp")?,
            ))
        };
        let (seg, event_index, timestamp) =
            key(r).with_context(|| format!("real row {}", line + 1))?;
        let stats_key = key(s).with_context(|| format!("baseline row {}", line + 1))?;
        if (seg, event_index, timestamp) != stats_key {
            bail!(
                "checkpoint mismatch at row {}: real (segment {seg}, index {event_index}, t {timestamp}) vs baseline (segment {}, index {}, t {})",
                line + 1,
                stats_key.0,
                stats_key.1,
                stats_key.2
            );
        }

        let num = |row: &Map<String, Value>, k: &str| get_f64(row, k);
        let snap = EntropySnapshot {
            event_index: event_index as usize,
            timestamp,
            nodes: get_i64(r, "n")? as usize,
            role: Role::Sender,
            entropy: [num(r, "s1")?, num(r, "s2")?, num(r, "s3")?],
            max_entropy: [num(r, "s1_max")?, num(r, "s2_max")?, num(r, "s3_max")?],
            normalized: [num(r, "s1_norm")?, num(r, "s2_norm")?, num(r, "s3_norm")?],
            degenerate: [false; 3],
        };
        let mut row = CheckpointStats {
            event_index: event_index as usize,
            timestamp,
            mean: [0.0; 6],
            sd: [0.0; 6],
            min: [f64::NAN; 6],
            max: [f64::NAN; 6],
        };
        for m in Measure::ALL {
            row.mean[m.index()] = num(s, &format!("{}_mean", m.name()))?;
            row.sd[m.index()] = num(s, &format!("{}_sd", m.name()))?;
        }

        match pairs.last_mut() {
            Some(p) if p.segment == seg => {
                p.real.push(snap);
                p.stats.rows.push(row);
            }
            _ => pairs.push(SegmentPair {
                segment: seg,
                real: vec![snap],
                stats: EnsembleStats {
                    replicas: 0,
                    master_seed: 0,
                    rows: vec![row],
                },
            }),
        }
    }
    Ok(pairs)
}

/// Returns whether the input is valid.
pub fn validate_cmd(args: &ValidateArgs) -> Result<bool> {
    let (bytes, digest) = read_digested(&args.input.input)?;
    let rows = read_rows(bytes.as_slice(), &args.input.to_format()?)
        .with_context(|| format!("cannot read {}", args.input.input.display()))?;
    let (events, names) = intern_rows(&rows);
    let report = validate(&events);

    let mut text = String::new();
    for v in &report.violations {
        let line = match *v {
            Violation::SelfLoop { index, node } => format!(
                "line {}: self-loop on node `{}`",
                rows[index].line,
                names[node.index()]
            ),
            Violation::Ordering {
                index,
                timestamp,
                previous,
            } => format!(
                "line {}: timestamp {timestamp} precedes previous timestamp {previous}",
                rows[index].line
            ),
        };
        text.push_str(&line);
        text.push('\n');
    }
    if report.is_empty() {
        text.push_str(&format!(
            "valid: {} events, {} nodes\n",
            events.len(),
            names.len()
        ));
    } else {
        text.push_str(&format!(
            "invalid: {} self-loop(s), {} ordering violation(s) in {} events\n",
            report.self_loops(),
            report.ordering(),
            events.len()
        ));
    }

    match &args.out {
        Some(out) => {
            fs::write(out, &text).with_context(|| format!("cannot write {}", out.display()))?;
            write_manifest(&manifest_path(out), "validate", args, None, vec![digest])?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report.is_empty())
}

pub fn segment_cmd(args: &SegmentArgs) -> Result<()> {
    let (seq, digest) = load(&args.input)?;
    let spec = SegmentSpec::new(args.segments.clone())?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for (i, part) in segment(&seq, &spec).iter().enumerate() {
        let path = args.out.join(format!("segment-{i:03}.csv"));
        let file =
            fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        part.write_csv(file)?;
    }
    write_manifest(
        &args.out.join("manifest.json"),
        "segment",
        args,
        None,
        vec![digest],
    )
}
