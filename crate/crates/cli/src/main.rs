//! `isacemu` command-line front end.
//!
//! Exit codes: 0 success (all checks pass for `run`), 1 tolerance failure,
//! 2 usage error, 3 invalid scenario or input combination, 4 I/O error,
//! 5 malformed file (parse, format, schema version).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isacemu::chain::{compile_bundles, read_dataset, synthesize_snapshot, write_dataset, CfrDataset};
use isacemu::estimation::export::{write_heatmap_csv, write_heatmap_pgm};
use isacemu::estimation::{Heatmap, WindowKind, DEFAULT_DYNAMIC_RANGE_DB};
use isacemu::pipeline::{estimate, run_scenario, Estimate, EstimationSettings};
use isacemu::report::{RunReport, Tolerances};
use isacemu::scenario::{presets, validate_scenario, Noise, Quantization, SensingScenario, Snapshot};
use isacemu::{write_atomic, Error};

#[derive(Parser)]
#[command(name = "isacemu", version, about = "Multi-target sensing emulation for ISAC base-station testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a scenario into APM + RTS configuration bundles, one per snapshot.
    Compile {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Synthesize one CFR dataset file per snapshot.
    Synthesize {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate targets from a dataset; writes detections and heatmaps.
    Estimate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        estimation: EstimationArgs,
    },
    /// Compile, synthesize, estimate and compare against the scenario truth.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// TOML file overriding default tolerances.
        #[arg(long)]
        tolerances: Option<PathBuf>,
        /// Also write each snapshot's dataset and heatmaps.
        #[arg(long)]
        keep_artifacts: bool,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        estimation: EstimationArgs,
    },
    /// Render a saved run report as a text table.
    Report {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Number of CIR/time samples per snapshot.
    #[arg(long)]
    nt: Option<usize>,
    /// Number of frequency points.
    #[arg(long)]
    nf: Option<usize>,
    /// Use the full measurement sizes (N_t=1000, N_f=1001).
    #[arg(long, conflicts_with_all = ["nt", "nf"])]
    full_scale: bool,
    /// Disable APM quantization.
    #[arg(long, conflicts_with_all = ["phase_bits", "amp_step_db"])]
    ideal: bool,
    #[arg(long)]
    phase_bits: Option<u32>,
    #[arg(long)]
    amp_step_db: Option<f64>,
    /// Add complex white noise at this per-sample SNR.
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct EstimationArgs {
    /// Zero-padding factor on both FFT axes.
    #[arg(long, default_value_t = 4)]
    pad: usize,
    /// Taper applied before the FFTs: none or hanning.
    #[arg(long, default_value = "hanning")]
    window: WindowKind,
}

impl EstimationArgs {
    fn settings(&self) -> EstimationSettings {
        EstimationSettings { pad_t: self.pad, pad_f: self.pad, window: self.window, ..EstimationSettings::default() }
    }
}

fn apply_overrides(s: &mut SensingScenario, o: &Overrides) {
    if o.full_scale {
        s.sweep.n_time = presets::FULL_N_TIME;
        s.sweep.n_freq = presets::FULL_N_FREQ;
    }
    if let Some(nt) = o.nt {
        s.sweep.n_time = nt;
    }
    if let Some(nf) = o.nf {
        s.sweep.n_freq = nf;
    }
    if o.ideal {
        s.quantization = Quantization::Ideal;
    } else if o.phase_bits.is_some() || o.amp_step_db.is_some() {
        let (bits, step) = match s.quantization {
            Quantization::Lattice { phase_bits, amp_step_db } => (phase_bits, amp_step_db),
            Quantization::Ideal => (6, 0.5),
        };
        s.quantization = Quantization::Lattice {
            phase_bits: o.phase_bits.unwrap_or(bits),
            amp_step_db: o.amp_step_db.unwrap_or(step),
        };
    }
    if let Some(snr_db) = o.noise_snr_db {
        s.noise = Some(Noise { snr_db, seed: o.seed });
    }
}

fn load_scenario(path: &Path, o: Option<&Overrides>) -> Result<SensingScenario, Error> {
    let mut s = SensingScenario::load(path)?;
    if let Some(o) = o {
        apply_overrides(&mut s, o);
    }
    validate_scenario(&s).map_err(Error::Validation)?;
    Ok(s)
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn progress(msg: &str) {
    eprintln!("isacemu: {msg}");
}

fn cmd_compile(scenario: &Path, out: &Path, o: &Overrides) -> anyhow::Result<ExitCode> {
    let s = load_scenario(scenario, Some(o))?;
    create_dir(out)?;
    for b in compile_bundles(&s)? {
        let path = out.join(format!("{}.bundle.toml", b.snapshot));
        b.save(&path)?;
        progress(&format!("{}: {} RTS units -> {}", b.snapshot, b.rts_units_used, path.display()));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synthesize(scenario: &Path, out: &Path, o: &Overrides) -> anyhow::Result<ExitCode> {
    let s = load_scenario(scenario, Some(o))?;
    create_dir(out)?;
    for (i, snap) in s.snapshots.iter().enumerate() {
        let d = synthesize_snapshot(&s, snap)?;
        let path = out.join(format!("{}.cfr", snap.label));
        write_dataset(&d, &path)?;
        progress(&format!(
            "[{}/{}] {}: {:?} -> {} ({} bytes)",
            i + 1,
            s.snapshots.len(),
            snap.label,
            d.dims(),
            path.display(),
            d.encoded_len()
        ));
    }
    Ok(ExitCode::SUCCESS)
}

/// Snapshot a dataset belongs to: its metadata label looked up in the
/// scenario, else the snapshot echoed in the metadata itself.
fn dataset_snapshot(d: &CfrDataset, s: &SensingScenario) -> Result<Snapshot, Error> {
    let echoed = SensingScenario::from_toml_str(&d.metadata).ok().and_then(|m| m.snapshots.into_iter().next());
    match echoed {
        Some(e) => Ok(s.snapshot(&e.label).cloned().unwrap_or(e)),
        None if s.snapshots.len() == 1 => Ok(s.snapshots[0].clone()),
        None => Err(Error::InvalidArgument("dataset metadata names no snapshot and the scenario has several".into())),
    }
}

fn write_estimate_outputs(out: &Path, stem: &str, est: &Estimate) -> anyhow::Result<()> {
    let fmt_t = |t: &isacemu::estimation::DetectedTarget| {
        let mut s = format!("peak range_m={:.3}", t.range_m);
        if let Some(v) = t.velocity_mps {
            s += &format!(" velocity_mps={v:.3}");
        }
        if let Some(e) = t.elevation_deg {
            s += &format!(" elevation_deg={e}");
        }
        if let Some(a) = t.azimuth_deg {
            s += &format!(" azimuth_deg={a}");
        }
        s + &format!(" power_db={:.3}", t.power_db)
    };
    let detections = est.detections();
    let json = serde_json::json!({
        "snapshot": stem,
        "detections": detections,
    });
    write_atomic(&out.join(format!("{stem}.detections.json")), (serde_json::to_string_pretty(&json)? + "\n").as_bytes())?;

    match est {
        Estimate::Adtr(e) => {
            let map = Heatmap {
                row_name: "velocity_mps",
                row_axis: &e.rv_map.velocity_axis_mps,
                col_name: "range_m",
                col_axis: &e.rv_map.range_axis_m,
                values_db: &e.rv_map.power_db,
            };
            let mut notes: Vec<String> = e.peaks.targets.iter().map(fmt_t).collect();
            if !e.rv_map.velocity_estimable {
                notes.push("velocity not estimable (single time sample)".into());
            }
            write_heatmap_csv(out.join(format!("{stem}.rv.csv")), &map, &notes)?;
            write_heatmap_pgm(out.join(format!("{stem}.rv.pgm")), &map, DEFAULT_DYNAMIC_RANGE_DB)?;
            for (k, (pas, det)) in e.pas.iter().zip(&e.detections).enumerate() {
                let map = Heatmap {
                    row_name: "elevation_deg",
                    row_axis: &pas.elevation_deg,
                    col_name: "azimuth_deg",
                    col_axis: &pas.azimuth_deg,
                    values_db: &pas.power_db,
                };
                let notes = [fmt_t(det), format!("delay_s={:e}", pas.delay_s)];
                write_heatmap_csv(out.join(format!("{stem}.pas{}.csv", k + 1)), &map, &notes)?;
                write_heatmap_pgm(out.join(format!("{stem}.pas{}.pgm", k + 1)), &map, DEFAULT_DYNAMIC_RANGE_DB)?;
            }
        }
        Estimate::Satr(e) => {
            let map = Heatmap {
                row_name: "range_m",
                row_axis: &e.map.range_m,
                col_name: "angle_deg",
                col_axis: &e.map.angle_deg,
                values_db: &e.map.power_db,
            };
            let notes: Vec<String> = e.detections.iter().map(fmt_t).collect();
            write_heatmap_csv(out.join(format!("{stem}.range_angle.csv")), &map, &notes)?;
            write_heatmap_pgm(out.join(format!("{stem}.range_angle.pgm")), &map, DEFAULT_DYNAMIC_RANGE_DB)?;
        }
    }
    Ok(())
}

fn cmd_estimate(dataset: &Path, scenario: &Path, out: &Path, a: &EstimationArgs) -> anyhow::Result<ExitCode> {
    let s = load_scenario(scenario, None)?;
    let d = read_dataset(dataset)?;
    let snap = dataset_snapshot(&d, &s)?;
    let est = estimate(&d, &s, &snap, &a.settings())?;
    create_dir(out)?;
    write_estimate_outputs(out, &snap.label, &est)?;
    for t in est.detections() {
        println!("{}", serde_json::to_string(t)?);
    }
    if let Estimate::Adtr(e) = &est {
        if e.peaks.incomplete {
            progress(&format!("warning: {} of {} peaks found", e.peaks.targets.len(), snap.targets.len()));
        }
        if !e.rv_map.velocity_estimable {
            progress("velocity not estimable from a single time sample");
        }
    }
    progress(&format!("{}: {} detection(s) -> {}", snap.label, est.detections().len(), out.display()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(
    scenario: &Path,
    out: &Path,
    tolerances: Option<&Path>,
    keep: bool,
    o: &Overrides,
    a: &EstimationArgs,
) -> anyhow::Result<ExitCode> {
    let s = load_scenario(scenario, Some(o))?;
    let tol = match tolerances {
        Some(p) => Tolerances::load(p)?,
        None => Tolerances::default(),
    };
    create_dir(out)?;
    let total = s.snapshots.len();
    let mut done = 0;
    let report = run_scenario(&s, &a.settings(), &tol, |snap, d, est| {
        done += 1;
        progress(&format!("[{done}/{total}] {}: {} detection(s)", snap.label, est.detections().len()));
        if keep {
            write_dataset(d, out.join(format!("{}.cfr", snap.label)))?;
            write_estimate_outputs(out, &snap.label, est).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        Ok(())
    })?;
    let path = out.join("report.json");
    report.save(&path)?;
    print!("{}", report.render());
    progress(&format!("report -> {}", path.display()));
    Ok(if report.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_report(path: &Path) -> anyhow::Result<ExitCode> {
    let r = RunReport::load(path)?;
    print!("{}", r.render());
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. }) => 4,
        Some(Error::Parse { .. } | Error::Format { .. } | Error::Truncated { .. } | Error::SchemaVersion { .. }) => 5,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 4,
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile { scenario, out, overrides } => cmd_compile(scenario, out, overrides),
        Command::Synthesize { scenario, out, overrides } => cmd_synthesize(scenario, out, overrides),
        Command::Estimate { dataset, scenario, out, estimation } => cmd_estimate(dataset, scenario, out, estimation),
        Command::Run { scenario, out, tolerances, keep_artifacts, overrides, estimation } => {
            cmd_run(scenario, out, tolerances.as_deref(), *keep_artifacts, overrides, estimation)
        }
        Command::Report { report } => cmd_report(report),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("isacemu: error: {err}");
            if let Some(Error::Validation(v)) = err.downcast_ref::<Error>() {
                for violation in v {
                    eprintln!("  {violation}");
                }
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
