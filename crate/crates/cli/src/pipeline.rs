//! Staged pipeline. Each stage reads the previous stage's artifacts from
//! the output directory and writes its own, so `run` and a sequence of
//! individual stage invocations produce identical bytes.
//!
//! Artifacts: `trace.csv`/`trace.meta` (+ `bank.csv`), `channel.csv`,
//! `classification.csv`, `gaussianity.csv` + `partition.meta`,
//! `whitening_summary.csv` (+ optional `correlation_p*.csv`),
//! `spectra.csv`, `capacity_report.csv` + `allocations.csv`, and the four
//! report SVGs.

use crate::config::{ChannelKind, NoiseKind, PipelineConfig};
use crate::plot::{line_chart, Series};
use crate::seed::stage_seed;
use plc_lab_core::analysis::{
    classify_slots, gaussianity_search, write_classification_csv, write_gaussianity_csv,
    GaussianityParams, NoiseClass, PortionPartition, SlotClassification,
};
use plc_lab_core::capacity::{
    portion_spectra, sweep_from_spectra, Mode, PortionSpectrum, Scope, SnrSweepOutput,
    SweepCalibration, SweepConfig,
};
use plc_lab_core::channel::{
    load_channel, save_channel, synth_channel, write_frequency_response_csv, MimoChannel,
};
use plc_lab_core::noisegen::{
    gen_awgn, generate_fresh, nassar_generate, read_trace_csv, synth_filter_bank, write_bank_csv,
    write_trace_csv, NassarModel, NassarRegion, NoiseTrace, RegionStatePolicy,
};
use plc_lab_core::whitening::{
    empirical_covariance, estimate_autocorr, make_whitener, stack_portion_vectors, whiten_block,
    write_correlation_csv,
};
use plc_lab_core::{Mat, Real};
use std::fmt;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn fail<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

fn artifact(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

fn require_artifact(out: &Path, name: &str, stage: &'static str) -> Result<PathBuf, PipelineError> {
    let path = artifact(out, name);
    if !path.exists() {
        return Err(PipelineError {
            stage,
            message: format!("missing prior-stage artifact {}", path.display()),
        });
    }
    Ok(path)
}

/// Full pipeline: every stage in order.
pub fn run(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    generate(cfg, out)?;
    classify(cfg, out)?;
    gaussianity(cfg, out)?;
    whiten(cfg, out)?;
    capacity(cfg, out)?;
    sweep(cfg, out)?;
    report(cfg, out)?;
    Ok(())
}

/// Synthesizes or ingests the noise trace (plus the filter bank when the
/// FRESH generator is selected).
pub fn generate(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "noise.generate";
    std::fs::create_dir_all(out).map_err(fail(STAGE))?;
    let trace_path = artifact(out, "trace.csv");
    match cfg.noise_kind {
        NoiseKind::Fresh => {
            let bank = synth_filter_bank(
                stage_seed(cfg.seed, "noise.bank"),
                cfg.noise_branches,
                cfg.noise_filter_len,
                cfg.noise_phases,
                cfg.noise_decay,
                cfg.noise_coupling,
            )
            .map_err(fail(STAGE))?;
            write_bank_csv(&bank, &artifact(out, "bank.csv")).map_err(fail(STAGE))?;
            let trace = generate_fresh(
                &bank,
                stage_seed(cfg.seed, "noise.excitation"),
                cfg.sample_rate_hz,
                cfg.samples_per_period,
                cfg.n_periods,
            )
            .map_err(fail(STAGE))?;
            write_trace_csv(&trace, &trace_path).map_err(fail(STAGE))?;
            println!(
                "generate: FRESH bank K={} L_f={} M_r={}, trace {} periods x {} samples",
                bank.branches(),
                bank.tap_len(),
                bank.phases(),
                trace.n_periods(),
                trace.samples_per_period()
            );
        }
        NoiseKind::Nassar => {
            let regions = cfg
                .noise_regions
                .iter()
                .map(|(len, taps)| NassarRegion {
                    taps: taps.clone(),
                    len: *len,
                })
                .collect();
            let model = NassarModel::new(regions).map_err(fail(STAGE))?;
            let w = gen_awgn(
                stage_seed(cfg.seed, "noise.excitation"),
                model.samples_per_period() * cfg.n_periods,
                1.0,
            )
            .map_err(fail(STAGE))?;
            let trace = nassar_generate(
                &model,
                &w,
                cfg.n_periods,
                cfg.sample_rate_hz,
                RegionStatePolicy::Reset,
            )
            .map_err(fail(STAGE))?;
            write_trace_csv(&trace, &trace_path).map_err(fail(STAGE))?;
            println!(
                "generate: sequential-filter model with {} regions, trace {} periods x {} samples",
                model.regions().len(),
                trace.n_periods(),
                trace.samples_per_period()
            );
        }
        NoiseKind::File => {
            let src = cfg.noise_trace_path.as_ref().ok_or_else(|| PipelineError {
                stage: STAGE,
                message: "noise.trace_path not set".into(),
            })?;
            let meta_src = src.with_extension("meta");
            std::fs::copy(src, &trace_path).map_err(|e| PipelineError {
                stage: STAGE,
                message: format!("copying {}: {}", src.display(), e),
            })?;
            std::fs::copy(&meta_src, artifact(out, "trace.meta")).map_err(|e| PipelineError {
                stage: STAGE,
                message: format!("copying {}: {}", meta_src.display(), e),
            })?;
            println!("generate: ingested {}", src.display());
        }
    }
    Ok(())
}

fn read_trace(out: &Path, stage: &'static str) -> Result<NoiseTrace, PipelineError> {
    let path = require_artifact(out, "trace.csv", stage)?;
    read_trace_csv(&path).map_err(fail(stage))
}

/// Variance-based slot classification report.
pub fn classify(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "analysis.classify";
    let trace = read_trace(out, STAGE)?;
    let classification = classify_slots(
        &trace,
        cfg.phase,
        cfg.n_fft,
        cfg.n_cp,
        cfg.th1,
        cfg.th2,
        cfg.analysis_n_period,
    )
    .map_err(fail(STAGE))?;
    write_classification_csv(&classification, &artifact(out, "classification.csv"))
        .map_err(fail(STAGE))?;
    let counts: Vec<usize> = NoiseClass::all()
        .into_iter()
        .map(|class| classification.members(class).len())
        .collect();
    println!(
        "classify: {} slots per period, class counts {:?}",
        classification.n_slots(),
        counts
    );
    Ok(())
}

/// Portion-length search; writes the per-portion divergence table and the
/// selected partition parameters.
pub fn gaussianity(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "analysis.gaussianity";
    let trace = read_trace(out, STAGE)?;
    let params = GaussianityParams {
        kld_threshold: cfg.kld_threshold,
        n_itr: cfg.n_itr,
        n_period: cfg.analysis_n_period,
        n_bins: cfg.n_bins,
        seed: stage_seed(cfg.seed, "gaussianity.bootstrap"),
    };
    let result =
        gaussianity_search(&trace, cfg.phase, cfg.n_fft, cfg.n_cp, &params).map_err(fail(STAGE))?;
    write_gaussianity_csv(&result.records, &artifact(out, "gaussianity.csv"))
        .map_err(fail(STAGE))?;

    let mut m = BufWriter::new(
        std::fs::File::create(artifact(out, "partition.meta")).map_err(fail(STAGE))?,
    );
    let write = |m: &mut BufWriter<std::fs::File>, s: String| -> Result<(), PipelineError> {
        writeln!(m, "{}", s).map_err(fail(STAGE))
    };
    write(
        &mut m,
        format!("samples_per_period={}", trace.samples_per_period()),
    )?;
    write(&mut m, format!("n_fft={}", cfg.n_fft))?;
    write(&mut m, format!("n_cp={}", cfg.n_cp))?;
    write(&mut m, format!("a={}", result.partition.division()))?;
    write(&mut m, format!("all_pass={}", result.all_pass))?;
    m.flush().map_err(fail(STAGE))?;
    println!(
        "gaussianity: selected A = {} (N_p = {}), all portions pass: {}",
        result.partition.division(),
        result.partition.n_p(),
        result.all_pass
    );
    Ok(())
}

fn read_partition(
    out: &Path,
    stage: &'static str,
) -> Result<(PortionPartition, bool), PipelineError> {
    let path = require_artifact(out, "partition.meta", stage)?;
    let text = std::fs::read_to_string(&path).map_err(fail(stage))?;
    let mut spp = None;
    let mut n_fft = None;
    let mut n_cp = None;
    let mut a = None;
    let mut all_pass = true;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            match k.trim() {
                "samples_per_period" => spp = v.trim().parse().ok(),
                "n_fft" => n_fft = v.trim().parse().ok(),
                "n_cp" => n_cp = v.trim().parse().ok(),
                "a" => a = v.trim().parse().ok(),
                "all_pass" => all_pass = v.trim() == "true",
                _ => {}
            }
        }
    }
    let missing = |what: &str| PipelineError {
        stage,
        message: format!("{} missing {}", path.display(), what),
    };
    let partition = PortionPartition::new(
        spp.ok_or_else(|| missing("samples_per_period"))?,
        n_fft.ok_or_else(|| missing("n_fft"))?,
        n_cp.ok_or_else(|| missing("n_cp"))?,
        a.ok_or_else(|| missing("a"))?,
    )
    .map_err(fail(stage))?;
    Ok((partition, all_pass))
}

/// Per-portion whitening diagnostics (and optional correlation dumps).
pub fn whiten(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "whitening.estimate";
    let trace = read_trace(out, STAGE)?;
    let (partition, _) = read_partition(out, STAGE)?;
    let n_period = cfg.whitening_periods().min(trace.n_periods());

    let mut summary = BufWriter::new(
        std::fs::File::create(artifact(out, "whitening_summary.csv")).map_err(fail(STAGE))?,
    );
    writeln!(summary, "portion,dim,periods,loaded,rww_dev").map_err(fail(STAGE))?;
    let mut loaded_count = 0usize;
    for portion in 0..partition.portions_per_period() {
        let corr = estimate_autocorr(&trace, &partition, portion, n_period).map_err(fail(STAGE))?;
        if cfg.dump_correlation {
            write_correlation_csv(
                &corr,
                &artifact(out, &format!("correlation_p{}.csv", portion + 1)),
            )
            .map_err(fail(STAGE))?;
        }
        let whitener = make_whitener(&corr).map_err(fail(STAGE))?;
        loaded_count += usize::from(whitener.loaded);

        let vectors =
            stack_portion_vectors(&trace, &partition, portion, n_period).map_err(fail(STAGE))?;
        let dim = vectors[0].len();
        let mean: Vec<plc_lab_core::Cplx> = (0..dim)
            .map(|i| {
                vectors
                    .iter()
                    .map(|v| v[i])
                    .sum::<plc_lab_core::Cplx>()
                    .unscale(n_period as Real)
            })
            .collect();
        let whitened: Vec<Vec<plc_lab_core::Cplx>> = vectors
            .iter()
            .map(|v| {
                let centered: Vec<plc_lab_core::Cplx> =
                    v.iter().zip(&mean).map(|(a, m)| a - m).collect();
                whiten_block(&whitener, &centered)
            })
            .collect::<Result<_, _>>()
            .map_err(fail(STAGE))?;
        let rww = empirical_covariance(&whitened, false);
        let dev = rww.sub(&Mat::identity(dim)).frobenius_norm() / (dim as Real).sqrt();
        writeln!(
            summary,
            "{},{},{},{},{}",
            portion + 1,
            dim,
            n_period,
            whitener.loaded,
            dev
        )
        .map_err(fail(STAGE))?;
    }
    summary.flush().map_err(fail(STAGE))?;
    println!(
        "whiten: {} portions, dimension {}, {} loaded",
        partition.portions_per_period(),
        trace.n_phases() * partition.n_p(),
        loaded_count
    );
    Ok(())
}

fn materialize_channel(cfg: &PipelineConfig, out: &Path) -> Result<MimoChannel, PipelineError> {
    const STAGE: &str = "channel.load";
    let path = artifact(out, "channel.csv");
    match cfg.channel_kind {
        ChannelKind::File => {
            let src = cfg.channel_path.as_ref().ok_or_else(|| PipelineError {
                stage: STAGE,
                message: "channel.path not set".into(),
            })?;
            std::fs::copy(src, &path).map_err(|e| PipelineError {
                stage: STAGE,
                message: format!("copying {}: {}", src.display(), e),
            })?;
            load_channel(&path, None).map_err(fail(STAGE))
        }
        ChannelKind::Synthetic => {
            let chan = synth_channel(
                stage_seed(cfg.seed, "channel.synth"),
                cfg.channel_rx,
                cfg.channel_tx,
                cfg.channel_memory,
                cfg.channel_decay,
            )
            .map_err(fail(STAGE))?;
            save_channel(&chan, &path).map_err(fail(STAGE))?;
            load_channel(&path, Some(cfg.channel_memory)).map_err(fail(STAGE))
        }
    }
}

/// Whitened composite-channel spectra per portion (the SNR-independent part
/// of the capacity evaluation).
pub fn capacity(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "capacity.spectra";
    let trace = read_trace(out, STAGE)?;
    let (partition, _) = read_partition(out, STAGE)?;
    let chan = materialize_channel(cfg, out)?;
    write_frequency_response_csv(
        &chan,
        partition.n_p().max(chan.memory()),
        &artifact(out, "channel_cfr.csv"),
    )
    .map_err(fail(STAGE))?;
    let n_period = cfg.whitening_periods().min(trace.n_periods());

    let spectra = portion_spectra(&trace, &chan, &partition, n_period).map_err(fail(STAGE))?;
    let calib = SweepCalibration::measure(&trace, &chan);

    let mut w =
        BufWriter::new(std::fs::File::create(artifact(out, "spectra.csv")).map_err(fail(STAGE))?);
    let wr = |w: &mut BufWriter<std::fs::File>, s: String| -> Result<(), PipelineError> {
        writeln!(w, "{}", s).map_err(fail(STAGE))
    };
    wr(
        &mut w,
        format!("# avg_noise_variance={}", calib.avg_noise_variance),
    )?;
    wr(&mut w, format!("# channel_gain={}", calib.channel_gain))?;
    wr(&mut w, format!("# m_t={}", calib.m_t))?;
    wr(&mut w, format!("# sample_rate_hz={}", calib.sample_rate_hz))?;
    wr(&mut w, "portion,eig_index,eigenvalue,loaded".into())?;
    for (portion, spectrum) in spectra.iter().enumerate() {
        for (i, &v) in spectrum.eigenvalues.iter().enumerate() {
            wr(
                &mut w,
                format!("{},{},{},{}", portion + 1, i + 1, v, spectrum.loaded),
            )?;
        }
    }
    w.flush().map_err(fail(STAGE))?;
    println!(
        "capacity: spectra for {} portions (channel {}x{}, memory {})",
        spectra.len(),
        chan.m_r(),
        chan.m_t(),
        chan.memory()
    );
    Ok(())
}

fn read_spectra(
    out: &Path,
    stage: &'static str,
) -> Result<(Vec<PortionSpectrum>, SweepCalibration), PipelineError> {
    let path = require_artifact(out, "spectra.csv", stage)?;
    let text = std::fs::read_to_string(&path).map_err(fail(stage))?;
    let mut avg_noise_variance = None;
    let mut channel_gain = None;
    let mut m_t = None;
    let mut sample_rate_hz = None;
    let mut spectra: Vec<PortionSpectrum> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.trim().split_once('=') {
                match k.trim() {
                    "avg_noise_variance" => avg_noise_variance = v.trim().parse().ok(),
                    "channel_gain" => channel_gain = v.trim().parse().ok(),
                    "m_t" => m_t = v.trim().parse().ok(),
                    "sample_rate_hz" => sample_rate_hz = v.trim().parse().ok(),
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with("portion,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| PipelineError {
            stage,
            message: format!("{} line {}: bad {}", path.display(), idx + 1, what),
        };
        if fields.len() != 4 {
            return Err(bad("field count"));
        }
        let portion: usize = fields[0].parse().map_err(|_| bad("portion"))?;
        let value: Real = fields[2].parse().map_err(|_| bad("eigenvalue"))?;
        let loaded: bool = fields[3].parse().map_err(|_| bad("loaded"))?;
        while spectra.len() < portion {
            spectra.push(PortionSpectrum {
                eigenvalues: Vec::new(),
                loaded: false,
            });
        }
        let entry = &mut spectra[portion - 1];
        entry.eigenvalues.push(value);
        entry.loaded = loaded;
    }
    let missing = |what: &str| PipelineError {
        stage,
        message: format!("{} missing header {}", path.display(), what),
    };
    let calib = SweepCalibration {
        avg_noise_variance: avg_noise_variance.ok_or_else(|| missing("avg_noise_variance"))?,
        channel_gain: channel_gain.ok_or_else(|| missing("channel_gain"))?,
        m_t: m_t.ok_or_else(|| missing("m_t"))?,
        sample_rate_hz: sample_rate_hz.ok_or_else(|| missing("sample_rate_hz"))?,
    };
    Ok((spectra, calib))
}

fn read_classification(
    out: &Path,
    cfg: &PipelineConfig,
    stage: &'static str,
) -> Result<SlotClassification, PipelineError> {
    let path = require_artifact(out, "classification.csv", stage)?;
    let text = std::fs::read_to_string(&path).map_err(fail(stage))?;
    let mut labels = Vec::new();
    let mut sigma = Vec::new();
    let mut deviation = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| PipelineError {
            stage,
            message: format!("{} line {}: bad {}", path.display(), idx + 1, what),
        };
        if fields.len() != 4 {
            return Err(bad("field count"));
        }
        sigma.push(fields[1].parse::<Real>().map_err(|_| bad("sigma"))?);
        deviation.push(fields[2].parse::<Real>().map_err(|_| bad("D"))?);
        let class: u8 = fields[3].parse().map_err(|_| bad("class"))?;
        labels.push(NoiseClass::from_index(class).ok_or_else(|| bad("class index"))?);
    }
    let sigma_min = sigma.iter().copied().fold(Real::INFINITY, Real::min);
    Ok(SlotClassification {
        labels,
        sigma,
        deviation,
        sigma_min,
        th1: cfg.th1,
        th2: cfg.th2,
    })
}

/// SNR sweep over the precomputed spectra; writes the capacity report and
/// the waterfilling allocations.
pub fn sweep(cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "capacity.sweep";
    let (spectra, calib) = read_spectra(out, STAGE)?;
    let (partition, _) = read_partition(out, STAGE)?;
    let classification = read_classification(out, cfg, STAGE)?;
    let sweep_cfg = SweepConfig {
        snr_grid_db: cfg.snr_grid_db.clone(),
        modes: cfg.modes.clone(),
        n_period: cfg.whitening_periods(),
    };
    let output = sweep_from_spectra(&spectra, &partition, &classification, &calib, &sweep_cfg)
        .map_err(fail(STAGE))?;
    write_report_csv(&output, out).map_err(fail(STAGE))?;
    write_allocations_csv(&output, out).map_err(fail(STAGE))?;
    println!(
        "sweep: {} report rows over {} SNR points ({} loaded portions)",
        output.rows.len(),
        cfg.snr_grid_db.len(),
        output.loaded_portions.len()
    );
    Ok(())
}

fn write_report_csv(output: &SnrSweepOutput, out: &Path) -> Result<(), std::io::Error> {
    let mut w = BufWriter::new(std::fs::File::create(artifact(out, "capacity_report.csv"))?);
    writeln!(w, "# {}", output.calibration_note)?;
    writeln!(
        w,
        "snr_db,mode,domain,scope,scope_id,capacity_bits,capacity_bits_per_sec"
    )?;
    for r in &output.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.snr_db,
            r.mode.as_str(),
            r.domain,
            r.scope.as_str(),
            r.scope_id,
            r.capacity_bits,
            r.capacity_bits_per_sec
        )?;
    }
    w.flush()
}

fn write_allocations_csv(output: &SnrSweepOutput, out: &Path) -> Result<(), std::io::Error> {
    let mut w = BufWriter::new(std::fs::File::create(artifact(out, "allocations.csv"))?);
    writeln!(w, "snr_db,portion,eig_index,eigenvalue,power")?;
    for a in &output.allocations {
        writeln!(
            w,
            "{},{},{},{},{}",
            a.snr_db, a.portion, a.eig_index, a.eigenvalue, a.power
        )?;
    }
    w.flush()
}

/// Renders the capacity-vs-SNR plots from the report CSV alone.
pub fn report(_cfg: &PipelineConfig, out: &Path) -> Result<(), PipelineError> {
    const STAGE: &str = "report.render";
    let path = require_artifact(out, "capacity_report.csv", STAGE)?;
    let text = std::fs::read_to_string(&path).map_err(fail(STAGE))?;

    struct Row {
        snr_db: Real,
        mode: Mode,
        scope: Scope,
        scope_id: usize,
        bits: Real,
    }
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("snr_db,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| PipelineError {
            stage: STAGE,
            message: format!("{} line {}: bad {}", path.display(), idx + 1, what),
        };
        if fields.len() != 7 {
            return Err(bad("field count"));
        }
        let mode = match fields[1] {
            "csit" => Mode::Csit,
            "nocsit" => Mode::NoCsit,
            _ => return Err(bad("mode")),
        };
        let scope = match fields[3] {
            "portion" => Scope::Portion,
            "slot" => Scope::Slot,
            "class" => Scope::Class,
            "average" => Scope::Average,
            _ => return Err(bad("scope")),
        };
        rows.push(Row {
            snr_db: fields[0].parse().map_err(|_| bad("snr_db"))?,
            mode,
            scope,
            scope_id: fields[4].parse().map_err(|_| bad("scope_id"))?,
            bits: fields[5].parse().map_err(|_| bad("capacity_bits"))?,
        });
    }

    let mut produced = 0usize;
    for mode in [Mode::NoCsit, Mode::Csit] {
        if !rows.iter().any(|r| r.mode == mode) {
            continue;
        }
        for (scope, stem, label) in [
            (Scope::Slot, "capacity_per_slot", "slot"),
            (Scope::Class, "capacity_per_class", "class"),
        ] {
            let mut ids: Vec<usize> = rows
                .iter()
                .filter(|r| r.mode == mode && r.scope == scope)
                .map(|r| r.scope_id)
                .collect();
            ids.sort_unstable();
            ids.dedup();
            let mut series: Vec<Series> = ids
                .iter()
                .map(|&id| Series {
                    name: format!("{} {}", label, id),
                    points: rows
                        .iter()
                        .filter(|r| r.mode == mode && r.scope == scope && r.scope_id == id)
                        .map(|r| (r.snr_db, r.bits))
                        .collect(),
                })
                .collect();
            if scope == Scope::Class {
                let avg: Vec<(Real, Real)> = rows
                    .iter()
                    .filter(|r| r.mode == mode && r.scope == Scope::Average)
                    .map(|r| (r.snr_db, r.bits))
                    .collect();
                if !avg.is_empty() {
                    series.push(Series {
                        name: "average".into(),
                        points: avg,
                    });
                }
            }
            let mode_label = match mode {
                Mode::Csit => "with CSIT",
                Mode::NoCsit => "without CSIT",
            };
            let svg = line_chart(
                &format!("Capacity per {} {}", label, mode_label),
                "Average SNR (dB)",
                "Capacity (bits/slot)",
                &series,
            );
            let file = artifact(out, &format!("{}_{}.svg", stem, mode.as_str()));
            std::fs::write(&file, svg).map_err(fail(STAGE))?;
            produced += 1;
        }
    }
    println!("report: {} plots rendered", produced);
    Ok(())
}
