//! `ris-harmonics` command-line front end.
//!
//! Commands return their primary artifact as a string; warnings go to the
//! caller separately so the artifact stays byte-stable.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::angle::circular_distance_deg;
use crate::array::ElementPatternModel;
use crate::circuit::{
    modulation_metrics, reflection_coefficient, ComplexValue, ImpedanceTable, ReflectionPair,
    ANTIPODAL_BAND_DEG,
};
use crate::compare::{
    catalog_agreement, catalog_agreement_text, catalog_profile, compare_sweeps, MeasuredSweep,
};
use crate::config::{LoadSource, RunConfig};
use crate::error::{Error, Result};
use crate::export::{pattern_csv, pattern_doc, schedule_doc, to_pretty, PatternHeader, ProfileDoc};
use crate::modulation::{delay_from_phase, fourier_coefficient, fourier_coefficient_numeric};
use crate::schedule::{build_switch_schedule, schedule_roundtrip_phases, DEFAULT_TICKS_PER_PERIOD};
use crate::steering::{
    optimize_profile_search, progressive_phase_profile, quantize_profile, table2_catalog,
    PhaseProfile, SteeringRequest, DEFAULT_RESOLUTION_DEG,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Doc,
}

#[derive(Debug, Parser)]
#[command(
    name = "ris-harmonics",
    version,
    about = "Harmonic beam steering for time-modulated RIS arrays"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Azimuth grid step in degrees (overrides the config).
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Use a row of the measured steering catalog (1-9).
    #[arg(long, conflicts_with = "profile")]
    pub table2_row: Option<usize>,
    /// Comma-separated per-element phases in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub profile: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection coefficients and modulation contrast.
    Gamma {
        /// Impedance table (overrides the config's load source).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Lookup frequency for the table, Hz.
        #[arg(long)]
        frequency: Option<f64>,
        /// Antenna impedance `re,im` in ohms.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires_all = ["zl_on", "zl_off"])]
        za: Option<Vec<f64>>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            requires = "za"
        )]
        zl_on: Option<Vec<f64>>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            requires = "za"
        )]
        zl_off: Option<Vec<f64>>,
    },
    /// Fourier coefficients of the modulation waveform.
    Coeffs {
        #[arg(long, default_value_t = 5)]
        max_harmonic: u32,
        /// Waveform delay expressed as a phase, degrees.
        #[arg(long, default_value_t = 0.0)]
        phase: f64,
        /// Also evaluate by quadrature with this many steps.
        #[arg(long)]
        numeric_steps: Option<usize>,
    },
    /// Harmonic far-field pattern for a profile.
    Pattern {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        harmonic: i32,
        /// Skip peak normalization.
        #[arg(long)]
        raw: bool,
    },
    /// Synthesize a profile steering a harmonic toward a target azimuth.
    Steer {
        #[arg(long, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        harmonic: i32,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION_DEG)]
        resolution: f64,
        /// Use coordinate-ascent search instead of the closed form.
        #[arg(long)]
        search: bool,
        /// Element held at 0° during search.
        #[arg(long, default_value_t = 0)]
        pin: usize,
    },
    /// Per-channel switch schedule for a profile.
    Schedule {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Control frequency, Hz (defaults to the config).
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TICKS_PER_PERIOD)]
        ticks: u32,
    },
    /// Compare predictions with measured sweeps or with the catalog.
    Compare {
        /// Measured sweep files.
        #[arg(long, num_args = 1.., required_unless_present = "catalog")]
        measured: Vec<PathBuf>,
        /// Compare predicted dominance with the catalog's measured columns.
        #[arg(long)]
        catalog: bool,
    },
    /// Print the measured steering catalog.
    Table2,
}

/// Result of a command: the primary artifact plus advisory messages.
#[derive(Debug, Default)]
pub struct Outcome {
    pub output: String,
    pub warnings: Vec<String>,
    /// Destination from `--out` or the config; stdout when `None`.
    pub out: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(step) = cli.grid_step {
        cfg.grid_step_deg = step;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn resolve_profile(args: &ProfileArgs, expected: usize) -> Result<PhaseProfile> {
    let profile = match (&args.table2_row, &args.profile) {
        (Some(row), _) => catalog_profile(*row)?,
        (None, Some(p)) => quantize_profile(p, DEFAULT_RESOLUTION_DEG)?,
        (None, None) => return Err(Error::InvalidInput("give --profile or --table2-row".into())),
    };
    if profile.len() != expected {
        return Err(Error::Dimension {
            expected,
            got: profile.len(),
        });
    }
    Ok(profile)
}

fn element_name(e: &ElementPatternModel) -> String {
    match e {
        ElementPatternModel::Isotropic => "isotropic".into(),
        ElementPatternModel::CosinePower {
            exponent,
            peak_gain_dbi,
        } => {
            format!("cosine_power(q={exponent},peak_gain_dbi={peak_gain_dbi})")
        }
    }
}

fn complex_arg(v: &Option<Vec<f64>>, name: &str) -> Result<Option<ComplexValue>> {
    match v {
        None => Ok(None),
        Some(parts) if parts.len() == 2 => Ok(Some(ComplexValue::new(parts[0], parts[1]))),
        Some(_) => Err(Error::InvalidInput(format!("--{name} takes `re,im`"))),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    let mut warnings = Vec::new();
    let output = match &cli.command {
        Command::Gamma {
            table,
            frequency,
            za,
            zl_on,
            zl_off,
        } => cmd_gamma(
            &cfg,
            cli.format,
            table,
            *frequency,
            (za, zl_on, zl_off),
            &mut warnings,
        )?,
        Command::Coeffs {
            max_harmonic,
            phase,
            numeric_steps,
        } => {
            let w = cfg.waveform()?;
            let w = w.with_delay(delay_from_phase(*phase, w.f0())?)?;
            let k = *max_harmonic as i32;
            let mut rows = Vec::new();
            for m in -k..=k {
                let c = fourier_coefficient(&w, m);
                let numeric = numeric_steps
                    .map(|s| fourier_coefficient_numeric(&w, m, s))
                    .transpose()?;
                rows.push((m, c, numeric));
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = String::from("m,re,im,magnitude,phase_deg");
                    if numeric_steps.is_some() {
                        out.push_str(",numeric_re,numeric_im,abs_error");
                    }
                    out.push('\n');
                    for (m, c, n) in rows {
                        let _ = write!(
                            out,
                            "{m},{},{},{},{}",
                            c.re,
                            c.im,
                            c.norm(),
                            c.arg().to_degrees()
                        );
                        if let Some(n) = n {
                            let _ = write!(out, ",{},{},{}", n.re, n.im, (n - c).norm());
                        }
                        out.push('\n');
                    }
                    out
                }
                Format::Doc => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(m, c, n)| {
                            json!({"m": m, "re": c.re, "im": c.im, "magnitude": c.norm(),
                                   "numeric": n.map(|n| [n.re, n.im])})
                        })
                        .collect();
                    to_pretty(
                        &json!({"f0_hz": w.f0(), "duty": w.duty(), "tau_s": w.tau(), "coefficients": items}),
                    )
                }
            }
        }
        Command::Pattern {
            profile,
            harmonic,
            raw,
        } => {
            let model = cfg.model()?;
            let profile = resolve_profile(profile, model.geometry.element_count())?;
            let pattern =
                model.pattern_sweep(profile.phases_deg(), *harmonic, cfg.grid_step_deg, !raw)?;
            if pattern.is_null() {
                warnings.push(format!(
                    "harmonic {harmonic:+} is null for this waveform: every sample is -inf dB"
                ));
            }
            let g = model.geometry;
            let header = PatternHeader {
                geometry: format!(
                    "{}x{} dx={}m dy={}m lambda={}m",
                    g.rows, g.cols, g.dx, g.dy, g.lambda_c
                ),
                element: element_name(&model.element),
                profile_deg: profile.phases_deg().to_vec(),
                config_hash: cfg.hash(),
            };
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => pattern_csv(&pattern, &header),
                Format::Doc => pattern_doc(&pattern, &header),
            }
        }
        Command::Steer {
            target,
            harmonic,
            resolution,
            search,
            pin,
        } => {
            let model = cfg.model()?;
            let req = SteeringRequest::new(*target, *harmonic, model.geometry)?;
            if let Some(w) = req.sector_warning() {
                warnings.push(w);
            }
            let mut doc;
            if *search {
                let out = optimize_profile_search(&req, &model, *resolution, *pin)?;
                if !out.converged {
                    warnings.push(format!("search stopped at the {}-pass cap", out.passes));
                }
                doc = ProfileDoc::new(&out.profile, *harmonic, req.desired_azimuth_deg);
                doc.solver = Some("coordinate_ascent".into());
                doc.achieved_magnitude = Some(out.objective);
            } else {
                let p = progressive_phase_profile(&req, *resolution)?;
                let achieved = model
                    .harmonic_field(p.phases_deg(), *harmonic, req.desired_azimuth_deg)?
                    .norm();
                doc = ProfileDoc::new(&p, *harmonic, req.desired_azimuth_deg);
                doc.solver = Some("progressive_phase".into());
                doc.achieved_magnitude = Some(achieved);
            }
            doc.warning = req.sector_warning();
            match cli.format.unwrap_or(Format::Doc) {
                Format::Csv => doc.to_csv(),
                Format::Doc => doc.to_json(),
            }
        }
        Command::Schedule { profile, f0, ticks } => {
            let profile = resolve_profile(profile, cfg.geometry()?.element_count())?;
            let f0 = f0.unwrap_or(cfg.waveform.f0_hz);
            let s = build_switch_schedule(profile.phases_deg(), f0, *ticks)?;
            let exact = schedule_roundtrip_phases(&s)?
                .iter()
                .zip(profile.phases_deg())
                .all(|(a, b)| circular_distance_deg(*a, *b) < 1e-9);
            if !exact {
                warnings.push(format!(
                    "{ticks} ticks per period cannot represent this profile exactly; phases round to {}° steps",
                    360.0 / *ticks as f64
                ));
            }
            match cli.format.unwrap_or(Format::Doc) {
                Format::Csv => s.tick_table()?,
                Format::Doc => schedule_doc(&s)?,
            }
        }
        Command::Compare { measured, catalog } => {
            let model = cfg.model()?;
            let mut out = String::new();
            if *catalog {
                let step = cli
                    .grid_step
                    .unwrap_or(crate::compare::REFERENCE_SWEEP_STEP_DEG);
                let rows = catalog_agreement(&model, step)?;
                match cli.format.unwrap_or(Format::Csv) {
                    Format::Csv => out.push_str(&catalog_agreement_text(&rows)),
                    Format::Doc => out.push_str(&to_pretty(&rows)),
                }
            }
            if !measured.is_empty() {
                let sweeps = measured
                    .iter()
                    .map(MeasuredSweep::from_path)
                    .collect::<Result<Vec<_>>>()?;
                let report = compare_sweeps(&model, &sweeps)?;
                match cli.format.unwrap_or(Format::Csv) {
                    Format::Csv => out.push_str(&report.to_text()),
                    Format::Doc => out.push_str(&to_pretty(&report)),
                }
            }
            out
        }
        Command::Table2 => match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut out = String::from("row,desired,phases_deg,measured_plus,measured_minus\n");
                let pairs = |v: &[(f64, f64)]| {
                    v.iter()
                        .map(|(a, b)| format!("{a}/{b}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                for (i, r) in table2_catalog().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{}/{},{},{},{}",
                        i + 1,
                        r.desired.0,
                        r.desired.1,
                        r.phases_deg
                            .iter()
                            .map(|p| p.to_string())
                            .collect::<Vec<_>>()
                            .join(";"),
                        pairs(r.measured_plus),
                        pairs(r.measured_minus)
                    );
                }
                out
            }
            Format::Doc => to_pretty(table2_catalog()),
        },
    };
    Ok(Outcome {
        output,
        warnings,
        out: cfg.out,
    })
}

type ImpedanceArgs<'a> = (
    &'a Option<Vec<f64>>,
    &'a Option<Vec<f64>>,
    &'a Option<Vec<f64>>,
);

fn cmd_gamma(
    cfg: &RunConfig,
    format: Option<Format>,
    table: &Option<PathBuf>,
    frequency: Option<f64>,
    (za, zl_on, zl_off): ImpedanceArgs<'_>,
    warnings: &mut Vec<String>,
) -> Result<String> {
    let za = complex_arg(za, "za")?;
    let (pair, source) = if let Some(za) = za {
        let on = complex_arg(zl_on, "zl-on")?.expect("clap enforces zl-on");
        let off = complex_arg(zl_off, "zl-off")?.expect("clap enforces zl-off");
        let pair = ReflectionPair::new(
            reflection_coefficient(on, za)?,
            reflection_coefficient(off, za)?,
        )?;
        (pair, "impedances".to_string())
    } else if let Some(path) = table {
        let t = ImpedanceTable::from_path(path)?;
        let f = match frequency {
            Some(f) => f,
            None if t.len() == 1 => t.points()[0].frequency_hz,
            None => {
                return Err(Error::InvalidInput(
                    "--frequency is required for multi-row tables".into(),
                ))
            }
        };
        (
            t.lookup(f)?.reflection_pair()?,
            format!("table {} @ {f} Hz", path.display()),
        )
    } else {
        let (pair, src) = cfg.reflection_pair()?;
        let desc = match src {
            LoadSource::Explicit => "explicit".to_string(),
            LoadSource::Table {
                path, frequency_hz, ..
            } => format!("table {} @ {frequency_hz} Hz", path.display()),
            LoadSource::Reference(p) => format!("reference impedances @ {} Hz", p.frequency_hz),
        };
        (pair, desc)
    };

    let on = pair.gamma_on();
    let off = pair.gamma_off();
    let metrics = modulation_metrics(&pair);
    if pair.contrast().norm() < 1e-9 || metrics.is_err() {
        warnings.push(
            "no modulation contrast: a reflection state has |Γ| = 0 or both states coincide".into(),
        );
    }
    let verdict = metrics
        .as_ref()
        .map(|m| {
            if m.within_antipodal_band(ANTIPODAL_BAND_DEG) {
                "PASS"
            } else {
                "FAIL"
            }
        })
        .unwrap_or("UNDEFINED");

    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            let _ = writeln!(out, "source,{source}");
            let _ = writeln!(out, "gamma_on_re,{}\ngamma_on_im,{}", on.re, on.im);
            let _ = writeln!(
                out,
                "gamma_on_mag,{}\ngamma_on_phase_deg,{}",
                on.norm(),
                on.arg().to_degrees()
            );
            let _ = writeln!(out, "gamma_off_re,{}\ngamma_off_im,{}", off.re, off.im);
            let _ = writeln!(
                out,
                "gamma_off_mag,{}\ngamma_off_phase_deg,{}",
                off.norm(),
                off.arg().to_degrees()
            );
            let _ = writeln!(out, "differential_magnitude,{}", pair.contrast().norm());
            if let Ok(m) = &metrics {
                let _ = writeln!(
                    out,
                    "phase_difference_raw_deg,{}",
                    m.phase_difference_raw_deg
                );
                let _ = writeln!(
                    out,
                    "phase_difference_signed_deg,{}",
                    m.phase_difference_signed_deg
                );
                let _ = writeln!(out, "phase_separation_deg,{}", m.phase_separation_deg);
                let _ = writeln!(
                    out,
                    "loss_on_db,{}\nloss_off_db,{}",
                    m.loss_on_db, m.loss_off_db
                );
            }
            let _ = writeln!(out, "antipodal_band_180pm{ANTIPODAL_BAND_DEG},{verdict}");
            Ok(out)
        }
        Format::Doc => Ok(to_pretty(&json!({
            "source": source,
            "gamma_on": [on.re, on.im],
            "gamma_off": [off.re, off.im],
            "gamma_on_mag": on.norm(),
            "gamma_off_mag": off.norm(),
            "differential_magnitude": pair.contrast().norm(),
            "metrics": metrics.ok(),
            "antipodal_band_deg": ANTIPODAL_BAND_DEG,
            "verdict": verdict,
        }))),
    }
}

/// Run the parsed command, write output and return the process exit status.
pub fn main_with(cli: Cli) -> i32 {
    match run(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            match outcome.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, outcome.output) {
                        eprintln!("error: writing {}: {e}", path.display());
                        return 3;
                    }
                }
                None => print!("{}", outcome.output),
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
