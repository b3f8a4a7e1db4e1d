//! Run outputs: per-replicate and mean CSV time series, the run manifest,
//! summary statistics, a network dump, and static SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::runner::{DailyMetrics, MeanDay, RunResult};
use crate::social::SocialGraph;

pub const CSV_HEADER: &str = "day,susceptible,exposed,infectious,hospitalized,icu,quarantine,\
recovered,dead,new_infections,communications,acceptance_level";

/// All series plottable from the CSV, in column order.
pub const SERIES_NAMES: [&str; 11] = [
    "susceptible",
    "exposed",
    "infectious",
    "hospitalized",
    "icu",
    "quarantine",
    "recovered",
    "dead",
    "new_infections",
    "communications",
    "acceptance_level",
];

/// Curve colors keyed by series name.
pub fn series_color(series: &str) -> Option<&'static str> {
    Some(match series {
        "susceptible" => "#2ca02c",
        "exposed" => "#bcbd22",
        "infectious" => "#d62728",
        "hospitalized" => "#9467bd",
        "icu" => "#8c564b",
        "quarantine" => "#e377c2",
        "recovered" => "#1f77b4",
        "dead" => "#7f7f7f",
        "new_infections" => "#ff7f0e",
        "communications" => "#17becf",
        "acceptance_level" => "#000000",
        _ => return None,
    })
}

fn report_err(message: String) -> Error {
    Error::Report(message)
}

/// Writes one replicate's daily series. Every row is checked for state-count
/// conservation before anything goes to disk.
pub fn write_replicate_csv(path: &Path, days: &[DailyMetrics], population: u32) -> Result<()> {
    let mut out = String::with_capacity(days.len() * 80 + 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for d in days {
        if d.state_total() != population {
            return Err(report_err(format!(
                "day {}: state counts sum to {} for a population of {population}",
                d.day,
                d.state_total()
            )));
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            d.day,
            d.susceptible,
            d.exposed,
            d.infectious,
            d.hospitalized,
            d.icu,
            d.quarantine,
            d.recovered,
            d.dead,
            d.new_infections,
            d.communications,
            d.acceptance_level
        )
        .expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the replicate-mean series with fixed-precision decimals.
pub fn write_mean_csv(path: &Path, days: &[MeanDay], population: u32) -> Result<()> {
    let mut out = String::with_capacity(days.len() * 120 + 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for d in days {
        let total = d.susceptible
            + d.exposed
            + d.infectious
            + d.hospitalized
            + d.icu
            + d.quarantine
            + d.recovered
            + d.dead;
        if (total - f64::from(population)).abs() > 1e-6 {
            return Err(report_err(format!(
                "day {}: mean state counts sum to {total} for a population of {population}",
                d.day
            )));
        }
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            d.day,
            d.susceptible,
            d.exposed,
            d.infectious,
            d.hospitalized,
            d.icu,
            d.quarantine,
            d.recovered,
            d.dead,
            d.new_infections,
            d.communications,
            d.acceptance_level
        )
        .expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Headline numbers for one series of daily metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub peak_infectious: f64,
    pub peak_day: u32,
    pub cumulative_infections: f64,
    pub final_dead: f64,
    pub final_recovered: f64,
    pub final_acceptance: f64,
}

pub fn summarize_replicate(days: &[DailyMetrics]) -> SeriesSummary {
    let peak = days
        .iter()
        .max_by_key(|d| (d.infectious, std::cmp::Reverse(d.day)))
        .expect("nonempty series");
    let last = days.last().expect("nonempty series");
    SeriesSummary {
        peak_infectious: f64::from(peak.infectious),
        peak_day: peak.day,
        cumulative_infections: days.iter().map(|d| f64::from(d.new_infections)).sum(),
        final_dead: f64::from(last.dead),
        final_recovered: f64::from(last.recovered),
        final_acceptance: last.acceptance_level,
    }
}

pub fn summarize_mean(days: &[MeanDay]) -> SeriesSummary {
    let peak = days
        .iter()
        .reduce(|best, d| {
            if d.infectious > best.infectious {
                d
            } else {
                best
            }
        })
        .expect("nonempty series");
    let last = days.last().expect("nonempty series");
    SeriesSummary {
        peak_infectious: peak.infectious,
        peak_day: peak.day,
        cumulative_infections: days.iter().map(|d| d.new_infections).sum(),
        final_dead: last.dead,
        final_recovered: last.recovered,
        final_acceptance: last.acceptance_level,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario_kind: String,
    /// SHA-256 of the scenario file exactly as read from disk.
    pub scenario_sha256: String,
    pub root_seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub population_size: u32,
    pub horizon_days: u32,
    pub files: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").expect("string write");
    }
    hex
}

/// Everything `write_run` produced, with paths relative to the out dir.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub replicate_csvs: Vec<PathBuf>,
    pub mean_csv: PathBuf,
    pub manifest: PathBuf,
    pub summary: PathBuf,
}

/// Writes all artifacts of one finished run into `out_dir`.
pub fn write_run(
    out_dir: &Path,
    config: &ScenarioConfig,
    scenario_bytes: &[u8],
    result: &RunResult,
) -> Result<RunArtifacts> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let mut replicate_csvs = Vec::new();
    for rep in &result.replicates {
        let name = format!("replicate_{:02}.csv", rep.replicate);
        let path = out_dir.join(&name);
        write_replicate_csv(&path, &rep.days, result.population_size)?;
        files.push(name);
        replicate_csvs.push(path);
    }
    let mean_csv = out_dir.join("mean.csv");
    write_mean_csv(&mean_csv, &result.mean, result.population_size)?;
    files.push("mean.csv".into());

    let summary_path = out_dir.join("summary.json");
    #[derive(Serialize)]
    struct SummaryFile {
        mean: SeriesSummary,
        replicates: Vec<SeriesSummary>,
    }
    let summary = SummaryFile {
        mean: summarize_mean(&result.mean),
        replicates: result
            .replicates
            .iter()
            .map(|r| summarize_replicate(&r.days))
            .collect(),
    };
    let summary_json =
        serde_json::to_string_pretty(&summary).map_err(|e| report_err(e.to_string()))?;
    fs::write(&summary_path, summary_json + "\n").map_err(|e| Error::io(&summary_path, e))?;
    files.push("summary.json".into());

    let manifest_path = out_dir.join("manifest.json");
    let manifest = RunManifest {
        schema_version: crate::config::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_kind: format!("{:?}", config.scenario_kind),
        scenario_sha256: sha256_hex(scenario_bytes),
        root_seed: config.rng_seed,
        replicate_seeds: result.replicates.iter().map(|r| r.seed).collect(),
        population_size: result.population_size,
        horizon_days: config.calendar.horizon_days,
        files,
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| report_err(e.to_string()))?;
    fs::write(&manifest_path, manifest_json + "\n").map_err(|e| Error::io(&manifest_path, e))?;

    Ok(RunArtifacts {
        replicate_csvs,
        mean_csv,
        manifest: manifest_path,
        summary: summary_path,
    })
}

/// Dumps the directed edge list of a social graph.
pub fn write_graph_csv(path: &Path, graph: &SocialGraph) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);
    writeln!(out, "source,target,kind,trust").map_err(io_err)?;
    for (source, link) in graph.edges() {
        writeln!(
            out,
            "{source},{},{:?},{:.6}",
            link.target, link.kind, link.trust
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Which curves to draw and how big the image is.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub series: Vec<String>,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    /// The epidemic-phase curves at the default size.
    pub fn phases() -> Self {
        PlotSpec {
            series: [
                "susceptible",
                "exposed",
                "infectious",
                "hospitalized",
                "icu",
                "quarantine",
                "recovered",
                "dead",
            ]
            .map(String::from)
            .to_vec(),
            width: 960,
            height: 540,
        }
    }

    pub fn acceptance() -> Self {
        PlotSpec {
            series: vec!["acceptance_level".into()],
            width: 960,
            height: 540,
        }
    }
}

fn read_series(csv_path: &Path, names: &[String]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => report_err(format!("cannot open {}", csv_path.display())),
        _ => Error::Csv(e),
    })?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| report_err(format!("unknown series {name:?} in {}", csv_path.display())))
    };
    let day_col = col("day")?;
    let series_cols: Vec<usize> = names.iter().map(|n| col(n)).collect::<Result<_>>()?;
    let mut days = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record?;
        let parse = |ix: usize| -> Result<f64> {
            record
                .get(ix)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| report_err(format!("bad numeric field in {}", csv_path.display())))
        };
        days.push(parse(day_col)?);
        for (slot, &ix) in series.iter_mut().zip(&series_cols) {
            slot.push(parse(ix)?);
        }
    }
    if days.is_empty() {
        return Err(report_err(format!(
            "{} has no data rows",
            csv_path.display()
        )));
    }
    Ok((days, series))
}

/// Renders the selected series of a time-series CSV as a line chart. Output
/// is a plain SVG, byte-identical for identical input.
pub fn render_plot(csv_path: &Path, spec: &PlotSpec, out_path: &Path) -> Result<()> {
    if spec.series.is_empty() {
        return Err(report_err("no series selected".into()));
    }
    let colors: Vec<&str> = spec
        .series
        .iter()
        .map(|name| {
            series_color(name).ok_or_else(|| report_err(format!("unknown series {name:?}")))
        })
        .collect::<Result<_>>()?;
    let (days, series) = read_series(csv_path, &spec.series)?;

    let (w, h) = (f64::from(spec.width), f64::from(spec.height));
    let (left, right, top, bottom) = (70.0, 170.0, 30.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let x_max = days.last().copied().unwrap_or(1.0).max(1.0);
    let y_max = series
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b))
        .max(1e-9);
    let x = |day: f64| left + day / x_max * plot_w;
    let y = |v: f64| top + (1.0 - v / y_max) * plot_h;

    const BG: &str = "#ffffff";
    const GRID: &str = "#dddddd";
    const AXIS: &str = "#333333";
    let mut svg = String::new();
    let sw = &mut svg;
    writeln!(
        sw,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="13">"#
    )
    .expect("string write");
    writeln!(sw, r#"<rect width="{w:.0}" height="{h:.0}" fill="{BG}"/>"#).expect("string write");

    // Axes with five horizontal gridlines.
    for tick in 0..=5 {
        let frac = f64::from(tick) / 5.0;
        let ty = top + plot_h * (1.0 - frac);
        let value = y_max * frac;
        let label = if y_max >= 10.0 {
            format!("{value:.0}")
        } else {
            format!("{value:.2}")
        };
        writeln!(
            sw,
            r#"<line x1="{left:.1}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}" stroke="{GRID}"/>"#,
            left + plot_w
        )
        .expect("string write");
        writeln!(
            sw,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" fill="{AXIS}">{label}</text>"#,
            left - 8.0,
            ty + 4.0
        )
        .expect("string write");
    }
    let x_ticks = 6usize;
    for tick in 0..=x_ticks {
        let frac = tick as f64 / x_ticks as f64;
        let tx = left + plot_w * frac;
        let day = x_max * frac;
        writeln!(
            sw,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle" fill="{AXIS}">{day:.0}</text>"#,
            top + plot_h + 20.0
        )
        .expect("string write");
    }
    writeln!(
        sw,
        r#"<line x1="{left:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{AXIS}"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    )
    .expect("string write");
    writeln!(
        sw,
        r#"<line x1="{left:.1}" y1="{top:.1}" x2="{left:.1}" y2="{:.1}" stroke="{AXIS}"/>"#,
        top + plot_h
    )
    .expect("string write");
    writeln!(
        sw,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{AXIS}">day</text>"#,
        left + plot_w / 2.0,
        h - 12.0
    )
    .expect("string write");

    for ((name, values), color) in spec.series.iter().zip(&series).zip(&colors) {
        let mut points = String::new();
        for (day, v) in days.iter().zip(values) {
            write!(points, "{:.2},{:.2} ", x(*day), y(*v)).expect("string write");
        }
        writeln!(
            sw,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            points.trim_end()
        )
        .expect("string write");
        let _ = name;
    }

    // Legend, one row per series.
    for (ix, (name, color)) in spec.series.iter().zip(&colors).enumerate() {
        let ly = top + 10.0 + ix as f64 * 20.0;
        let lx = left + plot_w + 16.0;
        writeln!(
            sw,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/>"#,
            lx + 22.0
        )
        .expect("string write");
        writeln!(
            sw,
            r#"<text x="{:.1}" y="{:.1}" fill="{AXIS}">{name}</text>"#,
            lx + 28.0,
            ly + 4.0
        )
        .expect("string write");
    }
    writeln!(sw, "</svg>").expect("string write");

    fs::write(out_path, svg).map_err(|e| Error::io(out_path, e))
}
