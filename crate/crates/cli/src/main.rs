use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leofault::faults::{expected_seu_count, tid_survival, DoseProfile};
use leofault::geometry::{ground_station_eci, satellite_at_elevation, GroundStation};
use leofault::orbital::DEFAULT_EARTH_RADIUS_KM;
use leofault::sim::{build_from_config, run_simulation, SimulationConfig};
use leofault::stats::{infeasible_fraction, min_isl_altitude_cdf};
use leofault::tle::{altitude_km, parse_tle_text, ECCENTRICITY_WARNING};
use leofault::trace::write_trace;
use leofault::{Error, Result};

#[derive(Parser)]
#[command(name = "leofault", version, about = "LEO constellation geometry and fault-trace generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full simulation and write the merged fault trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the ISL grazing-altitude CDF as CSV.
    IslCdf {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One sample per link (its minimum over the run) instead of one per step.
        #[arg(long)]
        per_link_min: bool,
    },
    /// Total-ionizing-dose check for an orbit inclination.
    Dose {
        #[arg(long, allow_negative_numbers = true)]
        inclination: f64,
        #[arg(long, default_value_t = 50.0)]
        limit_krad: f64,
        #[arg(long, default_value_t = 5.0)]
        years: f64,
    },
    /// Expected fleet-wide SEU count.
    Seu {
        #[arg(long)]
        satellites: usize,
        #[arg(long)]
        devices: u32,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        days: f64,
    },
    /// TLE utilities.
    Tle {
        #[command(subcommand)]
        command: TleCommand,
    },
    /// Bent-pipe round trip for a satellite seen at a given elevation.
    Rtt {
        /// Station as `lat,lon` in degrees.
        #[arg(long, allow_hyphen_values = true)]
        gs: String,
        #[arg(long)]
        alt_km: f64,
        #[arg(long)]
        elevation: f64,
    },
}

#[derive(Subcommand)]
enum TleCommand {
    /// Parse a 2- or 3-line TLE file and report each record.
    Parse { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate { config, out } => {
            let cfg = SimulationConfig::load(&config)?;
            let output = run_simulation(&cfg)?;
            for w in &output.summary.warnings {
                eprintln!("warning: {w}");
            }
            write_trace(BufWriter::new(File::create(&out)?), &output.events)?;
            print!("{}", output.summary);
        }
        Command::IslCdf { config, out, per_link_min } => {
            let cfg = SimulationConfig::load(&config)?;
            cfg.validate()?;
            let (constellation, warnings) = build_from_config(&cfg)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let cdf = min_isl_altitude_cdf(&constellation, 0.0, cfg.duration_s, cfg.step_s, per_link_min)?;
            cdf.write_csv(BufWriter::new(File::create(&out)?))?;
            println!("samples: {}", cdf.sample_count());
            println!(
                "infeasible_fraction: {:.6}",
                infeasible_fraction(&cdf, cfg.isl_threshold_km)
            );
        }
        Command::Dose { inclination, limit_krad, years } => {
            let a = tid_survival(&DoseProfile::default(), inclination, limit_krad, years)?;
            println!("mission_dose_krad: {}", round3(a.dose_krad));
            println!("survives: {}", a.survives);
            if a.lifetime_years.is_finite() {
                println!("lifetime_years: {}", round3(a.lifetime_years));
            } else {
                println!("lifetime_years: unbounded");
            }
        }
        Command::Seu { satellites, devices, rate, days } => {
            if !(rate >= 0.0) || !(days >= 0.0) {
                return Err(Error::invalid("rate and days must be non-negative"));
            }
            println!("{}", round3(expected_seu_count(rate, devices, satellites, days)));
        }
        Command::Tle { command: TleCommand::Parse { file } } => {
            let text = std::fs::read_to_string(&file)?;
            let mut failed = false;
            for entry in parse_tle_text(&text) {
                match entry.record {
                    Ok(rec) => {
                        let name = rec.name.as_deref().unwrap_or("-");
                        let alt = altitude_km(&rec)?;
                        println!(
                            "{} {name}: epoch {}+{:.8} inc {:.4} raan {:.4} ecc {:.7} n {:.8} rev/day alt {:.1} km",
                            rec.catalog_number,
                            rec.epoch_year,
                            rec.epoch_day,
                            rec.inclination_deg,
                            rec.raan_deg,
                            rec.eccentricity,
                            rec.mean_motion_rev_per_day,
                            alt
                        );
                        if rec.eccentricity_warning() {
                            eprintln!(
                                "warning: line {}: eccentricity {} above {ECCENTRICITY_WARNING}, circular approximation is coarse",
                                entry.first_line, rec.eccentricity
                            );
                        }
                    }
                    Err(e) => {
                        failed = true;
                        eprintln!("error: record at line {}: {e}", entry.first_line);
                    }
                }
            }
            if failed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Rtt { gs, alt_km, elevation } => {
            let station = parse_station(&gs)?;
            if !(alt_km > 0.0) {
                return Err(Error::invalid("--alt-km must be positive"));
            }
            if !(elevation > 0.0 && elevation <= 90.0) {
                return Err(Error::invalid("--elevation must be in (0, 90]"));
            }
            let mask = elevation.min(station.min_elevation_deg);
            let station = station.with_min_elevation(mask);
            let r = DEFAULT_EARTH_RADIUS_KM;
            let gp = ground_station_eci(&station, 0.0, r);
            let sat = satellite_at_elevation(&gp, alt_km, elevation, r);
            let rtt = leofault::stats::bent_pipe_rtt(&station, &sat, &station, 0.0, r)?;
            println!("rtt_ms: {}", round3(rtt * 1e3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_station(text: &str) -> Result<GroundStation> {
    let (lat, lon) = text
        .split_once(',')
        .ok_or_else(|| Error::invalid("--gs expects `lat,lon`"))?;
    let parse = |s: &str, what: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("--gs: bad {what} `{s}`")))
    };
    let station = GroundStation::new("gs", parse(lat, "latitude")?, parse(lon, "longitude")?);
    station.validate()?;
    Ok(station)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
