//! Two-line element sets.
//!
//! Records are parsed from the standard fixed-column layout and reduced to
//! [`CircularElements`] by discarding eccentricity. Fields that the circular
//! approximation does not use are kept verbatim so that a canonical record
//! serializes back to its original lines.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result, TleLine};
use crate::orbital::{normalize_deg, CircularElements, DEFAULT_EARTH_RADIUS_KM, MU_EARTH_KM3_S2};

pub const LINE_LEN: usize = 69;

/// Eccentricity above which the circular approximation is flagged.
pub const ECCENTRICITY_WARNING: f64 = 0.02;

/// Standard TLE checksum over the first 68 columns: digits count their value,
/// each `-` counts 1, everything else 0; modulo 10.
pub fn checksum(line: &str) -> Result<u8> {
    let bytes = line.as_bytes();
    if bytes.len() != LINE_LEN - 1 {
        return Err(Error::invalid(format!(
            "checksum needs 68 characters, got {}",
            bytes.len()
        )));
    }
    Ok(checksum_bytes(bytes))
}

fn checksum_bytes(bytes: &[u8]) -> u8 {
    let sum: u32 = bytes
        .iter()
        .map(|&b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

/// Line-1 fields the circular approximation ignores, kept as source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Line1Extras {
    pub classification: char,
    /// Columns 10–17.
    pub international_designator: String,
    /// Columns 34–43.
    pub mean_motion_dot: String,
    /// Columns 45–52.
    pub mean_motion_ddot: String,
    /// Columns 54–61.
    pub bstar: String,
    pub ephemeris_type: char,
    pub element_set_number: u32,
}

impl Default for Line1Extras {
    fn default() -> Self {
        Self {
            classification: 'U',
            international_designator: "        ".into(),
            mean_motion_dot: " .00000000".into(),
            mean_motion_ddot: " 00000-0".into(),
            bstar: " 00000-0".into(),
            ephemeris_type: '0',
            element_set_number: 999,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TleRecord {
    pub name: Option<String>,
    pub catalog_number: u32,
    /// Four-digit year.
    pub epoch_year: i32,
    pub epoch_day: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_rev_per_day: f64,
    pub revolution_number: u32,
    pub extras: Line1Extras,
}

impl TleRecord {
    /// True when eccentricity is large enough that the circular
    /// approximation should be reported.
    pub fn eccentricity_warning(&self) -> bool {
        self.eccentricity > ECCENTRICITY_WARNING
    }

    /// Serializes to the canonical two lines (checksums recomputed).
    pub fn to_lines(&self) -> (String, String) {
        let x = &self.extras;
        let mut l1 = String::with_capacity(LINE_LEN);
        let _ = write!(
            l1,
            "1 {:05}{} {:<8} {:02}{:012.8} {:>10} {:>8} {:>8} {} {:>4}",
            self.catalog_number,
            x.classification,
            x.international_designator,
            self.epoch_year.rem_euclid(100),
            self.epoch_day,
            x.mean_motion_dot,
            x.mean_motion_ddot,
            x.bstar,
            x.ephemeris_type,
            x.element_set_number,
        );
        let mut l2 = String::with_capacity(LINE_LEN);
        let _ = write!(
            l2,
            "2 {:05} {:8.4} {:8.4} {:07} {:8.4} {:8.4} {:11.8}{:5}",
            self.catalog_number,
            self.inclination_deg,
            self.raan_deg,
            (self.eccentricity * 1e7).round() as u64,
            self.arg_perigee_deg,
            self.mean_anomaly_deg,
            self.mean_motion_rev_per_day,
            self.revolution_number,
        );
        let c1 = checksum_bytes(l1.as_bytes());
        let c2 = checksum_bytes(l2.as_bytes());
        l1.push(char::from(b'0' + c1));
        l2.push(char::from(b'0' + c2));
        (l1, l2)
    }
}

struct Columns<'a> {
    line: &'a str,
    which: TleLine,
}

impl<'a> Columns<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.which,
            column,
            message: message.into(),
        }
    }

    /// 1-based inclusive column range.
    fn field(&self, start: usize, end: usize) -> &'a str {
        &self.line[start - 1..end]
    }

    fn char_at(&self, col: usize) -> char {
        self.line.as_bytes()[col - 1] as char
    }

    fn expect_blank(&self, col: usize) -> Result<()> {
        if self.char_at(col) != ' ' {
            return Err(self.err(col, "expected a blank separator"));
        }
        Ok(())
    }

    fn uint(&self, start: usize, end: usize, what: &str) -> Result<u32> {
        let s = self.field(start, end).trim();
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.err(start, format!("{what} must be an unsigned integer")));
        }
        s.parse().map_err(|_| self.err(start, format!("{what} out of range")))
    }

    fn real(&self, start: usize, end: usize, what: &str) -> Result<f64> {
        let s = self.field(start, end).trim();
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(start, format!("{what} must be a decimal number")))?;
        if !v.is_finite() {
            return Err(self.err(start, format!("{what} must be finite")));
        }
        Ok(v)
    }

    fn angle(&self, start: usize, end: usize, what: &str) -> Result<f64> {
        let v = self.real(start, end, what)?;
        if !(0.0..360.0).contains(&v) {
            return Err(self.err(start, format!("{what} must be in [0, 360)")));
        }
        Ok(v)
    }
}

fn check_line(line: &str, which: TleLine) -> Result<Columns<'_>> {
    if !line.is_ascii() {
        let column = line.char_indices().position(|(_, c)| !c.is_ascii()).unwrap_or(0) + 1;
        return Err(Error::Format {
            line: which,
            column,
            message: "non-ASCII character".into(),
        });
    }
    if line.len() != LINE_LEN {
        return Err(Error::Format {
            line: which,
            column: line.len().min(LINE_LEN) + 1,
            message: format!("line must be 69 characters, got {}", line.len()),
        });
    }
    let cols = Columns { line, which };
    let expected_no = match which {
        TleLine::One => '1',
        TleLine::Two => '2',
    };
    if cols.char_at(1) != expected_no {
        return Err(cols.err(1, format!("line number must be '{expected_no}'")));
    }
    cols.expect_blank(2)?;
    let found = cols.char_at(69);
    let expected = checksum_bytes(&line.as_bytes()[..68]);
    if found.to_digit(10) != Some(expected as u32) {
        return Err(Error::Checksum {
            line: which,
            expected,
            found,
        });
    }
    Ok(cols)
}

/// Parses one record from its two data lines.
pub fn parse_tle(line1: &str, line2: &str, name: Option<&str>) -> Result<TleRecord> {
    let c1 = check_line(line1, TleLine::One)?;
    let c2 = check_line(line2, TleLine::Two)?;

    let catalog_number = c1.uint(3, 7, "catalog number")?;
    let classification = c1.char_at(8);
    c1.expect_blank(9)?;
    let international_designator = c1.field(10, 17).to_string();
    c1.expect_blank(18)?;
    let yy = c1.uint(19, 20, "epoch year")? as i32;
    // 57–99 → 1957–1999, 00–56 → 2000–2056
    let epoch_year = if yy >= 57 { 1900 + yy } else { 2000 + yy };
    let epoch_day = c1.real(21, 32, "epoch day")?;
    if !(0.0..367.0).contains(&epoch_day) {
        return Err(c1.err(21, "epoch day must be in [0, 367)"));
    }
    c1.expect_blank(33)?;
    let mean_motion_dot = c1.field(34, 43).to_string();
    c1.expect_blank(44)?;
    let mean_motion_ddot = c1.field(45, 52).to_string();
    c1.expect_blank(53)?;
    let bstar = c1.field(54, 61).to_string();
    c1.expect_blank(62)?;
    let ephemeris_type = c1.char_at(63);
    c1.expect_blank(64)?;
    let element_set_number = c1.uint(65, 68, "element set number")?;

    let catalog2 = c2.uint(3, 7, "catalog number")?;
    if catalog2 != catalog_number {
        return Err(c2.err(3, "catalog number differs from line 1"));
    }
    for col in [8, 17, 26, 34, 43, 52] {
        c2.expect_blank(col)?;
    }
    let inclination_deg = c2.real(9, 16, "inclination")?;
    if !(0.0..=180.0).contains(&inclination_deg) {
        return Err(c2.err(9, "inclination must be in [0, 180]"));
    }
    let raan_deg = c2.angle(18, 25, "right ascension")?;
    let ecc_field = c2.field(27, 33);
    if !ecc_field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(c2.err(27, "eccentricity must be 7 digits with implied decimal point"));
    }
    let eccentricity = ecc_field.parse::<u32>().map_err(|_| c2.err(27, "bad eccentricity"))? as f64 / 1e7;
    let arg_perigee_deg = c2.angle(35, 42, "argument of perigee")?;
    let mean_anomaly_deg = c2.angle(44, 51, "mean anomaly")?;
    let mean_motion_rev_per_day = c2.real(53, 63, "mean motion")?;
    if !(mean_motion_rev_per_day > 0.0) {
        return Err(c2.err(53, "mean motion must be positive"));
    }
    let rev = c2.field(64, 68).trim();
    let revolution_number = if rev.is_empty() {
        0
    } else {
        c2.uint(64, 68, "revolution number")?
    };

    Ok(TleRecord {
        name: name.map(|n| n.trim().to_string()).filter(|n| !n.is_empty()),
        catalog_number,
        epoch_year,
        epoch_day,
        inclination_deg,
        raan_deg,
        eccentricity,
        arg_perigee_deg,
        mean_anomaly_deg,
        mean_motion_rev_per_day,
        revolution_number,
        extras: Line1Extras {
            classification,
            international_designator,
            mean_motion_dot,
            mean_motion_ddot,
            bstar,
            ephemeris_type,
            element_set_number,
        },
    })
}

/// One record of a TLE file together with the 1-based line it starts on.
#[derive(Debug)]
pub struct ParsedEntry {
    pub first_line: usize,
    pub record: Result<TleRecord>,
}

/// Parses a 2-line or 3-line (named) TLE file. Blank lines are skipped.
pub fn parse_tle_text(text: &str) -> Vec<ParsedEntry> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (no, l) = lines[i];
        let is_data = |s: &str, d: u8| s.len() >= 2 && s.as_bytes()[0] == d && s.as_bytes()[1] == b' ';
        if is_data(l, b'1') {
            let Some(&(_, l2)) = lines.get(i + 1) else {
                out.push(ParsedEntry {
                    first_line: no,
                    record: Err(Error::Format {
                        line: TleLine::Two,
                        column: 1,
                        message: "missing line 2".into(),
                    }),
                });
                break;
            };
            out.push(ParsedEntry {
                first_line: no,
                record: parse_tle(l, l2, None),
            });
            i += 2;
        } else {
            let name = l.strip_prefix("0 ").unwrap_or(l);
            match (lines.get(i + 1), lines.get(i + 2)) {
                (Some(&(_, l1)), Some(&(_, l2))) => {
                    out.push(ParsedEntry {
                        first_line: no,
                        record: parse_tle(l1, l2, Some(name)),
                    });
                    i += 3;
                }
                _ => {
                    out.push(ParsedEntry {
                        first_line: no,
                        record: Err(Error::Format {
                            line: TleLine::One,
                            column: 1,
                            message: "incomplete record after name line".into(),
                        }),
                    });
                    break;
                }
            }
        }
    }
    out
}

/// Circular approximation with the default Earth radius.
pub fn tle_to_elements(rec: &TleRecord) -> Result<CircularElements> {
    tle_to_elements_at(rec, 0.0)
}

/// Circular approximation of the mean elements. Eccentricity is dropped and
/// the argument of latitude is taken as perigee argument plus mean anomaly.
pub fn tle_to_elements_at(rec: &TleRecord, epoch_s: f64) -> Result<CircularElements> {
    if !(rec.mean_motion_rev_per_day > 0.0) {
        return Err(Error::invalid("mean motion must be positive"));
    }
    let period = 86_400.0 / rec.mean_motion_rev_per_day;
    let a = (MU_EARTH_KM3_S2 * (period / TAU).powi(2)).cbrt();
    Ok(CircularElements {
        semi_major_axis_km: a,
        inclination_deg: rec.inclination_deg,
        raan_deg: normalize_deg(rec.raan_deg),
        phase_deg: normalize_deg(rec.arg_perigee_deg + rec.mean_anomaly_deg),
        epoch_s,
    })
}

/// Altitude above the default mean Earth radius implied by the mean motion.
pub fn altitude_km(rec: &TleRecord) -> Result<f64> {
    Ok(tle_to_elements(rec)?.semi_major_axis_km - DEFAULT_EARTH_RADIUS_KM)
}
