use std::process::{Command, Output};

fn leofault(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leofault"))
        .args(args)
        .output()
        .expect("spawn leofault")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const ISS: &str = "ISS (ZARYA)
1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927
2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537
";

#[test]
fn seu_prints_exact_products() {
    let o = leofault(&["seu", "--satellites", "4408", "--devices", "60", "--rate", "1e-4", "--days", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "26.448\n");
    let o = leofault(&["seu", "--satellites", "10", "--devices", "0", "--rate", "1", "--days", "3"]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn dose_reports_lifetime() {
    let o = leofault(&["dose", "--inclination", "73", "--limit-krad", "30"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("survives: false"), "{out}");
    let o = leofault(&["dose", "--inclination", "0"]);
    assert!(stdout(&o).contains("lifetime_years: unbounded"));
    let o = leofault(&["dose", "--inclination", "200"]);
    assert!(!o.status.success());
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("inclination"));
}

#[test]
fn rtt_rejects_bad_station() {
    let o = leofault(&["rtt", "--gs", "95,0", "--alt-km", "550", "--elevation", "40"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("latitude"));
    let o = leofault(&["rtt", "--gs", "-33.9,151.2", "--alt-km", "550", "--elevation", "90"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "rtt_ms: 7.338\n");
}

#[test]
fn tle_parse_reports_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("iss.tle");
    std::fs::write(&path, ISS).unwrap();
    let o = leofault(&["tle", "parse", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("25544 ISS (ZARYA):"), "{out}");
    assert!(out.contains("inc 51.6416"));
    assert!(stderr(&o).is_empty());
}

#[test]
fn tle_parse_flags_bad_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tle");
    // good record, then one with a corrupted checksum digit
    let bad = ISS.replace("0  2927", "0  2928");
    std::fs::write(&path, format!("{ISS}{bad}")).unwrap();
    let o = leofault(&["tle", "parse", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().count(), 1);
    let err = stderr(&o);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("checksum"), "{err}");
}

#[test]
fn tle_parse_warns_on_eccentric_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ecc.tle");
    let l1 = "1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927";
    let body = "2 25544  51.6416 247.4627 0506703 130.5360 325.0288 15.72125391563537";
    let sum: u32 = body[..68]
        .chars()
        .map(|c| if c == '-' { 1 } else { c.to_digit(10).unwrap_or(0) })
        .sum();
    let l2 = format!("{}{}", &body[..68], sum % 10);
    std::fs::write(&path, format!("{l1}\n{l2}\n")).unwrap();
    let o = leofault(&["tle", "parse", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("eccentricity"));
}

#[test]
fn invalid_configs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.jsonl");
    let cases = [
        (r#"{"duration_s": 60, "shells": [], "bogus": 1}"#, "bogus"),
        (r#"{"duration_s": 60}"#, "shells"),
        (
            r#"{"duration_s": 0, "shells": [{"altitude_km": 550, "inclination_deg": 53, "planes": 3, "sats_per_plane": 3}]}"#,
            "duration_s",
        ),
        (
            r#"{"duration_s": 60, "shells": [{"altitude_km": 550, "inclination_deg": 53, "planes": 3, "sats_per_plane": 3}], "faults": {"seu_permanent_prob": 2}}"#,
            "seu_permanent_prob",
        ),
        (
            r#"{"duration_s": 60, "shells": [{"altitude_km": 550, "inclination_deg": 53, "planes": 3, "sats_per_plane": 3, "altitude": 1}]}"#,
            "altitude",
        ),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.json"));
        std::fs::write(&cfg, body).unwrap();
        let o = leofault(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(!o.status.success(), "case {i} accepted");
        assert!(stdout(&o).is_empty());
        assert!(stderr(&o).contains(field), "case {i}: {}", stderr(&o));
    }
    assert!(!out.exists());
}

#[test]
fn simulate_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sats.tle"), ISS).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"tle_files": ["sats.tle"], "duration_s": 600, "faults": {"seu_rate_per_device_day": 0}}"#,
    )
    .unwrap();
    let out = dir.path().join("t.jsonl");
    let o = leofault(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("satellites: 1"), "{summary}");
    assert!(summary.contains("\"seu_rate_per_device_day\": 0.0"), "{summary}");
    let trace = std::fs::read_to_string(&out).unwrap();
    assert!(trace.starts_with("{\"schema\":\"leofault/1\"}\n"));
    assert!(!trace.ends_with("\n\n"));
}
