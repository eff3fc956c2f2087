use std::fs;
use std::path::Path;

use rexsim::cli::run;
use rexsim::csv::{read_table, strip_timestamp};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rexsim(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("rexsim").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = rexsim(&["plot"]);
    assert_eq!(o.code, 2);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("plot"), "{}", o.stderr);
    assert_eq!(rexsim(&["budget", "--bogus"]).code, 2);
}

#[test]
fn help_and_version_go_to_stdout() {
    let o = rexsim(&["--help"]);
    assert_eq!(o.code, 0);
    for sub in ["spectro", "cavity", "budget", "rabi", "ramsey", "echo", "g2", "sfs", "histogram", "spinbath", "flipflop", "golden"] {
        assert!(o.stdout.contains(sub), "help lacks {sub}");
    }
    let o = rexsim(&["--version"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn negative_q_factor_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[cavity]\nq_factor = -1\n").unwrap();
    let o = rexsim(&["cavity", "--config", path_str(&cfg)]);
    assert_eq!(o.code, 3);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("q_factor"), "{}", o.stderr);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);
}

#[test]
fn config_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[cavity]\nq_factr = 3900\n", "q_factr"),
        ("[cavity]\nmode_volume_um3 = 0.056 nm3\n", "nm3"),
        ("[field]\nb_field_mt = strong\n", "strong"),
        ("[lasers]\n", "lasers"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.ini"));
        fs::write(&cfg, text).unwrap();
        let o = rexsim(&["budget", "--config", path_str(&cfg)]);
        assert_eq!(o.code, 3, "{text}");
        assert!(o.stderr.contains(needle), "{text}: {}", o.stderr);
        assert!(o.stderr.contains("line"), "{text}: {}", o.stderr);
    }
    let o = rexsim(&["budget", "--config", path_str(&dir.path().join("missing.ini"))]);
    assert_ne!(o.code, 0);
    assert!(o.stderr.contains("missing.ini"), "{}", o.stderr);
}

#[test]
fn shipped_config_runs_golden() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/config/default.ini");
    let o = rexsim(&["golden", "--config", cfg]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let compared = o.stdout.lines().filter(|l| l.trim_end().ends_with("ok")).count();
    assert!(compared >= 12, "{}", o.stdout);
    assert!(!o.stdout.contains("FAIL"), "{}", o.stdout);
}

#[test]
fn failed_fit_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let mut text = String::from("delay_s,signal\n");
    for k in 0..50 {
        text.push_str(&format!("{:?},0.5\n", k as f64 * 1e-7));
    }
    fs::write(&csv, text).unwrap();
    let o = rexsim(&["fit", "ramsey", "--input", path_str(&csv)]);
    assert_eq!(o.code, 4, "{}", o.stderr);
    assert!(o.stdout.is_empty());
}

#[test]
fn budget_lists_five_stages() {
    let o = rexsim(&["budget"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.lines().filter(|l| l.starts_with("stage ")).count(), 5, "{}", o.stdout);
    let overall = o.stdout.lines().find(|l| l.starts_with("overall")).unwrap();
    let v: f64 = overall.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((v - 0.036).abs() <= 0.005, "{overall}");
}

#[test]
fn rabi_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rabi.csv");
    let o = rexsim(&["rabi", "--nbar-max", "9", "--points", "50", "--pulse-ns", "250", "--out", path_str(&out)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert!(lines[..header].iter().all(|l| l.starts_with('#')));
    assert_eq!(lines.len() - header - 1, 50);
    let t = read_table(text.as_bytes()).unwrap();
    assert_eq!(t.meta("subcommand"), Some("rabi"));
    assert!(t.meta("seed").is_some());
    assert!(t.meta("rexsim_version").is_some());
    assert_eq!(t.meta("param.simulation.rabi_points"), Some("50"));
    assert_eq!(t.meta("param.simulation.rabi_pulse_ns").unwrap().parse::<f64>().unwrap(), 250.0);
    assert!(t.meta("g0_hz").is_some());
    assert!(t.meta("pulse_s").is_some());
}

#[test]
fn reruns_differ_only_in_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["ramsey", "--noise", "0.05"][..], &["echo", "--noise", "0.05"], &["sfs"], &["spinbath"], &["flipflop"]] {
        let mut files = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{}-{k}.csv", args[0]));
            let mut full = args.to_vec();
            full.extend(["--seed", "5", "--out", path_str(&out)]);
            let o = rexsim(&full);
            assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
            files.push(fs::read_to_string(&out).unwrap());
        }
        assert_eq!(strip_timestamp(&files[0]), strip_timestamp(&files[1]), "{args:?}");
        assert_eq!(files[0].lines().filter(|l| l.starts_with("# timestamp_unix")).count(), 1);
    }
}

#[test]
fn seed_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str| {
        let out = dir.path().join(format!("h{seed}.csv"));
        assert_eq!(rexsim(&["histogram", "--samples", "20000", "--seed", seed, "--out", path_str(&out)]).code, 0);
        let t = read_table(fs::read_to_string(&out).unwrap().as_bytes()).unwrap();
        t.numeric_column(1).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}

#[test]
fn fit_reads_back_simulated_traces() {
    let dir = tempfile::tempdir().unwrap();
    let echo = dir.path().join("echo.csv");
    assert_eq!(rexsim(&["echo", "--out", path_str(&echo)]).code, 0);
    let o = rexsim(&["fit", "echo", "--input", path_str(&echo), "--t-min-us", "4"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let t2: f64 = o.stdout.lines().find(|l| l.starts_with("t2 ")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((t2 - 25.4).abs() / 25.4 < 0.02, "{}", o.stdout);

    let sfs = dir.path().join("sfs.csv");
    assert_eq!(rexsim(&["sfs", "--out", path_str(&sfs)]).code, 0);
    let o = rexsim(&["fit", "power-law", "--input", path_str(&sfs)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let p: f64 =
        o.stdout.lines().find(|l| l.starts_with("exponent ")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((p - 2.9).abs() < 0.1, "{}", o.stdout);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = rexsim(&["budget", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.code, 1, "{}", o.stderr);
}
