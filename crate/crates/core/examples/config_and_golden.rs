// Loads an INI configuration, recomputes the reference figures, and drives
// the command-line front end in-process.

use rexsim::config::ConfigDocument;
use rexsim::csv::{read_table, strip_timestamp};
use rexsim::golden::golden_report;

pub fn run_example() -> rexsim::Result<()> {
    let text = include_str!("../config/default.ini");
    let mut cfg = ConfigDocument::parse_str(text)?;
    print!("{}", golden_report(&cfg)?);

    // Lower the field and see which figures move out of band.
    cfg.set("field", "b_field_mt", "300")?;
    let r = golden_report(&cfg)?;
    for row in r.compared().filter(|r| r.passes() == Some(false)) {
        println!("at 300 mT {} moves to {:.4} {}", row.name, row.value, row.unit);
    }

    let dir = std::env::temp_dir().join(format!("rexsim-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let out = dir.join("budget.csv");
    let args = ["rexsim", "budget", "--out", out.to_str().unwrap()];
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = rexsim::cli::run(args, &mut stdout, &mut stderr);
    println!("rexsim budget exited with {code}");
    let csv = std::fs::read_to_string(&out)?;
    print!("{}", strip_timestamp(&csv).lines().filter(|l| !l.starts_with("# param")).map(|l| format!("{l}\n")).collect::<String>());
    let table = read_table(csv.as_bytes())?;
    println!("{} stages read back", table.rows.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
