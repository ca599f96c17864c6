//! Driving every command from configuration text, as the `qmon` binary does.

use qmon::cli::{run, Command, Flags};
use qmon::config::parse_config;

const CONFIG: &str = r#"
budget_db = 30

[topology]
kind = "ring"
node_kind = "cwdm_oadm_simple"
access_networks = 8

[plan]
source_width_nm = 160
"#;

fn main() -> qmon::Result<()> {
    let doc = parse_config(CONFIG)?;
    println!("canonical form:\n{}", doc.to_canonical_string()?);

    for cmd in [Command::Validate, Command::Capacity] {
        let out = run(cmd, CONFIG, Flags::default());
        println!("$ qmon {cmd:?} (exit {})\n{}", out.code, out.stdout);
    }
    let out = run(Command::Capacity, CONFIG, Flags { records: true, ..Flags::default() });
    println!("records:\n{}", out.stdout);

    let bad = run(Command::Validate, "[topology]\nwidth = 3\n", Flags::default());
    println!("bad config (exit {}): {}", bad.code, bad.stderr);
    Ok(())
}
