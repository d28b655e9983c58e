//! Regenerate the six capacity curves (four UCAs, two QF-UCAs) through the CLI entry point.

use qfuca::cli::main_with_args;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "figure3-output".into());
    let code = main_with_args(["qfuca", "figure3", "--output-dir", &dir]);
    if code == 0 {
        for name in ["uca_9", "uca_16", "uca_25", "uca_32", "qfuca_9", "qfuca_25"] {
            let text = std::fs::read_to_string(format!("{dir}/{name}.csv")).unwrap();
            let last = text.lines().last().unwrap();
            println!("{name:<9} at 30 dB: {last}");
        }
    }
    std::process::exit(code);
}
