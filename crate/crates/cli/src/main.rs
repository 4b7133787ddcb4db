use std::io::Write;

fn main() {
    let out = glrt_cli::app::run_from(std::env::args_os());
    // Write everything at once so a failing command leaves no partial table.
    let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
