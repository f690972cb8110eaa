use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cmm_cli::{run, Cli, Io};
use cmm_core::alloc::TrackingAllocator;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator::new();

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    // Unlocked handles: the command may run inside a rayon pool.
    let mut out = std::io::BufWriter::new(std::io::stdout());
    let mut err = std::io::stderr();
    let mut io = Io {
        out: &mut out,
        err: &mut err,
        alloc: Some(&ALLOC),
    };
    let status = match run(cli, &mut io) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(e.exit_code())
        }
    };
    let _ = out.flush();
    status
}
