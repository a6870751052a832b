use std::io;
use std::process::ExitCode;

use tracing_subscriber::EnvFilter;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .init();
    ExitCode::from(gavis_service::cli::main_with(
        std::env::args_os(),
        &mut io::stdout(),
        &mut io::stderr(),
    ))
}
