use std::process::ExitCode;

fn main() -> ExitCode {
    match wickgp_harness::cli::run(std::env::args_os()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                clap_err.exit();
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
