use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = io::stdout().lock();
    match multiphase::cli::run(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.code == multiphase::cli::EXIT_OK {
                print!("{}", e.message);
            } else {
                eprint!("error: {}", e.message);
                if !e.message.ends_with('\n') {
                    eprintln!();
                }
            }
            ExitCode::from(e.code as u8)
        }
    }
}
