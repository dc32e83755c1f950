use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(m) = cyldyn::init_threads() {
        eprintln!("error: {m}");
        return ExitCode::from(cyldyn::cli::EXIT_USAGE as u8);
    }
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    let code = cyldyn::cli::run(std::env::args_os(), &mut out, &mut err);
    ExitCode::from(code as u8)
}
