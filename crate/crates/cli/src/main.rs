use std::io;

fn main() {
    let code = msc_deadlock::run_cli(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
