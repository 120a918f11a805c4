use std::io::{self, BufReader};

fn main() {
    let stdin = io::stdin();
    let mut input = BufReader::new(stdin.lock());
    let code = treecode::cli::run(std::env::args_os(), &mut input, &mut io::stdout().lock(), &mut io::stderr());
    std::process::exit(code);
}
