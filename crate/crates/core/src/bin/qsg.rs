use std::io::Write;
use std::time::Instant;

fn main() {
    let start = Instant::now();
    let out = qsg::cli::run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    if std::env::var_os("QSG_TIMING").is_some() {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    let _ = std::io::stdout().flush();
    std::process::exit(out.code());
}
