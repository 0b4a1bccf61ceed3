fn main() {
    let (code, out) = sft_cli::run_command(std::env::args_os());
    if code == 0 {
        print!("{out}");
    } else {
        eprintln!("{}", out.trim_end());
    }
    std::process::exit(code);
}
