fn main() {
    eprintln!("bbp: command-line interface not wired up yet");
    std::process::exit(64);
}
