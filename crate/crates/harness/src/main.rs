fn main() {
    std::process::exit(mipt_harness::run(std::env::args_os()));
}
