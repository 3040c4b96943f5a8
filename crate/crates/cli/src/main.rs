fn main() {
    std::process::exit(ini_sim::run(std::env::args_os()));
}
