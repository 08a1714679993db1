fn main() {
    std::process::exit(motionpulse::app::run_from(std::env::args_os()));
}
