fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LUMEN_LOG_LEVEL", "warn")).init();
    std::process::exit(lumen::run_cli(std::env::args_os()));
}
