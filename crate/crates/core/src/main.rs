use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("RAMPFORGE_LOG", "warn")).init();
    std::process::exit(rampforge::cli::main_with_args(std::env::args_os()));
}
