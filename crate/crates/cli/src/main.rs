use log::LevelFilter;

fn init_logging() {
    let level = match std::env::var("CMC_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() {
    init_logging();
    std::process::exit(cmc_cli::run(std::env::args_os()));
}
