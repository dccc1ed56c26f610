use clap::Parser;

fn main() {
    // ADVQ_THREADS caps worker parallelism; default is one thread per core.
    if let Ok(threads) = std::env::var("ADVQ_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = advq::cli::Cli::parse();
    std::process::exit(advq::cli::execute(cli));
}
