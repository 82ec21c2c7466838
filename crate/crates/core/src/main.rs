fn main() {
    if let Some(threads) = std::env::var("SEPALABEL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if threads > 0 {
            // only fails if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    std::process::exit(sepalabel::cli::main_with_args(std::env::args_os()));
}
