fn main() {
    std::process::exit(crowdseq_cli::run(std::env::args_os().collect()));
}
