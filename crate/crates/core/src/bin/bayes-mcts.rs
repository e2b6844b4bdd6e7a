fn main() {
    std::process::exit(bayes_mcts::cli::main_with_args(std::env::args().collect()));
}
