fn main() -> std::process::ExitCode {
    annealed_walk_cli::main_entry()
}
