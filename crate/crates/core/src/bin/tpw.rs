fn main() -> std::process::ExitCode {
    env_logger::init();
    paint_wars::cli::main()
}
