fn main() {
    std::process::exit(cone_spectra_cli::run(std::env::args_os()));
}
