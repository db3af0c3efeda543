fn main() {
    std::process::exit(metricgraph::cli_io::cli_main(std::env::args_os()));
}
