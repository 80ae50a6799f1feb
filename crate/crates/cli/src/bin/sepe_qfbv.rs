fn main() {
    std::process::exit(sepe_qfbv::cli_main());
}
