fn main() {
    std::process::exit(v2v_offload::cli::run());
}
