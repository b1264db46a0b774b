fn main() {
    std::process::exit(ivorra_watkins::cli::main_entry());
}
