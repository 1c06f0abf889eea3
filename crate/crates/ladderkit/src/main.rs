fn main() {
    ladderkit::cli::main();
}
