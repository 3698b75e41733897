fn main() {
    pancake::cli::main()
}
