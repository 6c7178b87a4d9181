fn main() {
    // filled in once the library surface is complete
}
