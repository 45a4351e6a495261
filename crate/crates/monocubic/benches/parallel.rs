fn main() {
    // Benchmarks are added once the enumeration driver lands.
}
