// Writes a small procedurally generated texture dataset in the ingestion
// layout (<root>/<class>/*.png); handy for smoke-testing the pipeline
// without real gesture recordings.

#include <iostream>

#include <CLI11.hpp>

#include "gesturelab/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic texture dataset"};

    std::string out_dir;
    int per_class = 300;
    int size = 256;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "dataset root directory")->required();
    app.add_option("--per-class", per_class, "images per class");
    app.add_option("--size", size, "image side length in pixels");
    app.add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const int n = gesturelab::synthetic::write_texture_dataset(out_dir, per_class, size, seed);
        std::cout << "wrote " << n << " images under " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "datagen: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
