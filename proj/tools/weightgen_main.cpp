// Generates the deterministic backbone checkpoints consumed by
// assemble_classifier. Point GESTURELAB_WEIGHTS_DIR at the output directory.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gesturelab/model.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate backbone checkpoint files"};

    std::string out_dir;
    std::vector<std::string> names;
    bool force = false;
    app.add_option("--out", out_dir, "checkpoint output directory")->required();
    app.add_option("--models", names, "backbone names (default: all)");
    app.add_flag("--force", force, "overwrite existing checkpoint files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (names.empty())
            for (const auto& spec : gesturelab::model::backbone_registry()) names.push_back(spec.name);

        for (const auto& name : names) {
            const auto& spec = gesturelab::model::lookup_backbone(name);
            const auto file = gesturelab::model::checkpoint_path(out_dir, spec.name);
            if (!force && std::filesystem::exists(file)) {
                std::cout << file.string() << " exists, skipping (use --force to regenerate)\n";
                continue;
            }
            gesturelab::model::write_backbone_checkpoint(spec, file);
            std::cout << "wrote " << file.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "weightgen: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
