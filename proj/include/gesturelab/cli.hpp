#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gesturelab::cli {

struct RunConfig {
    std::string data_root;
    std::string model_name = "resnet50";
    int epochs = 25;
    int batch_size = 32;
    double split_ratio = 0.25;
    std::uint64_t seed = 42;
    int queue_capacity = 128;
    std::string output_dir;
    std::string weights_dir;  // defaults from GESTURELAB_WEIGHTS_DIR
    int stride = 1;
};

/// Flat key=value config file; `overrides` (typically from flags) win over
/// file values, which win over defaults. Unknown keys and out-of-range values
/// raise errors naming the key. An empty path skips the file layer.
RunConfig load_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides);

/// Entry point behind the `gesturelab` binary. argv excludes the program
/// name. Returns the process exit status; failures print one diagnostic line.
int run_command(const std::vector<std::string>& argv);

}  // namespace gesturelab::cli
