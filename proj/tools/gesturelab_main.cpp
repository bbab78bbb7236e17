#include <string>
#include <vector>

#include "gesturelab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gesturelab::cli::run_command(args);
}
