#include <vector>
#include <string>

#include "gantsne/commands.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return gantsne::run_cli(args);
}
