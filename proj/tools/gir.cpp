#include <string>
#include <vector>

#include "gir_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gir::cli::run(args);
}
