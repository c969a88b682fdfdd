#include "minv/cli/cli.hpp"

int main(int argc, char** argv) { return minv::cli::run(argc, argv); }
