#include "cli.hpp"

int main(int argc, char** argv) { return tdleaf::cli::run(argc, argv); }
