#include "tgen/cli.hpp"

int main(int argc, char** argv) { return tgen::cli::run(argc, argv); }
