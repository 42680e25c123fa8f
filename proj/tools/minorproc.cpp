#include "minorproc/cli.hpp"

int main(int argc, char** argv) { return minorproc::cli::run(argc, argv); }
