#include "varcvx/cli.hpp"

int main(int argc, char** argv) { return varcvx::cli::run(argc, argv); }
