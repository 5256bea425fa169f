#include "cli.hpp"

int main(int argc, char** argv) { return rankbench::cli::run_cli(argc, argv); }
