#include "netmed/cli.hpp"

int main(int argc, char** argv) { return netmed::cli::run(argc, argv); }
