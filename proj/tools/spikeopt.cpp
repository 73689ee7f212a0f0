#include "spikeopt/cli.hpp"

int main(int argc, char** argv) { return spikeopt::cli::main(argc, argv); }
