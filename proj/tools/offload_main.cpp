#include "offload/cli.hpp"

int main(int argc, char** argv) { return offload::cli::run(argc, argv); }
