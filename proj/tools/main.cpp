#include "stokesrobin/cli.hpp"

int main(int argc, char** argv) { return stokesrobin::cli::run(argc, argv); }
