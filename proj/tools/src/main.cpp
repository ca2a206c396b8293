#include "epiwave/io/cli.hpp"

int main(int argc, char** argv) { return epiwave::io::cli_main(argc, argv); }
