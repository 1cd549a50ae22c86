#include "d2eal/cli.hpp"

int main(int argc, char** argv) { return d2eal::cli_main(argc, argv); }
