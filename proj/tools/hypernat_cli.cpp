#include "hypernat/cli.hpp"

int main(int argc, char** argv) { return hypernat::cli_run(argc, argv); }
