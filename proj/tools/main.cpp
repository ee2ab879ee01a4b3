#include "pcfnet/cli.hpp"

int main(int argc, char** argv) { return pcfnet::run_cli(argc, argv); }
