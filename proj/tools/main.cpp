#include "ema/cli.hpp"

int main(int argc, char** argv) { return ema::run_cli(argc, argv); }
