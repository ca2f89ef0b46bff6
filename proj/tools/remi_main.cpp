#include "remi/cli.hpp"

int main(int argc, char** argv) { return remi::run_cli(argc, argv); }
