#include "chinv/cli.hpp"

int main(int argc, char** argv) { return chinv::run_cli(argc, argv); }
