#include "asrb/cli.hpp"

int main(int argc, char** argv) { return asrb::cli_run(argc, argv); }
