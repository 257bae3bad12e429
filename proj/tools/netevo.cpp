#include "netevo/cli.hpp"

int main(int argc, char** argv) { return netevo::run_cli(argc, argv); }
