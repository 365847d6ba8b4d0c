#include "droplet/cli.hpp"

int main(int argc, char** argv) { return droplet::run_cli(argc, argv); }
