#include "legoabsa/cli.hpp"

int main(int argc, char** argv) { return legoabsa::run_cli(argc, argv); }
