#include "encplan/cli.hpp"

int main(int argc, char** argv) { return encplan::run_cli(argc, argv); }
