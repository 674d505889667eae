#include "openpop/cli.hpp"

int main(int argc, char** argv) { return openpop::run_cli(argc, argv); }
