#include "orbitcert/cli.hpp"

int main(int argc, char** argv) { return orbitcert::run_cli(argc, argv); }
