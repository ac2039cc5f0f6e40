#include "cgrep/cli.hpp"

int main(int argc, char** argv) { return cgrep::cli::main(argc, argv); }
