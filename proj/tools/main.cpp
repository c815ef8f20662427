#include "commands.hpp"

int main(int argc, char** argv) { return nonlocal::cli::run_cli(argc, argv); }
