#include "cli/commands.hpp"

int main(int argc, char** argv) { return ssldyn::cli::run_main(argc, argv); }
