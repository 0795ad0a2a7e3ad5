#include "nlcvp/cli.hpp"

int main(int argc, char** argv) { return nlcvp::cli::main_entry(argc, argv); }
