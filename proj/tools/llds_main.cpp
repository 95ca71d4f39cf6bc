#include "llds/cli.hpp"

int main(int argc, char** argv) { return llds::cli::run(argc, argv); }
