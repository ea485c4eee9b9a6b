#include "critmet/cli.hpp"

int main(int argc, char** argv) { return critmet::cli::main(argc, argv); }
