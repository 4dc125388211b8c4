#include "qspace/cli.hpp"

int main(int argc, char** argv) { return qspace::cli::run(argc, argv); }
