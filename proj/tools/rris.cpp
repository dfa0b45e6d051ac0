#include "rris/cli.hpp"

int main(int argc, char** argv) { return rris::cli::run(argc, argv); }
