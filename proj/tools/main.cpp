#include "relmine/cli.hpp"

int main(int argc, char** argv) { return relmine::cli::run(argc, argv); }
