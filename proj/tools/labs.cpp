#include "labs/cli.hpp"

int main(int argc, char** argv) { return labsearch::cli::run(argc, argv); }
