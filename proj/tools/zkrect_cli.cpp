#include "zkrect/cli.hpp"

int main(int argc, char** argv) { return zkrect::cli::run(argc, argv); }
