#include "compshop/cli.hpp"

int main(int argc, char** argv) { return compshop::cli::main(argc, argv); }
