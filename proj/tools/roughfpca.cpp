#include "roughfpca/cli.hpp"

int main(int argc, char** argv) { return roughfpca::cli_main(argc, argv); }
