#include "kinid/cli.hpp"

int main(int argc, char** argv) { return kinid::cli_main(argc, argv); }
