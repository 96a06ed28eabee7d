#include "fermitele/cli.hpp"

int main(int argc, char** argv) { return fermitele::cli_main(argc, argv); }
