#include "factorpred/cli.hpp"

int main(int argc, char** argv) { return factorpred::cli_main(argc, argv); }
