#include "cli.hpp"

int main(int argc, char** argv) { return lsmdp::cli::run(argc, argv); }
