#include "cli.hpp"

int main(int argc, char** argv) { return fowler::cli::run(argc, argv); }
