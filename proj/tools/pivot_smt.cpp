#include "pivot/cli.hpp"

int main(int argc, char** argv) { return pivot::cli::run(argc, argv); }
