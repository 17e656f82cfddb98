#include "morevis/cli.hpp"

int main(int argc, char** argv) { return morevis::cli::run(argc, argv); }
