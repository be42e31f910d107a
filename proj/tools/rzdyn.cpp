#include <rzdyn/cli.hpp>

int main(int argc, char** argv) { return rzdyn::cli::run(argc, argv); }
