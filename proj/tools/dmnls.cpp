#include "dmnls/cli.hpp"

int main(int argc, char** argv) { return dmnls::cli::run(argc, argv); }
