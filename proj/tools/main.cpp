#include "cli_app.hpp"

int main(int argc, char** argv) { return rankfair::cli::run(argc, argv); }
