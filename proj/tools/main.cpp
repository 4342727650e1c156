#include "cli.hpp"

int main(int argc, char** argv) { return discosum::cli::run(argc, argv); }
