#include "kdvdelta/cli.hpp"

int main(int argc, char** argv) { return kdvdelta::cli::run(argc, argv); }
