#include "cli.hpp"

int main(int argc, char** argv) { return tflat::cli::run(argc, argv); }
