#include "sigmasurf/cli.hpp"

int main(int argc, char** argv) { return sigmasurf::run(argc, argv); }
