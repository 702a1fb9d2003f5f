#include "maxsurf/cli.hpp"

int main(int argc, char** argv) { return maxsurf::cli::dispatch(argc, argv); }
