#include "swcorr_cli.hpp"

int main(int argc, char** argv) { return swcorr::cli::run(argc, argv); }
