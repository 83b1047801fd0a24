#include "focalframes/cli_app.hpp"

int main(int argc, char** argv) { return focalframes::run_cli(argc, argv); }
