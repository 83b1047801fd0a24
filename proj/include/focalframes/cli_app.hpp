#ifndef FOCALFRAMES_CLI_APP_HPP
#define FOCALFRAMES_CLI_APP_HPP

namespace focalframes {
/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);
}

#endif
