#include "cosim/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    cosim::cli::configure_logging();
    return cosim::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
