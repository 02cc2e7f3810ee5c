#include <iostream>

#include "tarlab/cli.hpp"

int main(int argc, char** argv)
{
    return tarlab::cli::run(argc, argv, std::cout, std::cerr);
}
