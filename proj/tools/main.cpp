#include <iostream>
#include <string>
#include <vector>

#include "urn/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return urn::cli::run(args, std::cout, std::cerr);
}
