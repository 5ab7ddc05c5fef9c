#include "micsel/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return micsel::cli_main(argc, argv, std::cout, std::cerr);
}
