#include "daflow/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return daflow::cli::run(argc, argv, std::cout, std::cerr);
}
