#include <iostream>

#include "mht/cli.hpp"

int main(int argc, char** argv) {
    return mht::run(argc, argv, std::cout, std::cerr);
}
