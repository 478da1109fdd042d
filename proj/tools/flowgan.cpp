// flowgan: preprocess videos into flow-map patches, train the reconstruction GAN,
// calibrate and score videos, and run the one-class image benchmark.

#include "flowgan/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return flowgan::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
