#include <iostream>

#include "weierlab.hpp"

int main(int argc, char** argv) {
  return weierlab::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
