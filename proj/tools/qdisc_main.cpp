#include <iostream>

#include "qdisc/cli.hpp"

int main(int argc, char** argv) {
  return qdisc::cli::run(argc, argv, std::cout, std::cerr);
}
