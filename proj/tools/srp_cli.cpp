#include <iostream>

#include "srp/cli.hpp"

int main(int argc, char ** argv)
{
  return srp::cli::run(argc, argv, std::cout, std::cerr);
}
