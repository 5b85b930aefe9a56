#include "cli.hpp"

int main(int argc, char** argv)
{
  return statedpref::cli::run(std::vector<std::string>(argv, argv + argc));
}
