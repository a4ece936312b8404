#include <iostream>

#include "sgdg2/app/commands.hpp"

int main(int argc, char** argv) { return sgdg2::app::run_cli(argc, argv, std::cout, std::cerr); }
