#include "app.hpp"

#include <iostream>

int main(int argc, char** argv) { return panelfx::cli::run(argc, argv, std::cout, std::cerr); }
