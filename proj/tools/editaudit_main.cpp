// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "editaudit/report/cli.hpp"

int main(int argc, char** argv) { return editaudit::cli::run(argc, argv, std::cout, std::cerr); }
