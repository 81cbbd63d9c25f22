// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "eddylab/cli.hpp"

int main(int argc, char** argv) { return eddylab::cli::main(argc, argv, std::cout, std::cerr); }
