#include <iostream>

#include <strengthlab/gateway/cli.hpp>

int main(int argc, char** argv) { return strengthlab::gateway::run_cli(argc, argv, std::cout, std::cerr); }
