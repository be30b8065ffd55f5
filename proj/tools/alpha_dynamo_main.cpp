#include "dynamo/cli_runner.hpp"

int main(int argc, char** argv) { return dynamo::run_cli(argc, argv); }
