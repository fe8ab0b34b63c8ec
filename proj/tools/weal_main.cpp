#include "weal/cli.hpp"

int main(int argc, char** argv) { return weal::run_cli(argc, argv); }
