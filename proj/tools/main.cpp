#include "viewseek/cli.hpp"

int main(int argc, char** argv) { return viewseek::run_cli(argc, argv); }
