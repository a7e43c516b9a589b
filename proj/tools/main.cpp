#include "cli.hpp"

int main(int argc, char** argv) { return saliex::cli::run_command(argc, argv); }
