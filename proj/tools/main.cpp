#include "cli.hpp"

int main(int argc, char** argv) { return narfima::cli::run(argc, argv); }
