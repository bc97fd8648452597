#include "coevo/cli.h"

int main(int argc, char** argv) { return coevo::cli::run(argc, argv); }
