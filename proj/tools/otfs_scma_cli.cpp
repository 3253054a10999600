#include "otfs_scma/cli.hpp"

int main(int argc, char** argv) { return otfs::cli_main(argc, argv); }
