#include "lidg/harness.hpp"

int main(int argc, char** argv) { return lidg::cli_dispatch(argc, argv); }
