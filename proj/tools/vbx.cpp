#include "vbx/cli.hpp"

int main(int argc, char** argv) { return vbx::run(argc, argv); }
