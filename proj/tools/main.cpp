#include "modeconn/cli.hpp"

int main(int argc, char** argv) { return modeconn::run_command(argc, argv); }
