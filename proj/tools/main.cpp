#include "meta_audit/cli.hpp"

int main(int argc, char** argv) { return meta_audit::cli_main(argc, argv); }
