#include <fluxbic/cli.hpp>

int main(int argc, char** argv) { return fluxbic::run_cli(argc, argv); }
