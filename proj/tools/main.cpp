#include "hspim/cli.hpp"

int main(int argc, char** argv) {
    return hspim::run_cli(argc, argv);
}
