// Command-line interface. Subcommands are added as the library grows; the
// full set is implemented at the bottom of this file.

#include <iostream>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::cerr << "geogreen: no subcommands wired yet\n";
    return 2;
}
