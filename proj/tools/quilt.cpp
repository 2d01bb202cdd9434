// Command-line front end.  Subcommands are filled in as the library grows;
// see README.md for the interface contract.
#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("quilt: no subcommands wired up yet");
  return 0;
}
