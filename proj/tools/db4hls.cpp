#include <csignal>

#include "db4hls/cli.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  // First Ctrl-C lets running syntheses finish and commit; no new ones start.
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv + 1, argv + argc);
  return db4hls::cli::run_cli(args, std::cout, std::cerr, &g_stop);
}
