#include "cli.hpp"

#include <csignal>
#include <iostream>

namespace {
std::atomic<bool> g_stop{false};
}

int main(int argc, char** argv) {
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  return imitation::cli::run(argc, argv, std::cout, std::cerr, &g_stop);
}
