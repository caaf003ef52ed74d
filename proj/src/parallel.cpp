#include "osem/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

#include "osem/log.hpp"

namespace osem {
namespace {

std::atomic<int> g_thread_override{0};

int threads_from_environment() {
  if (const char* env = std::getenv("OSEM_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value >= 1) return value;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::mutex g_sink_mutex;
WarningSink g_sink;
std::atomic<std::size_t> g_warnings{0};

}  // namespace

int max_threads() {
  const int forced = g_thread_override.load();
  return forced > 0 ? forced : threads_from_environment();
}

void set_max_threads(int threads) { g_thread_override.store(threads > 0 ? threads : 0); }

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  ++g_warnings;
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "osem: warning: " << message << '\n';
  }
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace osem
