#include "pint/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace pint {
namespace {
std::atomic<bool> g_enabled{true};
std::atomic<long> g_count{0};
std::mutex g_mutex;
}  // namespace

void warn(std::string_view message) {
  ++g_count;
  if (!g_enabled) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[pint] warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_enabled = enabled; }

long warning_count() { return g_count; }

}  // namespace pint
