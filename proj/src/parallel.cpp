#include "kakeya/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace kakeya {

namespace {
std::atomic<int> g_override{0};

int env_threads() {
  const char* v = std::getenv("KAKEYA_LAB_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    int n = std::stoi(v);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}
}  // namespace

int thread_count() {
  int o = g_override.load();
  if (o > 0) return o;
  if (int e = env_threads(); e > 0) return e;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int n) { g_override.store(n > 0 ? n : 0); }

}  // namespace kakeya
