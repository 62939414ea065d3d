#include "dvfinv/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dvfinv {
namespace {

int default_thread_count() {
  if (const char* env = std::getenv("DVFINV_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> value{default_thread_count()};
  return value;
}

}  // namespace

void set_thread_count(int n) { thread_setting().store(n > 0 ? n : default_thread_count()); }

int thread_count() { return thread_setting().load(); }

}  // namespace dvfinv
