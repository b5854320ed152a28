#include "dsflow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dsflow {

namespace {

int from_environment() {
  const char* value = std::getenv("DSFLOW_NUM_THREADS");
  if (value == nullptr) return 1;
  try {
    const int workers = std::stoi(value);
    return workers > 0 ? workers : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

std::atomic<int>& workers() {
  static std::atomic<int> count{from_environment()};
  return count;
}

}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int count) { workers().store(count > 0 ? count : 1); }

}  // namespace dsflow
