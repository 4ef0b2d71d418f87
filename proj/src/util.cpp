#include "spmap/util.hpp"

#include <cstdlib>
#include <string>

namespace spmap {

int default_workers() {
  const char* env = std::getenv("SPMAP_WORKERS");
  if (env != nullptr) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace spmap
