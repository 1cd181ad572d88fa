#include "polymerlab/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace polymerlab::kernels {
namespace {

const Backend* pick_default() {
#if defined(__x86_64__) || defined(_M_X64)
  if (const char* env = std::getenv("POLYMERLAB_KERNELS")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_backend();
    if (want == "avx2" && avx2_supported()) return &avx2_backend();
    return &scalar_backend();
  }
  if (avx2_supported()) return &avx2_backend();
#endif
  return &scalar_backend();
}

const Backend*& current() {
  static const Backend* b = pick_default();
  return b;
}

}  // namespace

const Backend& active() { return *current(); }

void select(std::string_view name) {
  if (name == "scalar") {
    current() = &scalar_backend();
    return;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2") {
    if (!avx2_supported()) throw std::runtime_error("avx2 not supported on this cpu");
    current() = &avx2_backend();
    return;
  }
#endif
  throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

std::string active_name() { return current()->name; }

}  // namespace polymerlab::kernels
