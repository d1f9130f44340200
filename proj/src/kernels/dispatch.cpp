#include <cstdlib>
#include <vector>

#include "kernels_internal.hpp"

namespace gbs::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(GBS_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::vector<const KernelTable*> detect() {
  std::vector<const KernelTable*> tables{&scalar_kernels()};
#if defined(GBS_HAVE_AVX2_KERNELS)
  if (cpu_has_avx2()) tables.push_back(&detail::avx2_kernels());
#endif
#if defined(GBS_HAVE_NEON_KERNELS)
  tables.push_back(&detail::neon_kernels());
#endif
  return tables;
}

const std::vector<const KernelTable*>& tables() {
  static const std::vector<const KernelTable*> t = detect();
  return t;
}

const KernelTable& select() {
  const auto& t = tables();
  if (const char* requested = std::getenv("GBS_KERNELS")) {
    for (const KernelTable* k : t)
      if (k->name == requested) return *k;
  }
  return *t.back();
}

}  // namespace

std::span<const KernelTable* const> available() { return tables(); }

const KernelTable& active() {
  static const KernelTable& k = select();
  return k;
}

}  // namespace gbs::kernels
