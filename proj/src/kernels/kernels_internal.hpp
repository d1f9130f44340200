#pragma once

#include "gbs/kernels.hpp"

namespace gbs::kernels::detail {

#if defined(GBS_HAVE_AVX2_KERNELS)
const KernelTable& avx2_kernels();
#endif
#if defined(GBS_HAVE_NEON_KERNELS)
const KernelTable& neon_kernels();
#endif

inline double combine_lanes(const double lane[4]) {
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace gbs::kernels::detail
