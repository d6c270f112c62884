// Compiled with -mavx2 -mfma; callers reach it through the runtime dispatch
// only after a CPU capability check.

#include "mc_kernels_impl.hpp"

#ifndef CTSIM_PACK_HAS_AVX2
#error "kernels_avx2.cpp requires -mavx2 -mfma"
#endif

namespace ctsim::mc {

KernelSet avx2_kernels() {
  return KernelSet{&detail::lin_gauss_records<pack::Avx2Pack>,
                   &detail::micro_records<pack::Avx2Pack>, "avx2"};
}

}  // namespace ctsim::mc
