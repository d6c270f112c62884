#include "mc_kernels_impl.hpp"

namespace ctsim::mc {

KernelSet scalar_kernels() {
  return KernelSet{&detail::lin_gauss_records<pack::ScalarPack>,
                   &detail::micro_records<pack::ScalarPack>, "scalar"};
}

}  // namespace ctsim::mc
