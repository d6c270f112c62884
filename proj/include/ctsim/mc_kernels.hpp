#pragma once

// Kernel protocol shared by the scalar and AVX2 backends. Kernels only fill
// per-replication records; deviation streams and reductions live in the
// engine and are common to both backends.

#include <cstdint>

namespace ctsim::mc {

struct LinearGaussianCell {
  double mu_p, sigma_p, mu_s, sigma_s;
  double a0, a1, a2;  // outcome loadings
  double g0, g1, g2;  // posterior loadings
};

struct MicrofoundedCell {
  double mu_p, sigma_p, mu_s, sigma_s;
  double eta_s;
  double beta, xi;
  std::uint64_t agents;
};

// Writes records for replications [rep0, rep0 + n). The AVX2 variants
// require n to be a multiple of 4; the engine routes remainders to the
// scalar functions.
using LinGaussFn = void (*)(const LinearGaussianCell&, std::uint64_t master,
                            std::uint64_t rep0, std::uint64_t n, double* p,
                            double* p_s, double* p_bar, double* p_hat);

// p_bar here is the empirical report share; p_hat is applied by the engine.
using MicroFn = void (*)(const MicrofoundedCell&, std::uint64_t master,
                         std::uint64_t rep0, std::uint64_t n, double* p,
                         double* p_s, double* p_bar);

struct KernelSet {
  LinGaussFn lin_gauss;
  MicroFn micro;
  const char* name;
};

KernelSet scalar_kernels();
#ifdef CTSIM_HAVE_AVX2_TU
KernelSet avx2_kernels();
#endif

}  // namespace ctsim::mc
