#pragma once

// Pack-generic kernel bodies, instantiated by both backend translation
// units. Draw ids within a replication: 0 and 1 for the two prior shares,
// then 2 + 4*agent + {0: state, 1: y, 2: rule, 3: report draw}.

#include "ctsim/mc_kernels.hpp"
#include "ctsim/pack.hpp"

namespace ctsim::mc::detail {

namespace pk = ctsim::pack;

template <class P>
inline typename P::F clamp01_pk(typename P::F x) {
  using F = typename P::F;
  F zero = P::set1(0.0), one = P::set1(1.0);
  x = P::select(P::lt(x, zero), zero, x);
  return P::select(P::lt(one, x), one, x);
}

template <class P>
void lin_gauss_records(const LinearGaussianCell& c, std::uint64_t master,
                       std::uint64_t rep0, std::uint64_t n, double* p_out,
                       double* ps_out, double* pbar_out, double* phat_out) {
  using F = typename P::F;
  using U = typename P::U;
  const F mu_p = P::set1(c.mu_p), sd_p = P::set1(c.sigma_p);
  const F mu_s = P::set1(c.mu_s), sd_s = P::set1(c.sigma_s);
  const F a0 = P::set1(c.a0), a1 = P::set1(c.a1), a2 = P::set1(c.a2);
  const F g0 = P::set1(c.g0), g1 = P::set1(c.g1), g2 = P::set1(c.g2);
  const U mkey = P::set1u(master);
  const U id_p = P::set1u(0), id_s = P::set1u(1);

  for (std::uint64_t i = 0; i < n; i += P::width) {
    U key = pk::derive<P>(mkey, P::lane_index(rep0 + i));
    F zp = pk::normal_icdf<P>(pk::uniform_open<P>(pk::derive<P>(key, id_p)));
    F zs = pk::normal_icdf<P>(pk::uniform_open<P>(pk::derive<P>(key, id_s)));
    F p = P::fma(sd_p, zp, mu_p);
    F ps = P::fma(sd_s, zs, mu_s);
    F pbar = P::fma(a2, ps, P::fma(a1, p, a0));
    F phat = P::fma(g2, ps, P::fma(g1, p, g0));
    P::store(p_out + i, p);
    P::store(ps_out + i, ps);
    P::store(pbar_out + i, pbar);
    P::store(phat_out + i, phat);
  }
}

template <class P>
void micro_records(const MicrofoundedCell& c, std::uint64_t master,
                   std::uint64_t rep0, std::uint64_t n, double* p_out,
                   double* ps_out, double* pbar_out) {
  using F = typename P::F;
  using U = typename P::U;
  using M = typename P::M;
  const F mu_p = P::set1(c.mu_p), sd_p = P::set1(c.sigma_p);
  const F mu_s = P::set1(c.mu_s), sd_s = P::set1(c.sigma_s);
  const F eta = P::set1(c.eta_s), beta = P::set1(c.beta), xi = P::set1(c.xi);
  const U mkey = P::set1u(master);

  for (std::uint64_t i = 0; i < n; i += P::width) {
    U key = pk::derive<P>(mkey, P::lane_index(rep0 + i));
    F zp = pk::normal_icdf<P>(pk::uniform_open<P>(pk::derive<P>(key, P::set1u(0))));
    F zs = pk::normal_icdf<P>(pk::uniform_open<P>(pk::derive<P>(key, P::set1u(1))));
    F p = P::fma(sd_p, zp, mu_p);
    F ps = P::fma(sd_s, zs, mu_s);
    F pc = clamp01_pk<P>(p);
    F psc = clamp01_pk<P>(ps);

    U count = P::set1u(0);
    for (std::uint64_t a = 0; a < c.agents; ++a) {
      std::uint64_t base = 2 + 4 * a;
      F u_state = pk::uniform_open<P>(pk::derive<P>(key, P::set1u(base)));
      F u_y = pk::uniform_open<P>(pk::derive<P>(key, P::set1u(base + 1)));
      F u_rule = pk::uniform_open<P>(pk::derive<P>(key, P::set1u(base + 2)));
      F u_draw = pk::uniform_open<P>(pk::derive<P>(key, P::set1u(base + 3)));

      M in_s = P::lt(u_state, eta);
      M y = P::lt(u_y, pc);
      M s_report = P::m_select(P::lt(u_rule, beta), P::lt(u_draw, psc), y);
      // A: report y when the draw is accurate, else the flip
      M a_report = P::m_xor(y, P::m_not(P::lt(u_draw, xi)));
      count = P::count_accum(count, P::m_select(in_s, s_report, a_report));
    }

    P::store(p_out + i, p);
    P::store(ps_out + i, ps);
    alignas(32) std::uint64_t counts[P::width];
    P::store_u(counts, count);
    for (int l = 0; l < P::width; ++l)
      pbar_out[i + l] = double(counts[l]) / double(c.agents);
  }
}

}  // namespace ctsim::mc::detail
