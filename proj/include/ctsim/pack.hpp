#pragma once

// Lane-pack abstraction for the simulation kernels. Every kernel is written
// once against this interface and instantiated twice: ScalarPack is the
// reference backend, Avx2Pack the 4-wide variant. All operations are single
// IEEE-754 ops (or correctly-rounded fma/sqrt/div), so both instantiations
// execute the same op sequence per lane and produce bit-identical results.
// Kernel translation units are compiled with -ffp-contract=off so the scalar
// path cannot be silently fused.

#include <bit>
#include <cmath>
#include <cstdint>

#include "ctsim/rng.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define CTSIM_PACK_HAS_AVX2 1
#endif

namespace ctsim::pack {

struct ScalarPack {
  static constexpr int width = 1;
  using F = double;
  using U = std::uint64_t;
  using M = bool;

  static F set1(double v) { return v; }
  static U set1u(std::uint64_t v) { return v; }
  static U lane_index(std::uint64_t base) { return base; }

  static F add(F a, F b) { return a + b; }
  static F sub(F a, F b) { return a - b; }
  static F mul(F a, F b) { return a * b; }
  static F div(F a, F b) { return a / b; }
  static F fma(F a, F b, F c) { return std::fma(a, b, c); }
  static F sqrt(F a) { return std::sqrt(a); }
  static F neg(F a) { return -a; }

  static M lt(F a, F b) { return a < b; }
  static M le(F a, F b) { return a <= b; }
  static F select(M m, F a, F b) { return m ? a : b; }

  static M m_not(M m) { return !m; }
  static M m_xor(M a, M b) { return a != b; }
  static M m_select(M c, M a, M b) { return c ? a : b; }

  static U add_u(U a, U b) { return a + b; }
  static U mul_u(U a, U b) { return a * b; }
  static U xor_u(U a, U b) { return a ^ b; }
  static U or_u(U a, U b) { return a | b; }
  static U and_u(U a, U b) { return a & b; }
  template <int N> static U shr(U a) { return a >> N; }

  static F bits_to_f(U a) { return std::bit_cast<double>(a); }
  static U f_to_bits(F a) { return std::bit_cast<std::uint64_t>(a); }

  static U count_accum(U acc, M m) { return acc + (m ? 1u : 0u); }

  static void store(double* p, F a) { *p = a; }
  static void store_u(std::uint64_t* p, U a) { *p = a; }
};

#ifdef CTSIM_PACK_HAS_AVX2

struct Avx2Pack {
  static constexpr int width = 4;
  using F = __m256d;
  using U = __m256i;
  using M = __m256d;  // all-ones / all-zero lanes from vcmppd

  static F set1(double v) { return _mm256_set1_pd(v); }
  static U set1u(std::uint64_t v) { return _mm256_set1_epi64x((long long)v); }
  static U lane_index(std::uint64_t base) {
    return _mm256_add_epi64(set1u(base), _mm256_setr_epi64x(0, 1, 2, 3));
  }

  static F add(F a, F b) { return _mm256_add_pd(a, b); }
  static F sub(F a, F b) { return _mm256_sub_pd(a, b); }
  static F mul(F a, F b) { return _mm256_mul_pd(a, b); }
  static F div(F a, F b) { return _mm256_div_pd(a, b); }
  static F fma(F a, F b, F c) { return _mm256_fmadd_pd(a, b, c); }
  static F sqrt(F a) { return _mm256_sqrt_pd(a); }
  static F neg(F a) { return _mm256_xor_pd(a, _mm256_set1_pd(-0.0)); }

  static M lt(F a, F b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static M le(F a, F b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
  static F select(M m, F a, F b) { return _mm256_blendv_pd(b, a, m); }

  static M m_not(M m) {
    return _mm256_xor_pd(m, _mm256_castsi256_pd(_mm256_set1_epi64x(-1)));
  }
  static M m_xor(M a, M b) { return _mm256_xor_pd(a, b); }
  static M m_select(M c, M a, M b) { return _mm256_blendv_pd(b, a, c); }

  static U add_u(U a, U b) { return _mm256_add_epi64(a, b); }
  // 64x64 -> low 64 multiply out of 32-bit pieces (no vpmullq before AVX-512).
  static U mul_u(U a, U b) {
    U lo = _mm256_mul_epu32(a, b);
    U ahi_blo = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), b);
    U alo_bhi = _mm256_mul_epu32(a, _mm256_srli_epi64(b, 32));
    U hi = _mm256_slli_epi64(_mm256_add_epi64(ahi_blo, alo_bhi), 32);
    return _mm256_add_epi64(lo, hi);
  }
  static U xor_u(U a, U b) { return _mm256_xor_si256(a, b); }
  static U or_u(U a, U b) { return _mm256_or_si256(a, b); }
  static U and_u(U a, U b) { return _mm256_and_si256(a, b); }
  template <int N> static U shr(U a) { return _mm256_srli_epi64(a, N); }

  static F bits_to_f(U a) { return _mm256_castsi256_pd(a); }
  static U f_to_bits(F a) { return _mm256_castpd_si256(a); }

  // true lanes are all-ones == -1 as epi64, so subtracting adds one
  static U count_accum(U acc, M m) {
    return _mm256_sub_epi64(acc, _mm256_castpd_si256(m));
  }

  static void store(double* p, F a) { _mm256_storeu_pd(p, a); }
  static void store_u(std::uint64_t* p, U a) {
    _mm256_storeu_si256((__m256i*)p, a);
  }
};

#endif  // CTSIM_PACK_HAS_AVX2

// ---- pack-generic primitives -------------------------------------------

template <class P>
inline typename P::U mix64(typename P::U z) {
  z = P::mul_u(P::xor_u(z, P::template shr<30>(z)), P::set1u(0xbf58476d1ce4e5b9ull));
  z = P::mul_u(P::xor_u(z, P::template shr<27>(z)), P::set1u(0x94d049bb133111ebull));
  return P::xor_u(z, P::template shr<31>(z));
}

template <class P>
inline typename P::U derive(typename P::U key, typename P::U id) {
  return mix64<P>(P::add_u(key, P::mul_u(P::set1u(rng::kGolden), id)));
}

// 52 random bits -> (0,1), matching rng::u64_to_unit lane for lane.
template <class P>
inline typename P::F uniform_open(typename P::U x) {
  typename P::U mant = P::or_u(P::template shr<12>(x), P::set1u(0x3ff0000000000000ull));
  typename P::F f = P::sub(P::bits_to_f(mant), P::set1(1.0));
  return P::add(f, P::set1(0x1.0p-53));
}

// log for strictly positive normal arguments (no zero/inf/NaN handling: the
// callers feed values from uniform_open). Range reduction to [sqrt(1/2),
// sqrt(2)) then the atanh series with explicit fma.
template <class P>
inline typename P::F log_pos(typename P::F x) {
  using F = typename P::F;
  using U = typename P::U;
  U bits = P::f_to_bits(x);
  U ebits = P::template shr<52>(bits);
  U mbits = P::or_u(P::and_u(bits, P::set1u(0x000fffffffffffffull)),
                    P::set1u(0x3ff0000000000000ull));
  F m = P::bits_to_f(mbits);
  // biased exponent to double via the 2^52 magic constant (exact)
  F e = P::sub(P::bits_to_f(P::or_u(ebits, P::set1u(0x4330000000000000ull))),
               P::set1(0x1.0p52 + 1023.0));
  auto big = P::lt(P::set1(1.4142135623730951), m);
  m = P::select(big, P::mul(m, P::set1(0.5)), m);
  e = P::select(big, P::add(e, P::set1(1.0)), e);
  F s = P::div(P::sub(m, P::set1(1.0)), P::add(m, P::set1(1.0)));
  F t = P::mul(s, s);
  F p = P::set1(2.0 / 17.0);
  p = P::fma(p, t, P::set1(2.0 / 15.0));
  p = P::fma(p, t, P::set1(2.0 / 13.0));
  p = P::fma(p, t, P::set1(2.0 / 11.0));
  p = P::fma(p, t, P::set1(2.0 / 9.0));
  p = P::fma(p, t, P::set1(2.0 / 7.0));
  p = P::fma(p, t, P::set1(2.0 / 5.0));
  p = P::fma(p, t, P::set1(2.0 / 3.0));
  p = P::fma(p, t, P::set1(2.0));
  return P::fma(e, P::set1(0x1.62e42fefa39efp-1), P::mul(s, p));
}

// Inverse standard normal CDF, Wichura's AS 241 (PPND16), branchless so all
// lanes run the same ops. Accepts p strictly inside (0,1).
template <class P>
inline typename P::F normal_icdf(typename P::F p) {
  using F = typename P::F;
  F q = P::sub(p, P::set1(0.5));

  // central region |q| <= 0.425
  F rc = P::sub(P::set1(0.180625), P::mul(q, q));
  F num = P::set1(2.5090809287301226727e+3);
  num = P::fma(num, rc, P::set1(3.3430575583588128105e+4));
  num = P::fma(num, rc, P::set1(6.7265770927008700853e+4));
  num = P::fma(num, rc, P::set1(4.5921953931549871457e+4));
  num = P::fma(num, rc, P::set1(1.3731693765509461125e+4));
  num = P::fma(num, rc, P::set1(1.9715909503065514427e+3));
  num = P::fma(num, rc, P::set1(1.3314166789178437745e+2));
  num = P::fma(num, rc, P::set1(3.3871328727963666080e+0));
  F den = P::set1(5.2264952788528545610e+3);
  den = P::fma(den, rc, P::set1(2.8729085735721942674e+4));
  den = P::fma(den, rc, P::set1(3.9307895800092710610e+4));
  den = P::fma(den, rc, P::set1(2.1213794301586595867e+4));
  den = P::fma(den, rc, P::set1(5.3941960214247511077e+3));
  den = P::fma(den, rc, P::set1(6.8718700749205790830e+2));
  den = P::fma(den, rc, P::set1(4.2313330701600911252e+1));
  den = P::fma(den, rc, P::set1(1.0));
  F central = P::div(P::mul(q, num), den);

  // tail regions keyed off r = sqrt(-log(min(p, 1-p)))
  auto lower = P::lt(q, P::set1(0.0));
  F pt = P::select(lower, p, P::sub(P::set1(1.0), p));
  F r = P::sqrt(P::neg(log_pos<P>(pt)));

  F r1 = P::sub(r, P::set1(1.6));
  F n1 = P::set1(7.74545014278341407640e-4);
  n1 = P::fma(n1, r1, P::set1(2.27238449892691845833e-2));
  n1 = P::fma(n1, r1, P::set1(2.41780725177450611770e-1));
  n1 = P::fma(n1, r1, P::set1(1.27045825245236838258e+0));
  n1 = P::fma(n1, r1, P::set1(3.64784832476320460504e+0));
  n1 = P::fma(n1, r1, P::set1(5.76949722146069140550e+0));
  n1 = P::fma(n1, r1, P::set1(4.63033784615654529590e+0));
  n1 = P::fma(n1, r1, P::set1(1.42343711074968357734e+0));
  F d1 = P::set1(1.05075007164441684324e-9);
  d1 = P::fma(d1, r1, P::set1(5.47593808499534494600e-4));
  d1 = P::fma(d1, r1, P::set1(1.51986665636164571966e-2));
  d1 = P::fma(d1, r1, P::set1(1.48103976427480074590e-1));
  d1 = P::fma(d1, r1, P::set1(6.89767334985100004550e-1));
  d1 = P::fma(d1, r1, P::set1(1.67638483018380384940e+0));
  d1 = P::fma(d1, r1, P::set1(2.05319162663775882187e+0));
  d1 = P::fma(d1, r1, P::set1(1.0));
  F tail_near = P::div(n1, d1);

  F r2 = P::sub(r, P::set1(5.0));
  F n2 = P::set1(2.01033439929228813265e-7);
  n2 = P::fma(n2, r2, P::set1(2.71155556874348757815e-5));
  n2 = P::fma(n2, r2, P::set1(1.24266094738807843860e-3));
  n2 = P::fma(n2, r2, P::set1(2.65321895265761230930e-2));
  n2 = P::fma(n2, r2, P::set1(2.96560571828504891230e-1));
  n2 = P::fma(n2, r2, P::set1(1.78482653991729133580e+0));
  n2 = P::fma(n2, r2, P::set1(5.46378491116411436990e+0));
  n2 = P::fma(n2, r2, P::set1(6.65790464350110377720e+0));
  F d2 = P::set1(2.04426310338993978564e-15);
  d2 = P::fma(d2, r2, P::set1(1.42151175831644588870e-7));
  d2 = P::fma(d2, r2, P::set1(1.84631831751005468180e-5));
  d2 = P::fma(d2, r2, P::set1(7.86869131145613259100e-4));
  d2 = P::fma(d2, r2, P::set1(1.48753612908506148525e-2));
  d2 = P::fma(d2, r2, P::set1(1.36929880922735805310e-1));
  d2 = P::fma(d2, r2, P::set1(5.99832206555887937690e-1));
  d2 = P::fma(d2, r2, P::set1(1.0));
  F tail_far = P::div(n2, d2);

  F tail = P::select(P::le(r, P::set1(5.0)), tail_near, tail_far);
  tail = P::select(lower, P::neg(tail), tail);

  F aq = P::select(P::lt(q, P::set1(0.0)), P::neg(q), q);
  return P::select(P::le(aq, P::set1(0.425)), central, tail);
}

}  // namespace ctsim::pack
