#include "ctsim/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "ctsim/mc_kernels.hpp"
#include "ctsim/pack.hpp"
#include "ctsim/rng.hpp"

namespace ctsim::mc {

const char* to_string(Target t) {
  switch (t) {
    case Target::WP: return "wp";
    case Target::WI: return "wi";
    case Target::Bias: return "bias";
    case Target::PbarMean: return "pbar_mean";
  }
  return "?";
}

const char* to_string(Backend b) {
  switch (b) {
    case Backend::Auto: return "auto";
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

Backend backend_from_string(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "scalar") return Backend::Scalar;
  if (s == "avx2") return Backend::Avx2;
  throw std::invalid_argument("unknown backend '" + s + "'");
}

bool avx2_available() {
#if defined(CTSIM_HAVE_AVX2_TU) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend resolved_backend(Backend b) {
  if (b == Backend::Scalar) return Backend::Scalar;
  if (b == Backend::Avx2) {
    if (!avx2_available())
      throw std::runtime_error("avx2 backend requested but not available");
    return Backend::Avx2;
  }
  return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

void validate(const McConfig& cfg) {
  ctsim::validate(cfg.bp);
  ctsim::validate(cfg.proc);
  ctsim::validate(cfg.priors);
  if (cfg.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (cfg.mode == Mode::Microfounded && cfg.agents < 1)
    throw std::invalid_argument("agents must be >= 1 in Microfounded mode");
  if (!(cfg.t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double agent_state_uniform(std::uint64_t seed, std::uint64_t rep,
                           std::uint64_t agent) {
  std::uint64_t key = rng::derive(rng::master_key(seed), rep);
  return rng::u64_to_unit(rng::derive(key, 2 + 4 * agent));
}

namespace {

struct DerivedCell {
  LinearGaussianCell lin;
  MicrofoundedCell micro;
  double post_intercept;  // microfounded p_hat = intercept + slope * p_bar
  double post_slope;
};

DerivedCell derive_cell(const BehaviorParams& bp, const PriorSpec& pr,
                        double eta_s, std::uint64_t agents) {
  StateShares sh{eta_s, 1.0 - eta_s};
  Loadings l = election_loadings(bp, sh);
  PosteriorLoadings g = posterior_loadings(l, pr);
  double vx = pr.sigma_p * pr.sigma_p;
  double vy = pr.sigma_s * pr.sigma_s;
  double d = l.a1 * l.a1 * vx + l.a2 * l.a2 * vy;
  double slope = d > 0.0 ? l.a1 * vx / d : 0.0;
  double pbar_mean = l.a0 + l.a1 * pr.mu_p + l.a2 * pr.mu_s;
  DerivedCell out;
  out.lin = LinearGaussianCell{pr.mu_p, pr.sigma_p, pr.mu_s, pr.sigma_s,
                               l.a0,    l.a1,       l.a2,
                               g.g0,    g.g1,       g.g2};
  out.micro = MicrofoundedCell{pr.mu_p, pr.sigma_p, pr.mu_s, pr.sigma_s,
                               eta_s,   bp.beta,    bp.xi,   agents};
  out.post_slope = slope;
  out.post_intercept = pr.mu_p - slope * pbar_mean;
  return out;
}

struct BlockSums {
  double s_wp = 0, q_wp = 0;
  double s_wi = 0, q_wi = 0;
  double s_b = 0, q_b = 0;
  double s_pbar = 0, q_pbar = 0;
  std::uint64_t clamps = 0;
};

KernelSet kernels_for(Backend b) {
#ifdef CTSIM_HAVE_AVX2_TU
  if (b == Backend::Avx2) return avx2_kernels();
#endif
  return scalar_kernels();
}

// records for [rep0, rep0+n); AVX2 handles the 4-aligned part, scalar the rest
template <class Fn>
void run_aligned(Backend backend, std::uint64_t rep0, std::uint64_t n, Fn&& call) {
  if (backend == Backend::Avx2) {
    std::uint64_t main = n & ~std::uint64_t(3);
    if (main > 0) call(Backend::Avx2, rep0, main, 0);
    if (main < n) call(Backend::Scalar, rep0 + main, n - main, main);
  } else {
    call(Backend::Scalar, rep0, n, 0);
  }
}

BlockSums process_block(const DerivedCell& cell, Mode mode, Backend backend,
                        std::uint64_t master, std::uint64_t rep0, std::uint64_t n,
                        std::vector<double>& scratch) {
  scratch.resize(6 * n);
  double* p = scratch.data();
  double* ps = p + n;
  double* pbar = ps + n;
  double* phat = pbar + n;
  double* dev = phat + n;
  double* dev2 = dev + n;

  run_aligned(backend, rep0, n, [&](Backend b, std::uint64_t r0, std::uint64_t m,
                                    std::uint64_t off) {
    KernelSet k = kernels_for(b);
    if (mode == Mode::LinearGaussian)
      k.lin_gauss(cell.lin, master, r0, m, p + off, ps + off, pbar + off,
                  phat + off);
    else
      k.micro(cell.micro, master, r0, m, p + off, ps + off, pbar + off);
  });

  BlockSums out;
  if (mode == Mode::Microfounded) {
    for (std::uint64_t i = 0; i < n; ++i)
      phat[i] = std::fma(cell.post_slope, pbar[i], cell.post_intercept);
    for (std::uint64_t i = 0; i < n; ++i)
      out.clamps += (p[i] < 0.0) + (p[i] > 1.0) + (ps[i] < 0.0) + (ps[i] > 1.0);
  }

  auto reduce = [&](auto f, double& s, double& q) {
    for (std::uint64_t i = 0; i < n; ++i) dev[i] = f(i);
    for (std::uint64_t i = 0; i < n; ++i) dev2[i] = dev[i] * dev[i];
    s = pairwise_sum(std::span<const double>(dev, n));
    q = pairwise_sum(std::span<const double>(dev2, n));
  };
  reduce([&](std::uint64_t i) { double d = phat[i] - p[i]; return -(d * d); },
         out.s_wp, out.q_wp);
  reduce([&](std::uint64_t i) { double d = pbar[i] - p[i]; return -(d * d); },
         out.s_wi, out.q_wi);
  reduce([&](std::uint64_t i) { double d = pbar[i] - phat[i]; return d * d; },
         out.s_b, out.q_b);
  reduce([&](std::uint64_t i) { return pbar[i]; }, out.s_pbar, out.q_pbar);
  return out;
}

struct MeanSe {
  double mean, se;
};

MeanSe summarize(double s, double q, std::uint64_t n) {
  double mean = s / double(n);
  if (n < 2) return MeanSe{mean, 0.0};
  double var = (q - s * s / double(n)) / double(n - 1);
  if (var < 0.0) var = 0.0;
  return MeanSe{mean, std::sqrt(var / double(n))};
}

CellSummary run_summary(const DerivedCell& cell, Mode mode,
                        std::uint64_t replications, std::uint64_t master,
                        Backend backend, int threads) {
  std::uint64_t block = mode == Mode::LinearGaussian ? 8192 : 64;
  std::uint64_t n_blocks = (replications + block - 1) / block;
  std::vector<BlockSums> sums(n_blocks);

  auto worker = [&](std::atomic<std::uint64_t>& next) {
    std::vector<double> scratch;
    for (;;) {
      std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) break;
      std::uint64_t rep0 = b * block;
      std::uint64_t n = std::min(block, replications - rep0);
      sums[b] = process_block(cell, mode, backend, master, rep0, n, scratch);
    }
  };

  std::atomic<std::uint64_t> next{0};
  int nthreads = std::min<std::uint64_t>(std::max(threads, 1), n_blocks);
  if (nthreads <= 1) {
    worker(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back([&] { worker(next); });
    for (auto& th : pool) th.join();
  }

  // fold partials in block order; identical for any thread count
  BlockSums total;
  for (const BlockSums& b : sums) {
    total.s_wp += b.s_wp;
    total.q_wp += b.q_wp;
    total.s_wi += b.s_wi;
    total.q_wi += b.q_wi;
    total.s_b += b.s_b;
    total.q_b += b.q_b;
    total.s_pbar += b.s_pbar;
    total.q_pbar += b.q_pbar;
    total.clamps += b.clamps;
  }

  MeanSe wp = summarize(total.s_wp, total.q_wp, replications);
  MeanSe wi = summarize(total.s_wi, total.q_wi, replications);
  MeanSe bias = summarize(total.s_b, total.q_b, replications);
  MeanSe pbar = summarize(total.s_pbar, total.q_pbar, replications);
  return CellSummary{wp.mean,   wp.se,   wi.mean,   wi.se,        bias.mean,
                     bias.se,   pbar.mean, pbar.se, total.clamps};
}

}  // namespace

ReplicationRecord simulate_replication(const McConfig& cfg, std::uint64_t rep_index) {
  validate(cfg);
  if (rep_index >= cfg.replications)
    throw std::invalid_argument("rep_index out of range");
  StateShares sh = share_stereotype(cfg.proc, cfg.t);
  DerivedCell cell = derive_cell(cfg.bp, cfg.priors, sh.eta_s, cfg.agents);
  std::uint64_t master = rng::master_key(cfg.seed);
  KernelSet k = scalar_kernels();
  ReplicationRecord r{};
  if (cfg.mode == Mode::LinearGaussian) {
    k.lin_gauss(cell.lin, master, rep_index, 1, &r.p, &r.p_s, &r.p_bar, &r.p_hat);
  } else {
    k.micro(cell.micro, master, rep_index, 1, &r.p, &r.p_s, &r.p_bar);
    r.p_hat = std::fma(cell.post_slope, r.p_bar, cell.post_intercept);
  }
  return r;
}

CellSummary run_cell(const McConfig& cfg) {
  validate(cfg);
  StateShares sh = share_stereotype(cfg.proc, cfg.t);
  DerivedCell cell = derive_cell(cfg.bp, cfg.priors, sh.eta_s, cfg.agents);
  return run_summary(cell, cfg.mode, cfg.replications, rng::master_key(cfg.seed),
                     resolved_backend(cfg.backend), cfg.threads);
}

McReport estimate_welfare_mc(const McConfig& cfg, Target target) {
  CellSummary s = run_cell(cfg);
  switch (target) {
    case Target::WP: return McReport{target, s.wp_mean, s.wp_se, s.clamp_events};
    case Target::WI: return McReport{target, s.wi_mean, s.wi_se, s.clamp_events};
    case Target::Bias:
      return McReport{target, s.bias_mean, s.bias_se, s.clamp_events};
    case Target::PbarMean:
      return McReport{target, s.pbar_mean, s.pbar_se, s.clamp_events};
  }
  throw std::invalid_argument("unknown target");
}

std::vector<CompareRow> compare_mc_closed_form(const McConfig& cfg,
                                               const CompareGrid& grid,
                                               bool corrupt) {
  validate(cfg);
  if (cfg.mode != Mode::LinearGaussian)
    throw std::runtime_error("closed-form comparison runs in LinearGaussian mode");
  if (grid.betas.empty() || grid.xis.empty() || grid.eta_ss.empty())
    throw std::runtime_error("comparison grid must be nonempty");

  std::uint64_t master = rng::master_key(cfg.seed);
  std::vector<CompareRow> rows;
  std::uint64_t cell_index = 0;
  for (double beta : grid.betas) {
    for (double xi : grid.xis) {
      for (double eta : grid.eta_ss) {
        ++cell_index;
        BehaviorParams bp{beta, xi};
        try {
          ctsim::validate(bp);
        } catch (const std::invalid_argument& e) {
          throw std::runtime_error(std::string("grid cell rejected: ") + e.what());
        }
        if (!(eta >= 0.0 && eta <= 1.0))
          throw std::runtime_error("eta_s grid values must lie in [0,1]");
        DerivedCell cell = derive_cell(bp, cfg.priors, eta, 1);
        Loadings l{cell.lin.a0, cell.lin.a1, cell.lin.a2};
        PosteriorLoadings g{cell.lin.g0, cell.lin.g1, cell.lin.g2};
        double closed_wp = welfare_positive(l, cfg.priors);
        double closed_wi = welfare_institutional(l, cfg.priors);
        double closed_b = election_bias(l, g, cfg.priors);
        if (corrupt) {
          closed_wp = closed_wp * 1.5 - 1e-3;
          closed_wi = closed_wi * 1.5 - 1e-3;
          closed_b = closed_b * 1.5 + 1e-3;
        }
        CellSummary s =
            run_summary(cell, Mode::LinearGaussian, cfg.replications,
                        rng::derive(master, cell_index), resolved_backend(cfg.backend),
                        cfg.threads);
        auto push = [&](Target tgt, double closed, double mc, double se) {
          CompareRow row{beta, xi, eta, tgt, closed, mc, se, 0.0, false, false};
          if (se == 0.0) {
            row.exact = mc == closed;
            row.flagged = !row.exact;
          } else {
            row.z = (mc - closed) / se;
            row.flagged = std::abs(row.z) > 4.0;
          }
          rows.push_back(row);
        };
        push(Target::WP, closed_wp, s.wp_mean, s.wp_se);
        push(Target::WI, closed_wi, s.wi_mean, s.wi_se);
        push(Target::Bias, closed_b, s.bias_mean, s.bias_se);
      }
    }
  }
  return rows;
}

}  // namespace ctsim::mc
