#include "macchiato/staple.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>

namespace macchiato {

double clamp_prob(double v) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, v));
}

double PriorSpec::resolve(const RaterStack& stack,
                          std::int64_t extra_background) const {
  if (extra_background < 0) throw DomainError("negative background padding");
  const double n =
      static_cast<double>(stack.voxel_count() + extra_background);
  double w = 0.0;
  switch (mode) {
    case Mode::Uninformative:
      w = 0.5;
      break;
    case Mode::AvgOccurrence: {
      std::int64_t fg = 0;
      for (const auto& r : stack.raters) fg += r.foreground_count();
      w = static_cast<double>(fg) / (n * stack.k());
      break;
    }
    case Mode::Power: {
      if (A <= 0.0) throw DomainError("prior constant A must be positive");
      if (alpha < 0) throw DomainError("prior exponent must be a natural number");
      w = A / std::pow(n, alpha);
      break;
    }
  }
  if (!(w > 0.0 && w < 1.0))
    throw DomainError("resolved prior w must lie in (0, 1)");
  return w;
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_perf(int K, const RaterPerformance& perf) {
  if (static_cast<int>(perf.p.size()) != K ||
      static_cast<int>(perf.q.size()) != K)
    throw DomainError("performance vectors must have length K");
}

// likelihood factors of one pattern under clamped parameters
void pattern_factors(std::uint64_t pattern, int K, const RaterPerformance& perf,
                     double& f, double& g, double& log_f, double& log_g) {
  f = 1.0;
  g = 1.0;
  log_f = 0.0;
  log_g = 0.0;
  for (int k = 0; k < K; ++k) {
    const bool s = (pattern >> k) & 1;
    const double pk = clamp_prob(perf.p[k]);
    const double qk = clamp_prob(perf.q[k]);
    const double fk = s ? pk : 1.0 - pk;
    const double gk = s ? 1.0 - qk : qk;
    f *= fk;
    g *= gk;
    log_f += std::log(fk);
    log_g += std::log(gk);
  }
}

}  // namespace

double estep_posterior(std::uint64_t pattern, int K,
                       const RaterPerformance& perf, double w) {
  check_perf(K, perf);
  if (!(w > 0.0 && w < 1.0)) throw DomainError("prior w must lie in (0, 1)");
  double f, g, log_f, log_g;
  pattern_factors(pattern, K, perf, f, g, log_f, log_g);
  const double num = w * f;
  const double den = num + (1.0 - w) * g;
  if (den >= DBL_MIN) return num / den;
  // both products underflowed: evaluate through the logit instead
  return sigmoid(posterior_logit(pattern, K, perf, w));
}

double posterior_logit(std::uint64_t pattern, int K,
                       const RaterPerformance& perf, double w) {
  check_perf(K, perf);
  if (!(w > 0.0 && w < 1.0)) throw DomainError("prior w must lie in (0, 1)");
  double f, g, log_f, log_g;
  pattern_factors(pattern, K, perf, f, g, log_f, log_g);
  return std::log(w / (1.0 - w)) + log_f - log_g;
}

RaterPerformance mstep(const RaterStack& stack, const SoftMask& u) {
  if (!(u.grid == stack.grid)) throw GridMismatch("consensus grid mismatch");
  RaterPerformance perf;
  double sum_u = 0.0;
  for (double v : u.values) sum_u += v;
  const double sum_1mu = static_cast<double>(stack.voxel_count()) - sum_u;
  for (int k = 0; k < stack.k(); ++k) {
    double stp = 0.0, stn = 0.0;
    const auto& vals = stack.raters[k].values;
    for (std::int64_t i = 0; i < stack.voxel_count(); ++i) {
      if (vals[i]) stp += u.values[i];
      else stn += 1.0 - u.values[i];
    }
    perf.p.push_back(sum_u > 0.0 ? stp / sum_u : 0.5);
    perf.q.push_back(sum_1mu > 0.0 ? stn / sum_1mu : 0.5);
  }
  return perf;
}

namespace {

struct PatternTable {
  std::vector<std::uint64_t> pattern;
  std::vector<std::int64_t> count;
  std::int64_t total = 0;
};

PatternTable build_table(const RaterStack& stack, std::int64_t extra) {
  if (extra < 0) throw DomainError("negative background padding");
  std::map<std::uint64_t, std::int64_t> counts = pattern_counts(stack);
  counts[0] += extra;
  PatternTable t;
  for (auto [pat, cnt] : counts) {
    t.pattern.push_back(pat);
    t.count.push_back(cnt);
    t.total += cnt;
  }
  return t;
}

// performance update from per-pattern posteriors; 0/0 -> 0.5 plus warning
RaterPerformance mstep_patterns(const PatternTable& t, int K,
                                const std::vector<double>& u, int& warnings) {
  double sum_u = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum_u += t.count[i] * u[i];
  const double sum_1mu = static_cast<double>(t.total) - sum_u;
  RaterPerformance perf;
  for (int k = 0; k < K; ++k) {
    double stp = 0.0, stn = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if ((t.pattern[i] >> k) & 1) stp += t.count[i] * u[i];
      else stn += t.count[i] * (1.0 - u[i]);
    }
    if (sum_u > 0.0) {
      perf.p.push_back(stp / sum_u);
    } else {
      perf.p.push_back(0.5);
      ++warnings;
    }
    if (sum_1mu > 0.0) {
      perf.q.push_back(stn / sum_1mu);
    } else {
      perf.q.push_back(0.5);
      ++warnings;
    }
  }
  return perf;
}

double max_param_delta(const RaterPerformance& a, const RaterPerformance& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.p.size(); ++k) {
    d = std::max(d, std::abs(a.p[k] - b.p[k]));
    d = std::max(d, std::abs(a.q[k] - b.q[k]));
  }
  return d;
}

void clamp_perf(RaterPerformance& perf) {
  for (auto& v : perf.p) v = clamp_prob(v);
  for (auto& v : perf.q) v = clamp_prob(v);
}

}  // namespace

MlResult ml_staple(const RaterStack& stack, const StapleOptions& opts) {
  const int K = stack.k();
  const PatternTable t = build_table(stack, opts.extra_background);
  const std::size_t P = t.pattern.size();

  // initial consensus: per-voxel vote with ties kept foreground
  std::vector<std::uint8_t> T(P);
  for (std::size_t i = 0; i < P; ++i)
    T[i] = 2 * std::popcount(t.pattern[i]) >= K ? 1 : 0;

  RaterPerformance perf;
  perf.p.assign(K, clamp_prob(opts.init_p));
  perf.q.assign(K, clamp_prob(opts.init_q));
  EmTrace trace;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // M-step against the hard consensus
    double gamma_num = 0.0;
    RaterPerformance next;
    for (int k = 0; k < K; ++k) {
      std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
      for (std::size_t i = 0; i < P; ++i) {
        const bool s = (t.pattern[i] >> k) & 1;
        if (T[i]) (s ? tp : fn) += t.count[i];
        else (s ? fp : tn) += t.count[i];
      }
      if (tp + fn > 0) {
        next.p.push_back(static_cast<double>(tp) / (tp + fn));
      } else {
        next.p.push_back(0.5);
        ++trace.degenerate_warnings;
      }
      if (tn + fp > 0) {
        next.q.push_back(static_cast<double>(tn) / (tn + fp));
      } else {
        next.q.push_back(0.5);
        ++trace.degenerate_warnings;
      }
      gamma_num += static_cast<double>(tp + tn);
    }
    if (opts.equal_performance) {
      const double gamma = gamma_num / (static_cast<double>(K) * t.total);
      next.p.assign(K, gamma);
      next.q.assign(K, gamma);
    }
    clamp_perf(next);
    trace.param_delta.push_back(max_param_delta(next, perf));
    perf = next;
    ++trace.iterations;

    // E-step: decide each pattern
    std::vector<std::uint8_t> newT(P);
    for (std::size_t i = 0; i < P; ++i) {
      double f, g, log_f, log_g;
      pattern_factors(t.pattern[i], K, perf, f, g, log_f, log_g);
      const double splus = f, sminus = g;
      if (splus >= DBL_MIN || sminus >= DBL_MIN) {
        newT[i] = splus > sminus ? 1 : 0;
      } else {
        newT[i] = log_f > log_g ? 1 : 0;
      }
    }
    if (newT == T) {
      trace.converged = true;
      break;
    }
    T = newT;
  }

  MlResult out;
  out.perf = perf;
  out.trace = trace;
  out.consensus = BinaryMask::zeros(stack.grid);
  const std::vector<std::uint64_t> pat = stack.patterns();
  std::map<std::uint64_t, std::uint8_t> decision;
  for (std::size_t i = 0; i < P; ++i) decision[t.pattern[i]] = T[i];
  for (std::int64_t n = 0; n < stack.voxel_count(); ++n)
    out.consensus.values[n] = decision[pat[n]];
  auto bg = decision.find(0);
  out.background_decision = bg != decision.end() && bg->second != 0;
  return out;
}

MmlResult mml_staple(const RaterStack& stack, const PriorSpec& prior,
                     const StapleOptions& opts) {
  const int K = stack.k();
  const PatternTable t = build_table(stack, opts.extra_background);
  const std::size_t P = t.pattern.size();
  const double w = prior.resolve(stack, opts.extra_background);

  RaterPerformance perf;
  perf.p.assign(K, clamp_prob(opts.init_p));
  perf.q.assign(K, clamp_prob(opts.init_q));
  EmTrace trace;
  std::vector<double> u(P, 0.0);

  auto run_estep = [&]() {
    double loglik = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      double f, g, log_f, log_g;
      pattern_factors(t.pattern[i], K, perf, f, g, log_f, log_g);
      const double num = w * f;
      const double den = num + (1.0 - w) * g;
      u[i] = den >= DBL_MIN
                 ? num / den
                 : sigmoid(posterior_logit(t.pattern[i], K, perf, w));
      const double la = std::log(w) + log_f;
      const double lb = std::log(1.0 - w) + log_g;
      const double m = std::max(la, lb);
      loglik += t.count[i] * (m + std::log(std::exp(la - m) + std::exp(lb - m)));
    }
    return loglik;
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    trace.log_marginal.push_back(run_estep());
    RaterPerformance next =
        mstep_patterns(t, K, u, trace.degenerate_warnings);
    clamp_perf(next);
    const double delta = max_param_delta(next, perf);
    trace.param_delta.push_back(delta);
    perf = next;
    ++trace.iterations;
    if (delta < opts.tol) {
      trace.converged = true;
      break;
    }
  }
  run_estep();  // posteriors under the final parameters

  MmlResult out;
  out.perf = perf;
  out.trace = trace;
  out.consensus = SoftMask::zeros(stack.grid);
  const std::vector<std::uint64_t> pat = stack.patterns();
  std::map<std::uint64_t, double> posterior;
  for (std::size_t i = 0; i < P; ++i) posterior[t.pattern[i]] = u[i];
  for (std::int64_t n = 0; n < stack.voxel_count(); ++n)
    out.consensus.values[n] = posterior[pat[n]];
  out.background_posterior = estep_posterior(0, K, perf, w);
  return out;
}

LimitLogit limit_logit(std::uint64_t pattern, int K, int alpha, double A,
                       const std::vector<double>& p,
                       const std::vector<double>& fp,
                       const std::vector<double>& b, double n) {
  if (static_cast<int>(p.size()) != K || static_cast<int>(fp.size()) != K ||
      static_cast<int>(b.size()) != K)
    throw DomainError("per-rater vectors must have length K");
  if (A <= 0.0) throw DomainError("prior constant A must be positive");
  if (alpha < 0) throw DomainError("prior exponent must be a natural number");
  const double n_alpha = std::pow(n, alpha);
  if (n_alpha <= A) throw DomainError("need N^alpha > A");
  for (int k = 0; k < K; ++k)
    if (n <= b[k]) throw DomainError("need N above every object size");

  LimitLogit out;
  const int votes = std::popcount(pattern);
  out.leading_sign = votes > alpha ? 1 : (votes < alpha ? -1 : 0);
  double v = std::log(A) - std::log(n_alpha - A);
  for (int k = 0; k < K; ++k) {
    if ((pattern >> k) & 1) {
      if (fp[k] <= 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }
      v += std::log(n - b[k]) + std::log(p[k] / fp[k]);
    } else {
      v += std::log(1.0 - p[k]);
    }
  }
  out.value = v;
  return out;
}

}  // namespace macchiato
