#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "jointqa/graph.hpp"

namespace jointqa {

struct GradCheckEntry {
  std::string param;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_err = 0.0;
  GradCheckEntry worst;                  // valid when checked > 0
  std::vector<GradCheckEntry> failures;  // rel_err >= tol
  double tol = 0.0;

  bool ok() const { return checked > 0 && failures.empty(); }
};

struct GradCheckOptions {
  double eps = 1e-5;                      // central-difference step
  double tol = 1e-4;                      // relative-error threshold
  std::size_t max_entries_per_param = 0;  // 0 = every entry
  std::uint64_t seed = 0;                 // entry subsampling
};

/// Compares the analytic gradients already accumulated in the store against
/// central finite differences of loss_fn. loss_fn must be a pure forward
/// evaluation of the same loss the analytic pass differentiated (it is called
/// twice per checked entry with one parameter entry perturbed).
/// rel_err = |ga - gn| / max(1, |ga|, |gn|).
template <typename S>
GradCheckReport fd_compare(ParameterStore<S>& ps, const std::function<double()>& loss_fn,
                           const GradCheckOptions& opt = {}) {
  if (opt.eps == 0.0) throw std::invalid_argument("finite-difference step must be nonzero");
  GradCheckReport rep;
  rep.tol = opt.tol;
  std::mt19937_64 rng(opt.seed);
  for (auto& p : ps) {
    const Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> picks;
    if (opt.max_entries_per_param == 0 ||
        static_cast<std::size_t>(n) <= opt.max_entries_per_param) {
      picks.resize(static_cast<std::size_t>(n));
      for (Eigen::Index k = 0; k < n; ++k) picks[static_cast<std::size_t>(k)] = k;
    } else {
      std::uniform_int_distribution<Eigen::Index> dist(0, n - 1);
      for (std::size_t k = 0; k < opt.max_entries_per_param; ++k) picks.push_back(dist(rng));
    }
    for (Eigen::Index flat : picks) {
      Eigen::Index r = flat % p->value.rows();
      Eigen::Index c = flat / p->value.rows();
      const S saved = p->value(r, c);
      p->value(r, c) = saved + static_cast<S>(opt.eps);
      double f_plus = loss_fn();
      p->value(r, c) = saved - static_cast<S>(opt.eps);
      double f_minus = loss_fn();
      p->value(r, c) = saved;
      GradCheckEntry e;
      e.param = p->name;
      e.row = r;
      e.col = c;
      e.analytic = static_cast<double>(p->grad(r, c));
      e.numeric = (f_plus - f_minus) / (2.0 * opt.eps);
      double denom = std::max({1.0, std::abs(e.analytic), std::abs(e.numeric)});
      e.rel_err = std::abs(e.analytic - e.numeric) / denom;
      ++rep.checked;
      if (e.rel_err > rep.max_rel_err || rep.checked == 1) {
        rep.max_rel_err = e.rel_err;
        rep.worst = e;
      }
      if (e.rel_err >= opt.tol) rep.failures.push_back(e);
    }
  }
  return rep;
}

/// Convenience wrapper running both stages: zero grads, one analytic pass
/// (build_loss must construct the graph, call backward, and return the loss
/// value), then the finite-difference comparison against loss_fn.
template <typename S>
GradCheckReport grad_check(ParameterStore<S>& ps,
                           const std::function<double()>& build_loss,
                           const std::function<double()>& loss_fn,
                           const GradCheckOptions& opt = {}) {
  ps.zero_grads();
  build_loss();
  return fd_compare(ps, loss_fn, opt);
}

}  // namespace jointqa
