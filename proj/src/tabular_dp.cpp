#include "mmfe/tabular_dp.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "mmfe/errors.hpp"
#include "mmfe/random.hpp"

namespace mmfe::dp {

void TabularMdp::validate() const {
  const int s = num_states(), a = num_actions(), t1 = horizon();
  if (s == 0 || a == 0 || t1 == 0) throw ShapeError("MDP needs states, actions and at least one stage");
  if (static_cast<int>(kernels.size()) != t1 - 1) throw ShapeError("MDP needs one kernel per non-terminal stage");
  for (const auto& c : costs) {
    if (c.rows() != s || c.cols() != a) throw ShapeError("stage cost table has the wrong shape");
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const auto& k = kernels[i];
    if (!k || k->rows() != static_cast<Eigen::Index>(s) * a || k->cols() != s) {
      throw ShapeError("kernel for stage " + std::to_string(i) + " has the wrong shape");
    }
    for (Eigen::Index row = 0; row < k->outerSize(); ++row) {
      double sum = 0.0;
      for (Kernel::InnerIterator it(*k, row); it; ++it) {
        if (!(it.value() >= 0.0)) {
          throw MalformedKernelError("negative probability in stage " + std::to_string(i) + " row " +
                                     std::to_string(row));
        }
        sum += it.value();
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw MalformedKernelError("stage " + std::to_string(i) + " row " + std::to_string(row) + " sums to " +
                                   std::to_string(sum));
      }
    }
  }
}

namespace {

// Minimizes one state's Q-values with ties resolved to the smallest index.
void solve_state(const TabularMdp& mdp, int stage, int s, const Eigen::VectorXd* next, Eigen::VectorXd& v,
                 std::vector<int>& pol) {
  const int na = mdp.num_actions();
  double best = 0.0;
  int best_a = 0;
  for (int a = 0; a < na; ++a) {
    double q = mdp.costs[stage](s, a);
    if (next) {
      double ev = 0.0;
      for (Kernel::InnerIterator it(*mdp.kernels[stage], static_cast<Eigen::Index>(s) * na + a); it; ++it) {
        ev += it.value() * (*next)(it.col());
      }
      q += ev;
    }
    if (a == 0 || q < best) {
      best = q;
      best_a = a;
    }
  }
  v(s) = best;
  pol[s] = best_a;
}

}  // namespace

Solution backward_induction(const TabularMdp& mdp, Execution exec) {
  mdp.validate();
  const int t1 = mdp.horizon(), ns = mdp.num_states();
  Solution sol;
  sol.values.assign(t1, Eigen::VectorXd(ns));
  sol.policy.assign(t1, std::vector<int>(ns));
  for (int i = t1 - 1; i >= 0; --i) {
    const Eigen::VectorXd* next = i + 1 < t1 ? &sol.values[i + 1] : nullptr;
    auto& v = sol.values[i];
    auto& pol = sol.policy[i];
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
      for (int s = 0; s < ns; ++s) solve_state(mdp, i, s, next, v, pol);
    } else {
      for (int s = 0; s < ns; ++s) solve_state(mdp, i, s, next, v, pol);
    }
  }
  return sol;
}

std::vector<Eigen::VectorXd> evaluate_policy(const TabularMdp& mdp, const std::vector<std::vector<int>>& policy) {
  const int t1 = mdp.horizon(), ns = mdp.num_states(), na = mdp.num_actions();
  if (static_cast<int>(policy.size()) != t1) throw ShapeError("policy needs one decision rule per stage");
  std::vector<Eigen::VectorXd> values(t1, Eigen::VectorXd(ns));
  for (int i = t1 - 1; i >= 0; --i) {
    if (static_cast<int>(policy[i].size()) != ns) throw ShapeError("decision rule has the wrong length");
    for (int s = 0; s < ns; ++s) {
      const int a = policy[i][s];
      if (a < 0 || a >= na) throw ShapeError("policy action out of range");
      double q = mdp.costs[i](s, a);
      if (i + 1 < t1) {
        for (Kernel::InnerIterator it(*mdp.kernels[i], static_cast<Eigen::Index>(s) * na + a); it; ++it) {
          q += it.value() * values[i + 1](it.col());
        }
      }
      values[i](s) = q;
    }
  }
  return values;
}

Solution brute_force_policy_enum(const TabularMdp& mdp, double max_policies) {
  mdp.validate();
  const int t1 = mdp.horizon(), ns = mdp.num_states(), na = mdp.num_actions();
  const double decisions = static_cast<double>(t1) * ns;
  if (decisions * std::log(static_cast<double>(na)) > std::log(max_policies)) {
    throw SizeError("policy enumeration exceeds the guard of " + std::to_string(max_policies) + " policies");
  }
  const auto count = static_cast<long>(std::llround(std::pow(static_cast<double>(na), decisions)));

  Solution best;
  best.values.assign(t1, Eigen::VectorXd::Constant(ns, INFINITY));
  best.policy.assign(t1, std::vector<int>(ns, 0));
  std::vector<std::vector<int>> policy(t1, std::vector<int>(ns, 0));
  for (long id = 0; id < count; ++id) {
    long rest = id;
    for (int i = 0; i < t1; ++i) {
      for (int s = 0; s < ns; ++s) {
        policy[i][s] = static_cast<int>(rest % na);
        rest /= na;
      }
    }
    const auto values = evaluate_policy(mdp, policy);
    for (int i = 0; i < t1; ++i) {
      for (int s = 0; s < ns; ++s) {
        if (values[i](s) < best.values[i](s)) {
          best.values[i](s) = values[i](s);
          best.policy[i][s] = policy[i][s];
        }
      }
    }
  }
  return best;
}

Kernel make_kernel(int rows, int cols, std::vector<Eigen::Triplet<double>>& triplets) {
  Kernel k(rows, cols);
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.prune(0.0);
  k.makeCompressed();
  return k;
}

TabularMdp random_mdp(int num_states, int num_actions, int horizon, std::uint64_t seed, bool stationary) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) throw ShapeError("random MDP needs positive sizes");
  RandomStream rng(seed, 0);
  TabularMdp mdp;
  for (int s = 0; s < num_states; ++s) mdp.states.push_back("s" + std::to_string(s));
  for (int a = 0; a < num_actions; ++a) mdp.actions.push_back("a" + std::to_string(a));
  auto random_kernel = [&] {
    std::vector<Eigen::Triplet<double>> trip;
    for (int row = 0; row < num_states * num_actions; ++row) {
      std::vector<double> w(num_states);
      double sum = 0.0;
      for (double& x : w) sum += (x = -std::log(rng.uniform()));
      for (int c = 0; c < num_states; ++c) trip.emplace_back(row, c, w[c] / sum);
    }
    return std::make_shared<const Kernel>(make_kernel(num_states * num_actions, num_states, trip));
  };
  KernelPtr shared = stationary && horizon > 1 ? random_kernel() : nullptr;
  for (int i = 0; i + 1 < horizon; ++i) mdp.kernels.push_back(shared ? shared : random_kernel());
  for (int i = 0; i < horizon; ++i) {
    Eigen::MatrixXd c(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) c(s, a) = rng.uniform();
    }
    mdp.costs.push_back(std::move(c));
  }
  return mdp;
}

void write_solution_csv(std::ostream& out, const TabularMdp& mdp, const Solution& sol) {
  out << "stage,state,value,action\n";
  char buf[32];
  for (std::size_t i = 0; i < sol.values.size(); ++i) {
    for (int s = 0; s < mdp.num_states(); ++s) {
      std::snprintf(buf, sizeof buf, "%.17e", sol.values[i](s));
      out << i << ',' << mdp.states[s] << ',' << buf << ',' << mdp.actions[sol.policy[i][s]] << '\n';
    }
  }
}

}  // namespace mmfe::dp
