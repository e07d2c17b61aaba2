#include "mmfe/scenario_tree.hpp"

#include <cmath>
#include <map>
#include <string>

#include "mmfe/errors.hpp"
#include "mmfe/random.hpp"

namespace mmfe::dp {

namespace {

struct Node {
  int depth = 0;
  double w = 0.0;
  double pending = 0.0;  // eps_{n+1}(n), already revealed at depth n
  int infoset = 0;
  std::vector<int> children;
};

// Either a tree node or an information set, together with its one-step
// outcomes (next unit, probability, realized weather).
struct Outcome {
  int next = 0;
  double prob = 0.0;
  double w = 0.0;
};

struct Unit {
  std::string label;
  std::vector<Outcome> outcomes;
};

TabularMdp build(const ScenarioInstance& inst, const std::vector<std::vector<Unit>>& units,
                 const std::vector<std::vector<double>>& deltas, const std::string& kind) {
  const int stages = inst.periods + 1;
  const int na = static_cast<int>(inst.actions.size());
  // Global state numbering: stage by stage, unit-major then Delta.
  std::vector<int> offset(stages + 1, 0);
  for (int n = 0; n < stages; ++n) {
    offset[n + 1] = offset[n] + static_cast<int>(units[n].size() * deltas[n].size());
  }
  const int ns = offset[stages];
  auto state = [&](int n, int u, int d) { return offset[n] + u * static_cast<int>(deltas[n].size()) + d; };

  TabularMdp mdp;
  for (int n = 0; n < stages; ++n) {
    for (std::size_t u = 0; u < units[n].size(); ++u) {
      for (double d : deltas[n]) mdp.states.push_back(kind + units[n][u].label + "|d=" + std::to_string(d));
    }
  }
  for (double a : inst.actions) mdp.actions.push_back("a=" + std::to_string(a));

  std::map<double, int> next_delta_index;
  for (int n = 0; n < stages; ++n) {
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(ns, na);
    std::vector<Eigen::Triplet<double>> trip;
    if (n + 1 < stages) {
      next_delta_index.clear();
      for (std::size_t d = 0; d < deltas[n + 1].size(); ++d) next_delta_index[deltas[n + 1][d]] = static_cast<int>(d);
    }
    for (std::size_t u = 0; u < units[n].size(); ++u) {
      for (std::size_t d = 0; d < deltas[n].size(); ++d) {
        const int s = state(n, static_cast<int>(u), static_cast<int>(d));
        for (int a = 0; a < na; ++a) {
          const double act = inst.actions[a];
          const double dnext = inst.rho * deltas[n][d] + act + inst.mean_v;
          double c = inst.kappa * act * act;
          for (const auto& o : units[n][u].outcomes) {
            const double x = dnext + o.w - inst.tau;
            c += o.prob * x * x;
            if (n + 1 < stages) {
              trip.emplace_back(s * na + a, state(n + 1, o.next, next_delta_index.at(dnext)), o.prob);
            }
          }
          cost(s, a) = c;
        }
      }
    }
    mdp.costs.push_back(std::move(cost));
    if (n + 1 == stages) break;
    // States of other stages idle in place.
    for (int s = 0; s < ns; ++s) {
      if (s >= offset[n] && s < offset[n + 1]) continue;
      for (int a = 0; a < na; ++a) trip.emplace_back(s * na + a, s, 1.0);
    }
    mdp.kernels.push_back(std::make_shared<const Kernel>(make_kernel(ns * na, ns, trip)));
  }
  return mdp;
}

}  // namespace

ScenarioComparison scenario_tree_comparison(const ScenarioInstance& inst, Execution exec) {
  if (inst.periods < 0 || inst.periods > 6) throw SizeError("scenario trees are limited to 7 stages");
  if (inst.actions.empty()) throw ParameterError("at least one action is required");
  if (!(inst.gamma >= 0.0 && inst.gamma < 1.0) || !(inst.sigma2 >= 0.0)) throw ParameterError("invalid schedule");
  const int stages = inst.periods + 1;
  const double s0 = std::sqrt(inst.sigma2);
  const double s1 = std::sqrt(inst.sigma2) * inst.gamma;

  // Tree down to depth `stages`: the last decision still sees one more period.
  std::vector<Node> nodes{Node{0, inst.w0, inst.pending0, 0, {}}};
  std::vector<std::vector<int>> by_depth{{0}};
  std::vector<std::map<std::vector<double>, int>> infosets(stages + 1);
  std::vector<std::vector<double>> history{{inst.w0}};
  infosets[0][history[0]] = 0;
  for (int depth = 0; depth < stages; ++depth) {
    by_depth.emplace_back();
    for (int id : by_depth[depth]) {
      for (double e0 : {s0, -s0}) {
        for (double e1 : {s1, -s1}) {
          Node child;
          child.depth = depth + 1;
          child.w = inst.g * nodes[id].w + inst.mean_z + (nodes[id].pending + e0);
          child.pending = e1;
          std::vector<double> h = history[id];
          h.push_back(child.w);
          auto [it, fresh] = infosets[depth + 1].try_emplace(h, static_cast<int>(infosets[depth + 1].size()));
          child.infoset = it->second;
          nodes[id].children.push_back(static_cast<int>(nodes.size()));
          by_depth[depth + 1].push_back(static_cast<int>(nodes.size()));
          nodes.push_back(child);
          history.push_back(std::move(h));
        }
      }
    }
  }

  std::vector<std::vector<double>> deltas{{0.0}};
  for (int n = 0; n + 1 < stages; ++n) {
    std::map<double, int> next;
    for (double d : deltas[n]) {
      for (double a : inst.actions) next.emplace(inst.rho * d + a + inst.mean_v, 0);
    }
    deltas.emplace_back();
    for (const auto& kv : next) deltas.back().push_back(kv.first);
  }

  // Forecast controller: one unit per node.
  std::vector<std::vector<Unit>> fc(stages);
  std::vector<int> local_index(nodes.size());
  for (int n = 0; n <= stages; ++n) {
    for (std::size_t i = 0; i < by_depth[n].size(); ++i) local_index[by_depth[n][i]] = static_cast<int>(i);
  }
  for (int n = 0; n < stages; ++n) {
    for (int id : by_depth[n]) {
      Unit u;
      u.label = "|node=" + std::to_string(id);
      for (int c : nodes[id].children) u.outcomes.push_back({local_index[c], 0.25, nodes[c].w});
      fc[n].push_back(std::move(u));
    }
  }

  // No-forecast controller: one unit per weather-history information set;
  // nodes inside a set are equally likely since every branch has weight 1/4.
  std::vector<std::vector<Unit>> nf(stages);
  for (int n = 0; n < stages; ++n) {
    std::vector<std::vector<int>> members(infosets[n].size());
    for (int id : by_depth[n]) members[nodes[id].infoset].push_back(id);
    for (std::size_t k = 0; k < members.size(); ++k) {
      std::map<int, Outcome> agg;
      const double weight = 1.0 / static_cast<double>(members[k].size());
      for (int id : members[k]) {
        for (int c : nodes[id].children) {
          auto& o = agg[nodes[c].infoset];
          o.next = nodes[c].infoset;
          o.prob += 0.25 * weight;
          o.w = nodes[c].w;
        }
      }
      Unit u;
      u.label = "|info=" + std::to_string(k);
      for (const auto& kv : agg) u.outcomes.push_back(kv.second);
      nf[n].push_back(std::move(u));
    }
  }

  ScenarioComparison out;
  out.forecast = build(inst, fc, deltas, "F");
  out.no_forecast = build(inst, nf, deltas, "N");
  out.forecast_value = backward_induction(out.forecast, exec).values[0](out.forecast_root);
  out.no_forecast_value = backward_induction(out.no_forecast, exec).values[0](out.no_forecast_root);
  return out;
}

ScenarioInstance random_scenario_instance(std::uint64_t seed) {
  RandomStream rng(seed, 7);
  ScenarioInstance inst;
  inst.g = 0.2 + 0.7 * rng.uniform();
  inst.rho = inst.g * (0.1 + 0.8 * rng.uniform());
  inst.sigma2 = 0.2 + 2.0 * rng.uniform();
  inst.gamma = 0.2 + 0.75 * rng.uniform();
  inst.kappa = 0.1 + 2.0 * rng.uniform();
  inst.mean_z = (1.0 - inst.g) * 80.0;
  inst.w0 = 80.0 + 2.0 * (rng.uniform() - 0.5);
  inst.pending0 = std::sqrt(inst.sigma2) * inst.gamma * (rng.uniform() < 0.5 ? 1.0 : -1.0);
  inst.tau = 70.0 + 10.0 * rng.uniform();
  inst.mean_v = 2.0;
  const double hold = (1.0 - inst.rho) * (inst.tau - 80.0) - inst.mean_v;
  const double step = 0.5 + rng.uniform();
  inst.actions = {hold - step, hold, hold + step};
  inst.periods = 3;
  return inst;
}

}  // namespace mmfe::dp
