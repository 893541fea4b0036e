// Copyright 2026 The smisel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "smisel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace smisel {

namespace {

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_var(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / static_cast<double>(xs.size() - 1);
}

struct StrategyGroup {
  std::string name;
  std::vector<const RunCurve*> curves;
};

std::vector<StrategyGroup> group_by_strategy(
    std::span<const RunCurve> curves) {
  std::vector<StrategyGroup> groups;
  for (const RunCurve& c : curves) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const StrategyGroup& g) {
                             return g.name == c.strategy;
                           });
    if (it == groups.end()) {
      groups.push_back({c.strategy, {}});
      it = groups.end() - 1;
    }
    it->curves.push_back(&c);
  }
  return groups;
}

std::size_t common_round_count(const std::vector<StrategyGroup>& groups) {
  std::size_t rounds = 0;
  for (const auto& g : groups) {
    for (const RunCurve* c : g.curves) {
      if (rounds == 0) rounds = c->values.size();
      if (c->values.size() != rounds)
        throw std::invalid_argument(
            "stats: curves disagree on the round count (strategy " + g.name +
            ")");
    }
  }
  if (rounds == 0) throw std::invalid_argument("stats: no rounds");
  return rounds;
}

}  // namespace

std::vector<SummaryCurve> summarize(std::span<const RunCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("summarize: no curves");
  const auto groups = group_by_strategy(curves);
  const std::size_t rounds = common_round_count(groups);

  std::vector<SummaryCurve> out;
  for (const auto& g : groups) {
    SummaryCurve s;
    s.strategy = g.name;
    s.num_seeds = g.curves.size();
    s.mean.resize(rounds);
    s.stddev.resize(rounds);
    std::vector<double> column(g.curves.size());
    for (std::size_t r = 0; r < rounds; ++r) {
      for (std::size_t i = 0; i < g.curves.size(); ++i)
        column[i] = g.curves[i]->values[r];
      s.mean[r] = mean_of(column);
      s.stddev[r] = std::sqrt(sample_var(column, s.mean[r]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

WelchResult welch_t(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw std::invalid_argument("welch_t: need >= 2 samples per side");
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  const double gx = sample_var(xs, mx) / static_cast<double>(xs.size());
  const double gy = sample_var(ys, my) / static_cast<double>(ys.size());
  const double se2 = gx + gy;
  if (se2 <= 0.0)
    throw std::invalid_argument("welch_t: zero variance in both samples");
  WelchResult r;
  r.t = (mx - my) / std::sqrt(se2);
  // Welch-Satterthwaite degrees of freedom.
  r.dof = se2 * se2 /
          (gx * gx / static_cast<double>(xs.size() - 1) +
           gy * gy / static_cast<double>(ys.size() - 1));
  return r;
}

double t_critical(double alpha, double dof) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("t_critical: alpha must be in (0,1)");
  if (!(dof > 0.0))
    throw std::invalid_argument("t_critical: dof must be positive");
  const boost::math::students_t_distribution<double> dist(dof);
  return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

PenaltyMatrix penalty_matrix(std::span<const RunCurve> curves, double alpha,
                             TTestKind test) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("penalty_matrix: alpha must be in (0,1)");
  auto groups = group_by_strategy(curves);
  if (groups.empty()) throw std::invalid_argument("penalty_matrix: no curves");
  const std::size_t rounds = common_round_count(groups);
  for (const auto& g : groups) {
    if (g.curves.size() < 2)
      throw std::invalid_argument("penalty_matrix: strategy " + g.name +
                                  " has fewer than 2 seeds");
  }
  if (test == TTestKind::kPaired) {
    // Pair runs by seed: every strategy needs the same seed set.
    for (auto& g : groups)
      std::sort(g.curves.begin(), g.curves.end(),
                [](const RunCurve* a, const RunCurve* b) {
                  return a->seed < b->seed;
                });
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].curves.size() != groups[0].curves.size())
        throw std::invalid_argument(
            "penalty_matrix: paired test needs equal seed counts");
      for (std::size_t i = 0; i < groups[g].curves.size(); ++i)
        if (groups[g].curves[i]->seed != groups[0].curves[i]->seed)
          throw std::invalid_argument(
              "penalty_matrix: paired test needs matching seed sets");
    }
  }

  const std::size_t k = groups.size();
  PenaltyMatrix pm;
  pm.alpha = alpha;
  pm.n_rounds = rounds;
  pm.test = test;
  pm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                    static_cast<Eigen::Index>(k));
  for (const auto& g : groups) pm.strategies.push_back(g.name);

  const double increment = 1.0 / static_cast<double>(rounds);
  std::vector<double> xs, ys;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        xs.clear();
        ys.clear();
        for (const RunCurve* c : groups[i].curves) xs.push_back(c->values[r]);
        for (const RunCurve* c : groups[j].curves) ys.push_back(c->values[r]);

        // side > 0 means i beats j this round, < 0 the reverse.
        int side = 0;
        if (test == TTestKind::kWelch) {
          const double mx = mean_of(xs);
          const double my = mean_of(ys);
          const double se2 = sample_var(xs, mx) / static_cast<double>(xs.size()) +
                             sample_var(ys, my) / static_cast<double>(ys.size());
          if (se2 <= 0.0) {
            // Zero-variance round: the t statistic's limit makes any
            // nonzero mean difference significant.
            side = mx > my ? 1 : (mx < my ? -1 : 0);
          } else {
            const WelchResult w = welch_t(xs, ys);
            const double crit = t_critical(alpha, w.dof);
            side = w.t > crit ? 1 : (w.t < -crit ? -1 : 0);
          }
        } else {
          std::vector<double> d(xs.size());
          for (std::size_t s = 0; s < xs.size(); ++s) d[s] = xs[s] - ys[s];
          const double md = mean_of(d);
          const double vd = sample_var(d, md);
          if (vd <= 0.0) {
            side = md > 0.0 ? 1 : (md < 0.0 ? -1 : 0);
          } else {
            const double t =
                md / std::sqrt(vd / static_cast<double>(d.size()));
            const double crit =
                t_critical(alpha, static_cast<double>(d.size() - 1));
            side = t > crit ? 1 : (t < -crit ? -1 : 0);
          }
        }
        if (side > 0)
          pm.values(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(j)) += increment;
        else if (side < 0)
          pm.values(static_cast<Eigen::Index>(j),
                    static_cast<Eigen::Index>(i)) += increment;
      }
    }
  }
  return pm;
}

nlohmann::json penalty_matrix_to_json(const PenaltyMatrix& m) {
  nlohmann::json j;
  j["strategies"] = m.strategies;
  j["alpha"] = m.alpha;
  j["n_rounds"] = m.n_rounds;
  j["test"] = m.test == TTestKind::kWelch ? "welch" : "paired";
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.values.cols(); ++c)
      row.push_back(m.values(i, c));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_penalty_csv(std::ostream& out, const PenaltyMatrix& m) {
  out << "strategy";
  for (const auto& s : m.strategies) out << ',' << s;
  out << "\n";
  for (std::size_t i = 0; i < m.strategies.size(); ++i) {
    out << m.strategies[i];
    for (std::size_t j = 0; j < m.strategies.size(); ++j)
      out << ','
          << format_double(m.values(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j)));
    out << "\n";
  }
}

void write_summary_csv(std::ostream& out,
                       std::span<const SummaryCurve> curves) {
  out << "strategy,round,mean,std,num_seeds\n";
  for (const SummaryCurve& c : curves) {
    for (std::size_t r = 0; r < c.mean.size(); ++r)
      out << c.strategy << ',' << r + 1 << ',' << format_double(c.mean[r])
          << ',' << format_double(c.stddev[r]) << ',' << c.num_seeds << "\n";
  }
}

}  // namespace smisel
