#include "dimsel/energy_select.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <ostream>

#include "dimsel/text.hpp"

namespace dimsel {

void ZoneConfig::validate(Eigen::Index m) const {
  if (!(0 < z1_end && z1_end < z2_end && z2_end < m)) {
    throw DataError("invalid zones z1_end=" + std::to_string(z1_end) +
                    ", z2_end=" + std::to_string(z2_end) + " for m=" + std::to_string(m));
  }
}

double zone_energy(const Eigen::VectorXd& lambdas_w1, Eigen::Index begin, Eigen::Index end) {
  if (begin < 0 || begin >= end || end > lambdas_w1.size()) {
    throw DataError("empty or out-of-range zone [" + std::to_string(begin) + ", " +
                    std::to_string(end) + ")");
  }
  const Eigen::Index p = end - begin;
  return lambdas_w1.segment(begin, p).squaredNorm() / static_cast<double>(p);
}

EnergyReport energy_ratios(const Eigen::VectorXd& lambdas_w1, const ZoneConfig& zc) {
  zc.validate(lambdas_w1.size());
  EnergyReport rep;
  rep.zones = zc;
  rep.e1 = zone_energy(lambdas_w1, 0, zc.z1_end);
  rep.e2 = zone_energy(lambdas_w1, zc.z1_end, zc.z2_end);
  rep.e3 = zone_energy(lambdas_w1, zc.z2_end, lambdas_w1.size());
  if (rep.e3 <= 0) throw NumericError("noise-zone energy is zero");
  rep.r1 = rep.e1 / rep.e3;
  rep.r2 = rep.e2 / rep.e3;
  return rep;
}

std::vector<Eigen::Index> rank_variables(const Eigen::VectorXd& lambdas_w1,
                                         const ZoneConfig& zc, bool include_z1) {
  zc.validate(lambdas_w1.size());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index n = include_z1 ? 0 : zc.z1_end; n < zc.z2_end; ++n) idx.push_back(n);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (lambdas_w1[a] != lambdas_w1[b]) return lambdas_w1[a] > lambdas_w1[b];
    return a < b;
  });
  return idx;
}

std::vector<FeatureGroup> cumulative_groups(const Eigen::VectorXd& lambdas_w1,
                                            const ZoneConfig& zc,
                                            const std::vector<int>& percents,
                                            bool include_z1) {
  for (std::size_t i = 0; i < percents.size(); ++i) {
    if (percents[i] < 1 || percents[i] > 100) {
      throw DataError("percent " + std::to_string(percents[i]) + " outside 1..100");
    }
    if (i > 0 && percents[i] <= percents[i - 1]) {
      throw DataError("percents must be strictly increasing");
    }
  }

  const std::vector<Eigen::Index> ranking = rank_variables(lambdas_w1, zc, include_z1);
  const double e3 = zone_energy(lambdas_w1, zc.z2_end, lambdas_w1.size());
  if (e3 <= 0) throw NumericError("noise-zone energy is zero");

  // Prefix sums in ranking order; the total is the last prefix so a 100%
  // threshold is met exactly.
  Eigen::VectorXd prefix(static_cast<Eigen::Index>(ranking.size()));
  double total = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const double lam = lambdas_w1[ranking[i]];
    total += lam * lam;
    prefix[static_cast<Eigen::Index>(i)] = total;
  }
  if (total <= 0) throw NumericError("no discriminative energy");

  std::vector<FeatureGroup> groups;
  std::size_t len = 0;
  for (int p : percents) {
    const double threshold = (static_cast<double>(p) / 100.0) * total;
    while (len < ranking.size() && prefix[static_cast<Eigen::Index>(len)] < threshold) ++len;
    const std::size_t count = std::min(len + 1, ranking.size());
    FeatureGroup g;
    g.percent = p;
    g.indices.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(count));
    g.group_energy_ratio =
        (prefix[static_cast<Eigen::Index>(count - 1)] / static_cast<double>(count)) / e3;
    groups.push_back(std::move(g));
  }
  return groups;
}

void write_energy_json(const EnergyReport& report, std::ostream& os) {
  nlohmann::json j{
      {"e1", report.e1},
      {"e2", report.e2},
      {"e3", report.e3},
      {"r1", report.r1},
      {"r2", report.r2},
      {"zones", {{"z1_end", report.zones.z1_end}, {"z2_end", report.zones.z2_end}}},
  };
  os << j.dump(2) << '\n';
}

void write_groups_csv(const std::vector<FeatureGroup>& groups, std::ostream& os) {
  os << "percent,n_vars,group_energy_ratio,indices\n";
  for (const FeatureGroup& g : groups) {
    os << g.percent << ',' << g.indices.size() << ',' << format_double(g.group_energy_ratio)
       << ',';
    for (std::size_t i = 0; i < g.indices.size(); ++i) {
      if (i > 0) os << ' ';
      os << g.indices[i];
    }
    os << '\n';
  }
}

}  // namespace dimsel
