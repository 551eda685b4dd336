#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "dimsel/errors.hpp"

namespace dimsel {

/// Frequency-axis partition: Z1 = [0, z1_end) holds acquisition/water
/// artifacts, Z2 = [z1_end, z2_end) the metabolic band, Z3 = [z2_end, m)
/// the noise tail. Boundaries are configuration; defaults suit m = 512.
struct ZoneConfig {
  Eigen::Index z1_end = 120;
  Eigen::Index z2_end = 400;

  void validate(Eigen::Index m) const;
};

/// Standardized zone energies of the w=1 lambda profile and their
/// rescaling by the noise-zone energy e3.
struct EnergyReport {
  double e1 = 0, e2 = 0, e3 = 0;
  double r1 = 0, r2 = 0;  // e1/e3, e2/e3
  ZoneConfig zones;
};

/// Mean squared lambda over [begin, end): sum lambda[n]^2 / p with p the
/// zone size.
double zone_energy(const Eigen::VectorXd& lambdas_w1, Eigen::Index begin, Eigen::Index end);

/// Per-zone energies plus the Z1/Z3 and Z2/Z3 ratios. Errors when the
/// noise-zone energy is zero (rescaling undefined).
EnergyReport energy_ratios(const Eigen::VectorXd& lambdas_w1, const ZoneConfig& zc);

/// Indices of Z1 and Z2 (Z2 only when include_z1 is false) sorted by
/// lambda descending, ties broken by ascending frequency index. Z3 never
/// appears.
std::vector<Eigen::Index> rank_variables(const Eigen::VectorXd& lambdas_w1,
                                         const ZoneConfig& zc, bool include_z1 = true);

/// Prefix of the descending-lambda ranking that accumulates `percent` % of
/// the eligible squared-lambda energy; group_energy_ratio is the group's
/// standardized energy (mean lambda^2 over its members) divided by e3.
struct FeatureGroup {
  int percent = 0;
  std::vector<Eigen::Index> indices;
  double group_energy_ratio = 0;
};

/// One group per requested percent (strictly increasing values in 1..100).
/// Each group is the shortest ranking prefix whose squared-lambda sum
/// reaches percent/100 of the eligible total, so groups are nested.
/// Errors when the eligible energy or the noise-zone energy is zero.
std::vector<FeatureGroup> cumulative_groups(const Eigen::VectorXd& lambdas_w1,
                                            const ZoneConfig& zc,
                                            const std::vector<int>& percents,
                                            bool include_z1 = true);

/// JSON export: keys e1,e2,e3,r1,r2,zones{z1_end,z2_end}.
void write_energy_json(const EnergyReport& report, std::ostream& os);

/// CSV export: `percent,n_vars,group_energy_ratio,indices`, indices
/// space-separated.
void write_groups_csv(const std::vector<FeatureGroup>& groups, std::ostream& os);

}  // namespace dimsel
