#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace icjm {

// Internal analysis time: t = (age - origin) / divisor. Every model
// quantity (visit times, event times, hazards, slopes) lives on this one
// scale; ages are converted at ingestion.
struct TimeScale {
  double origin = 65.0;
  double divisor = 10.0;

  double to_internal(double age) const { return (age - origin) / divisor; }
  double to_age(double t) const { return origin + divisor * t; }
  void validate() const;
};

// One visit: n_ij repeated marker measurements at a common time.
struct VisitBlock {
  double time = 0.0;  // internal scale
  std::vector<double> measurements;
  Eigen::RowVectorXd fixed_design;   // X_ij
  Eigen::RowVectorXd random_design;  // Z_ij
};

// Observed multistate data (T0, L, R, dem, T, death) on the internal scale,
// plus baseline covariate rows for the three transitions 0->1, 0->2, 1->2.
struct EventRecord {
  double entry = 0.0;         // T0
  double last_healthy = 0.0;  // L
  std::optional<double> diagnosis;  // R, defined iff dem
  bool dem = false;
  double terminal = 0.0;  // T
  bool death = false;
  std::array<Eigen::VectorXd, 3> covariates;

  void validate(const std::string& id) const;
};

struct SubjectData {
  std::string id;
  std::vector<VisitBlock> visits;
  EventRecord event;
  // extra constant-in-time columns appended to the polynomial fixed design
  Eigen::VectorXd marker_covariates;

  void validate() const;
};

using Dataset = std::vector<SubjectData>;

}  // namespace icjm
