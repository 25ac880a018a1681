#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ncreg {

enum class Role { train, validation, test };

Role role_from_name(const std::string& name);
std::string role_name(Role r);

struct Dataset {
  Eigen::MatrixXd X;            // n x p
  Eigen::VectorXd y;            // n
  std::vector<Role> roles;      // n entries; defaults to all-train
  std::vector<std::string> feature_names;
  bool standardized = false;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  // rows with the given role, as a fresh dataset (roles all set to train)
  Dataset subset(Role r) const;
  std::vector<Eigen::Index> indices(Role r) const;
};

// CSV with a header row. The last column is the response; an optional column
// named "role" (values train/validation/test) assigns splits; every other
// column is a feature. Throws std::runtime_error with the line number on
// malformed input.
Dataset load_csv(const std::string& path);

void save_csv(const Dataset& data, const std::string& path);

}  // namespace ncreg
