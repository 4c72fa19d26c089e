#pragma once

#include <string>
#include <vector>

#include "bwnn/linalg.hpp"

namespace bwnn {

// Inputs are unit-norm rows. Classification datasets carry +/-1 targets and
// class labels; regression datasets carry bounded real targets.
struct Dataset {
  Matrix inputs;                // m x d
  std::vector<double> targets;  // m
  std::vector<int> labels;      // m, empty for pure regression
  std::vector<int> train_idx;
  std::vector<int> test_idx;
  std::vector<std::string> class_names;
  std::string name;
  std::uint64_t seed = 0;

  std::vector<double> row(int i) const {
    return {inputs.data.begin() + static_cast<std::ptrdiff_t>(i) * inputs.cols,
            inputs.data.begin() + static_cast<std::ptrdiff_t>(i + 1) * inputs.cols};
  }
  bool is_classification() const { return !labels.empty(); }
};

}  // namespace bwnn
