#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dgn/error.hpp"

namespace dgn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Dense spike activity for one sample: values(c, t) is the (possibly
// real-valued) input of channel c at timestep t. Counts from time binning are
// integers; perturbed inputs are arbitrary nonnegative reals.
struct SpikeTensor {
  Matrix values;  // channels x timesteps

  SpikeTensor() = default;
  explicit SpikeTensor(Matrix v) : values(std::move(v)) {}

  Index channels() const { return values.rows(); }
  Index timesteps() const { return values.cols(); }

  static SpikeTensor zeros(Index channels, Index timesteps) {
    return SpikeTensor(Matrix::Zero(channels, timesteps));
  }

  void validate() const {
    require(values.allFinite(), "SpikeTensor contains non-finite values");
    require((values.array() >= 0.0).all(),
            "SpikeTensor contains negative values");
  }
};

struct Sample {
  SpikeTensor x;
  Index label = 0;
};

using Dataset = std::vector<Sample>;

}  // namespace dgn
