#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dgn/network.hpp"
#include "dgn/training.hpp"

namespace dgn {

// Randomized small-network generator shared by the gradient oracles: up to
// two layers, <= 8 units, short horizons, mixed neuron kinds, feedforward and
// recurrent wiring. `force_recurrent` pins the wiring instead of drawing it.
Network random_small_net(std::uint64_t seed, bool smoothed,
                         std::optional<bool> force_recurrent = std::nullopt);

SpikeTensor random_input(const Network& net, std::uint64_t seed, Index T);

struct GradcheckOptions {
  int nets = 20;      // dual-path comparisons
  int fd_nets = 2;    // smoothed finite-difference comparisons
  std::uint64_t seed = 1;
  double tol_dual = 1e-10;
  double tol_fd = 1e-5;
  double fd_h = 1e-5;
};

struct GradcheckReport {
  double max_dual_err = 0.0;
  double max_fd_err = 0.0;
  std::string worst_dual;
  std::string worst_fd;
  // Worst relative error observed per tensor name, across all nets.
  std::map<std::string, double> per_tensor_worst;
  int nets = 0;
  int fd_nets = 0;
  bool pass = false;
};

// Runs closed-form vs reverse-mode on `nets` random networks and analytic vs
// central finite differences on `fd_nets` smoothed networks.
GradcheckReport run_gradcheck(const GradcheckOptions& opts);

}  // namespace dgn
