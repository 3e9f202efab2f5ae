#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logptr/tape.hpp"

namespace logptr::num {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over the given parameters. Update arithmetic runs in
// double and is stored back as float; gradients are zeroed afterwards.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& config = {});

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm. Throws NumericError on a non-finite norm.
double clip_global_norm(const std::vector<Parameter*>& params, double max_norm);

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::vector<GradCheckEntry> per_param;

  bool passed(double tol) const { return max_rel_err <= tol; }
};

// Central finite differences in 64-bit shadow arithmetic against the
// reverse-mode float gradients.
//
//   loss_and_grads : zeroes gradients, runs the float forward + backward,
//                    leaves gradients in params[i]->grad.
//   shadow_loss    : evaluates the same loss in double at the current
//                    contents of shadow[i]->value.
//   params/shadow  : same order; shadows start as widened copies and are
//                    perturbed in place.
//
// Relative error per element is |ad - fd| / max(|ad|, |fd|, denom_floor),
// so near-zero gradients are compared absolutely at tol * denom_floor.
GradCheckReport grad_check(
    const std::function<float()>& loss_and_grads,
    const std::function<double()>& shadow_loss,
    const std::vector<std::pair<std::string, Parameter*>>& params,
    const std::vector<ParameterT<double>*>& shadow,
    double step = 1e-3, double denom_floor = 1e-3);

}  // namespace logptr::num
