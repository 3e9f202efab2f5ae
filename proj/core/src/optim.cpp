#include "logptr/optim.hpp"

#include <cmath>

#include "logptr/error.hpp"

namespace logptr::num {

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& config) {
  for (Parameter* p : params) {
    if (p->grad.data.empty()) p->grad = Tensor(p->value.shape);
    if (p->adam_m.data.empty()) {
      p->adam_m = Tensor(p->value.shape);
      p->adam_v = Tensor(p->value.shape);
    }
    p->step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(p->step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(p->step));
    for (size_t i = 0; i < p->value.data.size(); ++i) {
      const double g = p->grad.data[i];
      const double m = config.beta1 * p->adam_m.data[i] + (1.0 - config.beta1) * g;
      const double v = config.beta2 * p->adam_v.data[i] + (1.0 - config.beta2) * g * g;
      p->adam_m.data[i] = static_cast<float>(m);
      p->adam_v.data[i] = static_cast<float>(v);
      const double update = config.lr * (m / bc1) / (std::sqrt(v / bc2) + config.eps);
      p->value.data[i] = static_cast<float>(p->value.data[i] - update);
    }
    p->zero_grad();
  }
}

double clip_global_norm(const std::vector<Parameter*>& params, double max_norm) {
  double sum_sq = 0.0;
  for (const Parameter* p : params)
    for (float g : p->grad.data) sum_sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sum_sq);
  if (!std::isfinite(norm)) raise(Errc::NumericError, "non-finite gradient norm");
  if (norm > max_norm && norm > 0.0) {
    const float scale = static_cast<float>(max_norm / norm);
    for (Parameter* p : params)
      for (float& g : p->grad.data) g *= scale;
  }
  return norm;
}

GradCheckReport grad_check(const std::function<float()>& loss_and_grads,
                           const std::function<double()>& shadow_loss,
                           const std::vector<std::pair<std::string, Parameter*>>& params,
                           const std::vector<ParameterT<double>*>& shadow,
                           double step, double denom_floor) {
  if (params.size() != shadow.size())
    raise(Errc::ShapeMismatch, "grad_check parameter lists differ in length");

  for (auto& [name, p] : params) p->zero_grad();
  (void)loss_and_grads();

  GradCheckReport report;
  for (size_t k = 0; k < params.size(); ++k) {
    const auto& [name, p] = params[k];
    ParameterT<double>* s = shadow[k];
    if (p->value.shape != s->value.shape)
      raise(Errc::ShapeMismatch, "shadow shape mismatch for " + name);

    GradCheckEntry entry;
    entry.name = name;
    for (size_t i = 0; i < s->value.data.size(); ++i) {
      const double saved = s->value.data[i];
      s->value.data[i] = saved + step;
      const double up = shadow_loss();
      s->value.data[i] = saved - step;
      const double down = shadow_loss();
      s->value.data[i] = saved;

      const double fd = (up - down) / (2.0 * step);
      const double ad = p->grad.data.empty() ? 0.0 : static_cast<double>(p->grad.data[i]);
      const double denom = std::max({std::abs(ad), std::abs(fd), denom_floor});
      const double rel = std::abs(ad - fd) / denom;
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = i;
        entry.analytic = ad;
        entry.numeric = fd;
      }
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst_param = name;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace logptr::num
