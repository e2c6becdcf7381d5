#include "smcmix/selection.hpp"

#include <cmath>

#include "smcmix/likelihood.hpp"
#include "smcmix/parallel.hpp"

namespace smcmix {

std::size_t param_count(std::size_t g, std::size_t d, std::size_t dd, bool has_absorbing) {
  if (g < 1 || d < 2 || dd < 1) throw DomainError("param_count: need G >= 1, D >= 2, d >= 1");
  if (!has_absorbing) return g - 1 + g * (d - 1 + d * (d - 2) + d * dd);
  if (d < 3) throw DomainError("param_count: an absorbing state needs D >= 3");
  return g - 1 + g * (d - 2 + (d - 1) * (d - 2) + (d - 1) * dd);
}

double bic(double loglik, std::size_t q, double n) {
  return static_cast<double>(q) * std::log(n) - 2.0 * loglik;
}

double aic(double loglik, std::size_t q) { return 2.0 * static_cast<double>(q) - 2.0 * loglik; }

double aicc(double loglik, std::size_t q, double n) {
  const double qd = static_cast<double>(q);
  if (!(n > qd + 1.0)) throw DomainError("aicc: sample size must exceed q + 1");
  return aic(loglik, q) + 2.0 * qd * (qd + 1.0) / (n - qd - 1.0);
}

double sample_size(const Panel& panel, SampleSize kind) {
  switch (kind) {
    case SampleSize::kTrajectories:
      return static_cast<double>(panel.subject_count() * panel.replications());
    case SampleSize::kSubjects:
      return static_cast<double>(panel.subject_count());
    case SampleSize::kTransitions:
      return static_cast<double>(panel.total_transitions());
  }
  return 0.0;
}

const CandidateFit* SelectionResult::candidate(std::size_t components) const {
  for (const auto& c : candidates)
    if (c.components == components) return &c;
  return nullptr;
}

SelectionResult select_g(const Panel& panel, std::span<const std::size_t> g_values,
                         const SelectionOptions& options) {
  const double n = sample_size(panel, options.sample_size);
  const std::size_t d = panel.space().size();
  const bool absorbing = panel.space().absorbing().has_value();

  SelectionResult out;
  out.candidates.resize(g_values.size());
  parallel_for(g_values.size(), [&](std::size_t k) {
    CandidateFit& c = out.candidates[k];
    c.components = g_values[k];
    c.q = param_count(c.components, d, 2, absorbing);
    try {
      Initialization init = initialize(panel, c.components, options.em.seed, options.init);
      c.init_labels = std::move(init.labels);
      c.report = fit(panel, c.components, init.model, options.em);
    } catch (const NumericalError& e) {
      c.error = std::string(e.kind()) + ": " + e.what();
      return;
    }
    c.loglik = mixture_loglik(panel, c.report->model);
    c.bic = bic(c.loglik, c.q, n);
    c.aic = aic(c.loglik, c.q);
    if (n > static_cast<double>(c.q) + 1.0) c.aicc = aicc(c.loglik, c.q, n);
  });

  const auto choose = [&](auto score) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    std::optional<double> best_value;
    for (const auto& c : out.candidates) {
      const std::optional<double> v = score(c);
      if (!v) continue;
      if (!best_value || *v < *best_value || (*v == *best_value && c.components < *best)) {
        best = c.components;
        best_value = v;
      }
    }
    return best;
  };
  using Score = std::optional<double>;
  out.best_bic = choose([](const CandidateFit& c) { return c.report ? Score(c.bic) : Score(); });
  out.best_aic = choose([](const CandidateFit& c) { return c.report ? Score(c.aic) : Score(); });
  out.best_aicc = choose([](const CandidateFit& c) { return c.report ? c.aicc : Score(); });
  return out;
}

}  // namespace smcmix
