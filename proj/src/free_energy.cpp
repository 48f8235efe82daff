#include "viewseek/free_energy.hpp"

#include <algorithm>
#include <cmath>

namespace viewseek {

double histogram_kl(const SparseHistogram& posterior, const SparseHistogram& prior, double floor) {
  double q_total = 0.0, p_total = 0.0;
  for (const auto& [b, m] : posterior) q_total += m;
  for (const auto& [b, m] : prior) p_total += m;
  if (!(q_total > 0.0) || !(p_total > 0.0)) return 0.0;

  // Both sides are sorted by bin, so merge.
  double kl = 0.0;
  std::size_t j = 0;
  for (const auto& [b, m] : posterior) {
    if (m <= 0.0) continue;
    while (j < prior.size() && prior[j].first < b) ++j;
    const double p = (j < prior.size() && prior[j].first == b) ? prior[j].second / p_total : 0.0;
    const double q = m / q_total;
    kl += q * std::log(q / std::max(p, floor));
  }
  return std::max(0.0, kl);
}

FreeEnergyStep free_energy_step(const std::vector<UpdateRecord>& records) {
  FreeEnergyStep s;
  for (const auto& r : records) {
    s.categories.push_back(r.category);
    s.kl.push_back(histogram_kl(r.posterior, r.prior));
    s.nll.push_back(r.detection_nll);
    s.entropy.push_back(r.posterior_entropy);
  }
  return s;
}

void FreeEnergyTrace::append(const std::vector<UpdateRecord>& records) {
  steps.push_back(free_energy_step(records));
}

}  // namespace viewseek
