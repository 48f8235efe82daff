#pragma once

#include <optional>
#include <vector>

#include "viewseek/belief.hpp"

namespace viewseek {

/// KL(posterior || prior) over sparse histograms. Bins where the posterior has
/// mass but the prior has none contribute through `floor`.
double histogram_kl(const SparseHistogram& posterior, const SparseHistogram& prior,
                    double floor = 1e-300);

struct FreeEnergyStep {
  std::vector<int> categories;
  std::vector<double> kl;                   // per category
  std::vector<std::optional<double>> nll;   // per category, only where detected
  std::vector<double> entropy;              // per category
};

struct FreeEnergyTrace {
  std::vector<FreeEnergyStep> steps;

  void append(const std::vector<UpdateRecord>& records);
};

FreeEnergyStep free_energy_step(const std::vector<UpdateRecord>& records);

}  // namespace viewseek
