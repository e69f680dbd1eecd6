// Fisher discriminant ratio (FDR) feature scoring and top-k selection.
#ifndef RESTCAL_SELECTION_HPP
#define RESTCAL_SELECTION_HPP

#include <cstddef>
#include <vector>

#include "restcal/features.hpp"

namespace restcal::selection {

// Per-feature, per-class first and second moments.
struct ClassStats {
  // [class][feature]; class order: left = 0, right = 1.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;  // population variance
  std::vector<std::size_t> count;
};

struct SelectionMask {
  std::vector<std::size_t> indices;  // kept features, best first
  std::vector<double> scores;        // FDR score of each kept feature
};

ClassStats class_stats(const features::FeatureMatrix& train);

// score[f] = sum over ordered class pairs (i, j != i) of
// (mu_i - mu_j)^2 / (var_i + var_j + eps); two classes give
// 2 * (mu_1 - mu_2)^2 / (var_1 + var_2 + eps).
std::vector<double> fdr_scores(const features::FeatureMatrix& train,
                               double eps_fdr = 1e-12);

// Indices of the k largest scores, descending; ties keep the lower index.
SelectionMask select_top_k(const std::vector<double>& scores, std::size_t k = 25);

// Columns reordered per mask; labels untouched; names follow the columns.
features::FeatureMatrix apply_mask(const SelectionMask& mask,
                                   const features::FeatureMatrix& m);

}  // namespace restcal::selection

#endif  // RESTCAL_SELECTION_HPP
