#include "restcal/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace restcal::selection {

namespace {
constexpr std::size_t kNumClasses = 2;

std::size_t class_index(dataio::TrialClass c) {
  return c == dataio::TrialClass::left ? 0 : 1;
}
}  // namespace

ClassStats class_stats(const features::FeatureMatrix& train) {
  ClassStats st;
  st.mean.assign(kNumClasses, std::vector<double>(train.n_cols, 0.0));
  st.var.assign(kNumClasses, std::vector<double>(train.n_cols, 0.0));
  st.count.assign(kNumClasses, 0);

  for (std::size_t r = 0; r < train.n_rows; ++r) {
    ++st.count[class_index(train.labels[r])];
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (st.count[c] < 2) {
      throw std::invalid_argument(
          "class_stats: each class needs at least two rows");
    }
  }

  for (std::size_t r = 0; r < train.n_rows; ++r) {
    const std::size_t ci = class_index(train.labels[r]);
    for (std::size_t f = 0; f < train.n_cols; ++f) {
      st.mean[ci][f] += train.at(r, f);
    }
  }
  for (std::size_t ci = 0; ci < kNumClasses; ++ci) {
    for (double& m : st.mean[ci]) m /= static_cast<double>(st.count[ci]);
  }
  for (std::size_t r = 0; r < train.n_rows; ++r) {
    const std::size_t ci = class_index(train.labels[r]);
    for (std::size_t f = 0; f < train.n_cols; ++f) {
      const double d = train.at(r, f) - st.mean[ci][f];
      st.var[ci][f] += d * d;
    }
  }
  for (std::size_t ci = 0; ci < kNumClasses; ++ci) {
    for (double& v : st.var[ci]) v /= static_cast<double>(st.count[ci]);
  }
  return st;
}

std::vector<double> fdr_scores(const features::FeatureMatrix& train,
                               double eps_fdr) {
  const ClassStats st = class_stats(train);
  std::vector<double> scores(train.n_cols, 0.0);
  for (std::size_t f = 0; f < train.n_cols; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      for (std::size_t j = 0; j < kNumClasses; ++j) {
        if (j == i) continue;
        const double dm = st.mean[i][f] - st.mean[j][f];
        s += dm * dm / (st.var[i][f] + st.var[j][f] + eps_fdr);
      }
    }
    scores[f] = s;
  }
  return scores;
}

SelectionMask select_top_k(const std::vector<double>& scores, std::size_t k) {
  if (k > scores.size()) {
    throw std::invalid_argument("select_top_k: k exceeds feature count");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];  // ties keep lower index
                   });
  SelectionMask mask;
  mask.indices.assign(order.begin(), order.begin() + static_cast<long>(k));
  mask.scores.reserve(k);
  for (std::size_t idx : mask.indices) mask.scores.push_back(scores[idx]);
  return mask;
}

features::FeatureMatrix apply_mask(const SelectionMask& mask,
                                   const features::FeatureMatrix& m) {
  for (std::size_t idx : mask.indices) {
    if (idx >= m.n_cols) {
      throw std::out_of_range("apply_mask: feature index out of range");
    }
  }
  features::FeatureMatrix out;
  out.n_rows = m.n_rows;
  out.n_cols = mask.indices.size();
  out.labels = m.labels;
  out.values.resize(out.n_rows * out.n_cols);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    for (std::size_t c = 0; c < mask.indices.size(); ++c) {
      out.at(r, c) = m.at(r, mask.indices[c]);
    }
  }
  if (!m.column_names.empty()) {
    out.column_names.reserve(mask.indices.size());
    for (std::size_t idx : mask.indices) {
      out.column_names.push_back(m.column_names[idx]);
    }
  }
  return out;
}

}  // namespace restcal::selection
