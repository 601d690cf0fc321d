#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dfcgcn/common.hpp"

namespace dfcgcn {

enum class SelectionMethod { ttest_fdr, rf_top_k, rfe_svm };

inline std::string to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::ttest_fdr: return "ttest_fdr";
    case SelectionMethod::rf_top_k: return "rf_top_k";
    case SelectionMethod::rfe_svm: return "rfe_svm";
  }
  return "?";
}

struct SelectionReport {
  SelectionMethod method = SelectionMethod::ttest_fdr;
  std::vector<int> selected;      // strictly increasing input-space indices
  std::vector<double> scores;     // one per input feature
  std::vector<std::string> feature_names;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["method"] = to_string(method);
    j["selected"] = selected;
    j["scores"] = scores;
    j["feature_names"] = feature_names;
    return j;
  }
};

struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> feature_names;
  std::vector<std::string> subject_ids;

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

}  // namespace dfcgcn
