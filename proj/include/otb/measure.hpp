#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "otb/domain.hpp"
#include "otb/errors.hpp"

namespace otb {

// Finitely supported probability measure: one point per row, positive
// weights summing to one.
struct DiscreteMeasure {
  Mat points;   // n x d
  Vec weights;  // n

  DiscreteMeasure(Mat pts, Vec w) : points(std::move(pts)), weights(std::move(w)) {
    validate();
  }

  static DiscreteMeasure uniform(Mat pts) {
    const auto n = pts.rows();
    Vec w = Vec::Constant(n, 1.0 / static_cast<double>(n));
    return DiscreteMeasure(std::move(pts), std::move(w));
  }

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }

  bool is_uniform(double tol = 1e-15) const {
    const double w0 = weights[0];
    for (Eigen::Index i = 1; i < weights.size(); ++i)
      if (std::fabs(weights[i] - w0) > tol) return false;
    return true;
  }

  void validate() const {
    if (points.rows() == 0 || points.cols() == 0)
      throw Error("measure: empty support");
    if (points.rows() != weights.size())
      throw DimensionMismatchError("measure: points/weights size mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0)) throw Error("measure: weights must be positive");
      sum += weights[i];
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw Error("measure: weights must sum to 1 within 1e-12");
    double scale = std::max(1.0, points.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      for (Eigen::Index j = i + 1; j < points.rows(); ++j)
        if ((points.row(i) - points.row(j)).norm() <= 1e-12 * scale)
          throw Error("measure: support points must be distinct");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    std::vector<std::vector<double>> pts;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(points.cols()));
      for (Eigen::Index k = 0; k < points.cols(); ++k)
        row[static_cast<std::size_t>(k)] = points(i, k);
      pts.push_back(std::move(row));
    }
    j["points"] = pts;
    j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
    return j;
  }

  static DiscreteMeasure from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("points") || !j.at("points").is_array())
      throw ConfigError("measure: requires array field 'points'");
    const auto& jp = j.at("points");
    if (jp.empty()) throw ConfigError("measure: field 'points' is empty");
    // accept [[x,y],...] or a flat list of scalars for d = 1
    std::vector<std::vector<double>> rows;
    for (const auto& e : jp) {
      if (e.is_number())
        rows.push_back({e.get<double>()});
      else if (e.is_array())
        rows.push_back(e.get<std::vector<double>>());
      else
        throw ConfigError("measure: field 'points' must hold numbers or arrays");
    }
    Mat pts(static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size())
        throw ConfigError("measure: ragged rows in field 'points'");
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    if (!j.contains("weights")) return uniform(std::move(pts));
    if (!j.at("weights").is_array())
      throw ConfigError("measure: field 'weights' must be an array");
    auto wv = j.at("weights").get<std::vector<double>>();
    if (wv.size() != rows.size())
      throw ConfigError("measure: 'weights' length disagrees with 'points'");
    Vec w = Eigen::Map<const Vec>(wv.data(), static_cast<Eigen::Index>(wv.size()));
    return DiscreteMeasure(std::move(pts), std::move(w));
  }
};

}  // namespace otb
