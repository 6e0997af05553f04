#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "otb/errors.hpp"
#include "otb/numerics.hpp"

namespace otb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kMembershipTol = 1e-12;

enum class DomainKind { half_line, box, polytope };

/*
 * Closed convex state space for the reflected diffusion: the nonnegative
 * orthant [0,inf)^d, an axis-aligned box, or a bounded intersection of
 * half-spaces a_i . x <= b_i.  All membership tests are on the closure,
 * inflated by a tolerance.
 */
class Domain {
 public:
  static Domain half_line(int dim) {
    if (dim < 1) throw DimensionMismatchError("half_line: dim must be >= 1");
    Domain d;
    d.kind_ = DomainKind::half_line;
    d.dim_ = dim;
    return d;
  }

  static Domain box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw DimensionMismatchError("box: lower/upper sizes disagree or empty");
    for (Eigen::Index k = 0; k < lower.size(); ++k)
      if (!(lower[k] < upper[k]))
        throw Error("box: lower must be strictly below upper in every coordinate");
    Domain d;
    d.kind_ = DomainKind::box;
    d.dim_ = static_cast<int>(lower.size());
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    return d;
  }

  static Domain polytope(Mat a, Vec b) {
    if (a.rows() != b.size() || a.rows() == 0 || a.cols() < 1)
      throw DimensionMismatchError("polytope: constraint sizes disagree");
    if (a.cols() > 6) throw SizeLimitError("polytope: dimension > 6 unsupported");
    Domain d;
    d.kind_ = DomainKind::polytope;
    d.dim_ = static_cast<int>(a.cols());
    d.a_ = std::move(a);
    d.b_ = std::move(b);
    d.row_norms_.resize(d.a_.rows());
    for (Eigen::Index i = 0; i < d.a_.rows(); ++i) {
      d.row_norms_[i] = d.a_.row(i).norm();
      if (d.row_norms_[i] <= 0.0) throw Error("polytope: zero constraint row");
    }
    d.validate_polytope();
    return d;
  }

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Mat& a() const { return a_; }
  const Vec& b() const { return b_; }

  bool contains(const Vec& x, double tol = kMembershipTol) const {
    check_dim(x);
    switch (kind_) {
      case DomainKind::half_line:
        return (x.array() >= -tol).all();
      case DomainKind::box:
        return (x.array() >= lower_.array() - tol).all() &&
               (x.array() <= upper_.array() + tol).all();
      case DomainKind::polytope:
        for (Eigen::Index i = 0; i < a_.rows(); ++i)
          if (a_.row(i).dot(x) > b_[i] + tol * row_norms_[i]) return false;
        return true;
    }
    return false;
  }

  // Euclidean projection onto the closure.
  Vec project(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case DomainKind::half_line:
        return x.cwiseMax(0.0);
      case DomainKind::box:
        return x.cwiseMax(lower_).cwiseMin(upper_);
      case DomainKind::polytope:
        return project_polytope(x);
    }
    return x;
  }

  // Distance from an interior point to the boundary; <= 0 on/off the closure.
  double boundary_distance(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case DomainKind::half_line:
        return x.minCoeff();
      case DomainKind::box:
        return std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
      case DomainKind::polytope: {
        double d = kInf;
        for (Eigen::Index i = 0; i < a_.rows(); ++i)
          d = std::min(d, (b_[i] - a_.row(i).dot(x)) / row_norms_[i]);
        return d;
      }
    }
    return 0.0;
  }

  double diameter() const {
    switch (kind_) {
      case DomainKind::half_line:
        throw UnboundedDomainError("diameter: half_line is unbounded");
      case DomainKind::box:
        return (upper_ - lower_).norm();
      case DomainKind::polytope: {
        double best = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
          for (std::size_t j = i + 1; j < vertices_.size(); ++j)
            best = std::max(best, (vertices_[i] - vertices_[j]).norm());
        return best;
      }
    }
    return 0.0;
  }

  double inradius() const {
    switch (kind_) {
      case DomainKind::half_line:
        return kInf;
      case DomainKind::box:
        return 0.5 * (upper_ - lower_).minCoeff();
      case DomainKind::polytope: {
        // radius of the largest ball centred at the deepest known point
        return boundary_distance(chebyshev_like_center());
      }
    }
    return 0.0;
  }

  // Unit inward normal at a boundary point.  Exactly one face must be active
  // within tol, otherwise the direction is ambiguous (corner/edge).
  Vec inward_normal(const Vec& x, double tol = 1e-9) const {
    check_dim(x);
    std::vector<int> active;
    switch (kind_) {
      case DomainKind::half_line: {
        for (int k = 0; k < dim_; ++k)
          if (std::fabs(x[k]) <= tol) active.push_back(k);
        if (active.empty()) throw Error("inward_normal: point is not on the boundary");
        if (active.size() > 1)
          throw AmbiguousNormalError("inward_normal: several faces active");
        Vec n = Vec::Zero(dim_);
        n[active[0]] = 1.0;
        return n;
      }
      case DomainKind::box: {
        std::vector<std::pair<int, int>> faces;  // (coordinate, sign)
        for (int k = 0; k < dim_; ++k) {
          if (std::fabs(x[k] - lower_[k]) <= tol) faces.emplace_back(k, +1);
          if (std::fabs(x[k] - upper_[k]) <= tol) faces.emplace_back(k, -1);
        }
        if (faces.empty()) throw Error("inward_normal: point is not on the boundary");
        if (faces.size() > 1)
          throw AmbiguousNormalError("inward_normal: several faces active");
        Vec n = Vec::Zero(dim_);
        n[faces[0].first] = faces[0].second;
        return n;
      }
      case DomainKind::polytope: {
        for (Eigen::Index i = 0; i < a_.rows(); ++i)
          if (std::fabs(a_.row(i).dot(x) - b_[i]) <= tol * row_norms_[i])
            active.push_back(static_cast<int>(i));
        if (active.empty()) throw Error("inward_normal: point is not on the boundary");
        if (active.size() > 1)
          throw AmbiguousNormalError("inward_normal: several faces active");
        return -a_.row(active[0]).transpose() / row_norms_[active[0]];
      }
    }
    throw Error("inward_normal: unreachable");
  }

  const std::vector<Vec>& vertices() const {
    if (kind_ != DomainKind::polytope)
      throw Error("vertices: only stored for polytopes");
    return vertices_;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (kind_) {
      case DomainKind::half_line:
        j["kind"] = "half_line";
        j["dim"] = dim_;
        break;
      case DomainKind::box: {
        j["kind"] = "box";
        j["lower"] = std::vector<double>(lower_.data(), lower_.data() + dim_);
        j["upper"] = std::vector<double>(upper_.data(), upper_.data() + dim_);
        break;
      }
      case DomainKind::polytope: {
        j["kind"] = "polytope";
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < a_.rows(); ++i) {
          std::vector<double> row(static_cast<std::size_t>(dim_));
          for (int k = 0; k < dim_; ++k) row[static_cast<std::size_t>(k)] = a_(i, k);
          rows.push_back(std::move(row));
        }
        j["a"] = rows;
        j["b"] = std::vector<double>(b_.data(), b_.data() + b_.size());
        break;
      }
    }
    return j;
  }

  static Domain from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
      throw ConfigError("domain: missing or non-string field 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "half_line") {
      if (!j.contains("dim") || !j.at("dim").is_number_integer())
        throw ConfigError("domain: half_line requires integer field 'dim'");
      return half_line(j.at("dim").get<int>());
    }
    if (kind == "box") {
      for (const char* f : {"lower", "upper"})
        if (!j.contains(f) || !j.at(f).is_array())
          throw ConfigError(std::string("domain: box requires array field '") + f + "'");
      auto lo = j.at("lower").get<std::vector<double>>();
      auto up = j.at("upper").get<std::vector<double>>();
      return box(Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                 Eigen::Map<const Vec>(up.data(), static_cast<Eigen::Index>(up.size())));
    }
    if (kind == "polytope") {
      for (const char* f : {"a", "b"})
        if (!j.contains(f) || !j.at(f).is_array())
          throw ConfigError(std::string("domain: polytope requires array field '") + f + "'");
      auto rows = j.at("a").get<std::vector<std::vector<double>>>();
      auto bv = j.at("b").get<std::vector<double>>();
      if (rows.empty()) throw ConfigError("domain: polytope field 'a' is empty");
      Mat a(static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
          throw ConfigError("domain: ragged rows in field 'a'");
        for (std::size_t k = 0; k < rows[i].size(); ++k)
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
      return polytope(a, Eigen::Map<const Vec>(bv.data(),
                                               static_cast<Eigen::Index>(bv.size())));
    }
    throw ConfigError("domain: unknown kind '" + kind + "'");
  }

 private:
  Domain() = default;

  void check_dim(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw DimensionMismatchError("domain: point dimension mismatch");
  }

  Vec chebyshev_like_center() const {
    Vec c = Vec::Zero(dim_);
    for (const auto& v : vertices_) c += v;
    if (!vertices_.empty()) c /= static_cast<double>(vertices_.size());
    return c;
  }

  // Exact projection by enumerating active sets (KKT over subsets of faces).
  Vec project_polytope(const Vec& x) const {
    if (contains(x, 0.0)) return x;
    double best = kInf;
    Vec best_z = x;
    std::vector<int> idx(static_cast<std::size_t>(a_.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<int> subset;
    enumerate_subsets(idx, 0, subset, x, best, best_z);
    if (!std::isfinite(best)) throw NumericalError("project: no feasible active set");
    return best_z;
  }

  void enumerate_subsets(const std::vector<int>& idx, std::size_t start,
                         std::vector<int>& subset, const Vec& x, double& best,
                         Vec& best_z) const {
    if (!subset.empty()) try_active_set(subset, x, best, best_z);
    if (subset.size() == static_cast<std::size_t>(dim_)) return;
    for (std::size_t i = start; i < idx.size(); ++i) {
      subset.push_back(idx[i]);
      enumerate_subsets(idx, i + 1, subset, x, best, best_z);
      subset.pop_back();
    }
  }

  void try_active_set(const std::vector<int>& s, const Vec& x, double& best,
                      Vec& best_z) const {
    const auto k = static_cast<Eigen::Index>(s.size());
    Mat as(k, dim_);
    Vec bs(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      as.row(r) = a_.row(s[static_cast<std::size_t>(r)]);
      bs[r] = b_[s[static_cast<std::size_t>(r)]];
    }
    Mat gram = as * as.transpose();
    Eigen::FullPivLU<Mat> lu(gram);
    if (!lu.isInvertible()) return;  // dependent rows; a smaller subset covers this
    Vec lambda = lu.solve(as * x - bs);
    Vec z = x - as.transpose() * lambda;
    if (!contains(z, 1e-9 * (1.0 + x.norm()))) return;
    double d = (z - x).norm();
    if (d < best - 1e-15) {
      best = d;
      best_z = z;
    }
  }

  void validate_polytope() {
    // vertex enumeration over d-subsets of constraint rows
    const int d = dim_;
    const int m = static_cast<int>(a_.rows());
    std::vector<int> comb(static_cast<std::size_t>(d));
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == d) {
        Mat as(d, d);
        Vec bs(d);
        for (int r = 0; r < d; ++r) {
          as.row(r) = a_.row(comb[static_cast<std::size_t>(r)]);
          bs[r] = b_[comb[static_cast<std::size_t>(r)]];
        }
        Eigen::FullPivLU<Mat> lu(as);
        if (lu.isInvertible()) {
          Vec v = lu.solve(bs);
          if (contains(v, 1e-9 * (1.0 + v.norm()))) {
            bool dup = false;
            for (const auto& w : vertices_)
              if ((w - v).norm() <= 1e-9 * (1.0 + v.norm())) dup = true;
            if (!dup) vertices_.push_back(v);
          }
        }
        return;
      }
      for (int i = start; i < m; ++i) {
        comb[static_cast<std::size_t>(depth)] = i;
        rec(i + 1, depth + 1);
      }
    };
    rec(0, 0);
    if (vertices_.empty())
      throw Error("polytope: no vertices found (empty or degenerate)");
    // unboundedness probe: a far point along each axis must project back
    double rad = 0.0;
    for (const auto& v : vertices_) rad = std::max(rad, v.norm());
    Vec c = chebyshev_like_center();
    for (int k = 0; k < d; ++k)
      for (double sgn : {-1.0, 1.0}) {
        Vec q = c;
        q[k] += sgn * (1e6 + 1e3 * rad);
        Vec p = project_polytope(q);
        if (p.norm() > 10.0 * (rad + 1.0))
          throw UnboundedDomainError("polytope: unbounded direction detected");
      }
    if (boundary_distance(c) <= 1e-12)
      throw Error("polytope: empty interior");
  }

  DomainKind kind_ = DomainKind::box;
  int dim_ = 0;
  Vec lower_, upper_;          // box
  Mat a_;                      // polytope rows
  Vec b_;
  std::vector<double> row_norms_;
  std::vector<Vec> vertices_;  // polytope only
};

/*
 * D^{-eps}: points of D at boundary distance greater than eps.  Convex
 * whenever D is.  Constructed through inner_shrink so emptiness is caught
 * once, up front.
 */
class InnerDomain {
 public:
  InnerDomain(Domain parent, double eps) : parent_(std::move(parent)), eps_(eps) {
    if (!(eps > 0.0)) throw Error("inner domain: eps must be positive");
    switch (parent_.kind()) {
      case DomainKind::half_line:
        break;  // never empty
      case DomainKind::box: {
        if (eps >= parent_.inradius())
          throw EmptyInnerDomainError("inner domain: eps >= inradius leaves no interior");
        Vec lo = (parent_.lower().array() + eps).matrix();
        Vec up = (parent_.upper().array() - eps).matrix();
        shrunk_ = Domain::box(lo, up);
        break;
      }
      case DomainKind::polytope: {
        Vec b2 = parent_.b();
        for (Eigen::Index i = 0; i < b2.size(); ++i)
          b2[i] -= eps * parent_.a().row(i).norm();
        try {
          shrunk_ = Domain::polytope(parent_.a(), b2);
        } catch (const Error&) {
          throw EmptyInnerDomainError("inner domain: eps leaves no interior");
        }
        break;
      }
    }
  }

  const Domain& parent() const { return parent_; }
  double eps() const { return eps_; }

  bool contains(const Vec& x, double tol = kMembershipTol) const {
    return parent_.contains(x, tol) && parent_.boundary_distance(x) > eps_ - tol;
  }

  // projection onto the closure of D^{-eps}
  Vec project(const Vec& x) const {
    if (parent_.kind() == DomainKind::half_line) {
      if (x.size() != parent_.dim())
        throw DimensionMismatchError("inner domain: point dimension mismatch");
      return x.cwiseMax(eps_);
    }
    return shrunk_->project(x);
  }

 private:
  Domain parent_;
  double eps_;
  std::optional<Domain> shrunk_;
};

inline InnerDomain inner_shrink(const Domain& dom, double eps) {
  return InnerDomain(dom, eps);
}

}  // namespace otb
