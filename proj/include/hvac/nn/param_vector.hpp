#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

namespace hvac::nn {

using Index = Eigen::Index;

/// A named rows x cols block of the flat parameter vector (column-major).
struct Segment {
  std::string name;
  Index offset = 0;
  Index rows = 0;
  Index cols = 0;

  [[nodiscard]] Index size() const { return rows * cols; }
  bool operator==(const Segment&) const = default;
};

/// Disjoint segments covering [0, size()) in insertion order.
class ParamLayout {
 public:
  const Segment& add(std::string name, Index rows, Index cols);
  [[nodiscard]] const Segment& find(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const;
  [[nodiscard]] Index size() const { return size_; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<Segment> segments_;
  Index size_ = 0;
};

struct ParamVector {
  ParamLayout layout;
  Eigen::VectorXd values;

  ParamVector() = default;
  explicit ParamVector(ParamLayout l) : layout(std::move(l)), values(Eigen::VectorXd::Zero(layout.size())) {}

  [[nodiscard]] Eigen::Map<Eigen::MatrixXd> matrix(std::string_view name) {
    const auto& s = layout.find(name);
    return {values.data() + s.offset, s.rows, s.cols};
  }
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> matrix(std::string_view name) const {
    const auto& s = layout.find(name);
    return {values.data() + s.offset, s.rows, s.cols};
  }
};

}  // namespace hvac::nn
