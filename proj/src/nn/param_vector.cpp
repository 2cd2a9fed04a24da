#include "hvac/nn/param_vector.hpp"

#include <algorithm>

#include "hvac/error.hpp"

namespace hvac::nn {

const Segment& ParamLayout::add(std::string name, Index rows, Index cols) {
  require(rows > 0 && cols > 0, "segment '" + name + "' must have positive shape");
  require(!contains(name), "duplicate parameter segment '" + name + "'");
  segments_.push_back(Segment{std::move(name), size_, rows, cols});
  size_ += rows * cols;
  return segments_.back();
}

const Segment& ParamLayout::find(std::string_view name) const {
  auto it = std::find_if(segments_.begin(), segments_.end(),
                         [&](const Segment& s) { return s.name == name; });
  if (it == segments_.end()) throw ValidationError("no parameter segment '" + std::string(name) + "'");
  return *it;
}

bool ParamLayout::contains(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

}  // namespace hvac::nn
