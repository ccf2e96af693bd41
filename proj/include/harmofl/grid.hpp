#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "harmofl/errors.hpp"

namespace harmofl {

struct GridShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const GridShape&) const = default;
};

// Real-valued H x W x C grid, row-major within a channel, channel-outermost.
// Used both for pixel images and for amplitude/phase planes.
class Grid {
 public:
  Grid() = default;

  explicit Grid(GridShape shape, double fill = 0.0)
      : shape_(shape), data_(shape.size(), fill) {}

  Grid(GridShape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size())
      throw ShapeError("grid data length does not match shape");
  }

  const GridShape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double& at(int h, int w, int c) { return data_[index(h, w, c)]; }
  double at(int h, int w, int c) const { return data_[index(h, w, c)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Grid& other) const { return shape_ == other.shape_; }

 private:
  std::size_t index(int h, int w, int c) const {
    return (static_cast<std::size_t>(c) * shape_.height + h) * shape_.width + w;
  }

  GridShape shape_;
  std::vector<double> data_;
};

using Image = Grid;

inline bool all_finite(const Grid& g) {
  for (double v : g.data())
    if (!std::isfinite(v)) return false;
  return true;
}

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace harmofl
