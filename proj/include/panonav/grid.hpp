#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace panonav {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Row-major 2-D array. (x, y) indexing with x as the column.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  bool in_bounds(Cell c) const { return in_bounds(c.x, c.y); }

  T& at(int x, int y) {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  const T& at(int x, int y) const {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  T& at(Cell c) { return at(c.x, c.y); }
  const T& at(Cell c) const { return at(c.x, c.y); }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  int index_of(Cell c) const { return c.y * width_ + c.x; }
  Cell cell_of(int index) const { return {index % width_, index / width_}; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  void fill(T v) { data_.assign(data_.size(), v); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace panonav
