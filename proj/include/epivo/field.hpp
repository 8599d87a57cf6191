#pragma once

#include <vector>

#include "epivo/error.hpp"

namespace epivo {

// Row-major H x W grid with 1 (intensity/depth/weight) or 3 (RGB) channels.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels),
        values_(static_cast<size_t>(width) * height * channels, fill) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
      throw Error(ErrorCode::kInvalidArgument, "bad field dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double& at(int x, int y, int c = 0) {
    return values_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return values_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const ScalarField& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  double mean() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> values_;
};

class ValidityMask {
 public:
  ValidityMask() = default;
  ValidityMask(int width, int height, bool fill = true)
      : width_(width), height_(height),
        flags_(static_cast<size_t>(width) * height, fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const {
    return flags_[static_cast<size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) {
    flags_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  int count() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<unsigned char> flags_;
};

// 2x2 box average; odd trailing rows/columns average over the clipped block.
ScalarField downsample2(const ScalarField& f);

// Adjoint of downsample2: distributes a coarse gradient back to the fine grid.
ScalarField downsample2_adjoint(const ScalarField& coarse_grad, int fine_width,
                                int fine_height);

// Channel mean; identity for single-channel fields.
ScalarField to_gray(const ScalarField& f);

}  // namespace epivo
