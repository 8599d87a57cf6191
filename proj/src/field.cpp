#include "epivo/field.hpp"

#include <numeric>

namespace epivo {

double ScalarField::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

int ValidityMask::count() const {
  int n = 0;
  for (unsigned char f : flags_) n += f;
  return n;
}

ScalarField downsample2(const ScalarField& f) {
  const int w = (f.width() + 1) / 2;
  const int h = (f.height() + 1) / 2;
  ScalarField out(w, h, f.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x1 = std::min(2 * x + 1, f.width() - 1);
      const int y1 = std::min(2 * y + 1, f.height() - 1);
      for (int c = 0; c < f.channels(); ++c) {
        double sum = 0.0;
        int n = 0;
        for (int yy = 2 * y; yy <= y1; ++yy) {
          for (int xx = 2 * x; xx <= x1; ++xx) {
            sum += f.at(xx, yy, c);
            ++n;
          }
        }
        out.at(x, y, c) = sum / n;
      }
    }
  }
  return out;
}

ScalarField downsample2_adjoint(const ScalarField& g, int fine_width,
                                int fine_height) {
  ScalarField out(fine_width, fine_height, g.channels());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const int x1 = std::min(2 * x + 1, fine_width - 1);
      const int y1 = std::min(2 * y + 1, fine_height - 1);
      const int n = (x1 - 2 * x + 1) * (y1 - 2 * y + 1);
      for (int c = 0; c < g.channels(); ++c) {
        const double v = g.at(x, y, c) / n;
        for (int yy = 2 * y; yy <= y1; ++yy) {
          for (int xx = 2 * x; xx <= x1; ++xx) {
            out.at(xx, yy, c) += v;
          }
        }
      }
    }
  }
  return out;
}

ScalarField to_gray(const ScalarField& f) {
  if (f.channels() == 1) return f;
  ScalarField out(f.width(), f.height(), 1);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      out.at(x, y) = (f.at(x, y, 0) + f.at(x, y, 1) + f.at(x, y, 2)) / 3.0;
    }
  }
  return out;
}

}  // namespace epivo
