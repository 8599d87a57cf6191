#include "epivo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace epivo {

namespace {

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

// Skips whitespace and # comments between netpbm header tokens.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  throw Error(ErrorCode::kIo, "truncated image header");
}

}  // namespace

ScalarField read_image(const std::string& path) {
  auto in = open_in(path, true);
  const std::string magic = next_token(in);
  int channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw Error(ErrorCode::kIo, path + ": expected P5/P6 image");
  }
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (maxval != 255) throw Error(ErrorCode::kIo, path + ": only 8-bit supported");
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (!in) throw Error(ErrorCode::kIo, path + ": truncated pixel data");
  ScalarField f(w, h, channels);
  for (size_t i = 0; i < raw.size(); ++i) {
    f.values()[i] = raw[i] / 255.0;
  }
  return f;
}

void write_image(const ScalarField& img, const std::string& path) {
  auto out = open_out(path, true);
  out << (img.channels() == 1 ? "P5" : "P6") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.values().size());
  for (size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(img.values()[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
}

ScalarField read_pfm(const std::string& path) {
  auto in = open_in(path, true);
  const std::string magic = next_token(in);
  int channels;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw Error(ErrorCode::kIo, path + ": expected PFM");
  }
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const double scale = std::stod(next_token(in));
  if (scale >= 0.0) throw Error(ErrorCode::kIo, path + ": expected little-endian PFM");
  in.get();
  std::vector<float> raw(static_cast<size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size() * sizeof(float));
  if (!in) throw Error(ErrorCode::kIo, path + ": truncated PFM data");
  ScalarField f(w, h, channels);
  for (int y = 0; y < h; ++y) {
    const int src_row = h - 1 - y;  // PFM rows are bottom-up
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        f.at(x, y, c) = raw[(static_cast<size_t>(src_row) * w + x) * channels + c];
      }
    }
  }
  return f;
}

void write_pfm(const ScalarField& f, const std::string& path) {
  auto out = open_out(path, true);
  out << (f.channels() == 1 ? "Pf" : "PF") << "\n"
      << f.width() << " " << f.height() << "\n-1.0\n";
  std::vector<float> raw(f.values().size());
  const int w = f.width();
  const int h = f.height();
  for (int y = 0; y < h; ++y) {
    const int dst_row = h - 1 - y;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < f.channels(); ++c) {
        raw[(static_cast<size_t>(dst_row) * w + x) * f.channels() + c] =
            static_cast<float>(f.at(x, y, c));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size() * sizeof(float));
}

void write_heatmap_pgm(const ScalarField& f, const std::string& path) {
  const auto [lo_it, hi_it] =
      std::minmax_element(f.values().begin(), f.values().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  ScalarField norm(f.width(), f.height(), 1);
  const ScalarField gray = to_gray(f);
  for (size_t i = 0; i < norm.values().size(); ++i) {
    norm.values()[i] = range > 0.0 ? (gray.values()[i] - lo) / range : 0.0;
  }
  write_image(norm, path);
}

CameraIntrinsics read_intrinsics(const std::string& path) {
  auto in = open_in(path, false);
  CameraIntrinsics k;
  if (!(in >> k.fx >> k.fy >> k.cx >> k.cy) || !k.valid()) {
    throw Error(ErrorCode::kIo, path + ": expected 'fx fy cx cy'");
  }
  return k;
}

void write_intrinsics(const CameraIntrinsics& k, const std::string& path) {
  auto out = open_out(path, false);
  out << format_double(k.fx) << " " << format_double(k.fy) << " "
      << format_double(k.cx) << " " << format_double(k.cy) << "\n";
}

std::vector<Pose> read_trajectory(const std::string& path) {
  auto in = open_in(path, false);
  std::vector<Pose> poses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double m[12];
    for (double& v : m) {
      if (!(ls >> v)) throw Error(ErrorCode::kIo, path + ": expected 12 values per line");
    }
    Pose p;
    p.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    p.translation << m[3], m[7], m[11];
    poses.push_back(p);
  }
  return poses;
}

void write_trajectory(const std::vector<Pose>& poses, const std::string& path) {
  auto out = open_out(path, false);
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        out << format_double(p.rotation(r, c)) << " ";
      }
      out << format_double(p.translation[r]);
      out << (r == 2 ? "\n" : " ");
    }
  }
}

std::vector<Correspondence> read_correspondences(const std::string& path) {
  auto in = open_in(path, false);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, path + ": empty file");
  std::vector<Correspondence> cs;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Correspondence c;
    if (!(ls >> c.target.x >> c.target.y >> c.source.x >> c.source.y)) {
      throw Error(ErrorCode::kIo, path + ": expected tx,ty,sx,sy rows");
    }
    cs.push_back(c);
  }
  return cs;
}

void write_correspondences(const std::vector<Correspondence>& cs,
                           const std::string& path) {
  auto out = open_out(path, false);
  out << "tx,ty,sx,sy\n";
  for (const Correspondence& c : cs) {
    out << format_double(c.target.x) << "," << format_double(c.target.y) << ","
        << format_double(c.source.x) << "," << format_double(c.source.y) << "\n";
  }
}

EssentialMatrix read_essential(const std::string& path) {
  auto in = open_in(path, false);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (!(in >> m(r, c))) throw Error(ErrorCode::kIo, path + ": expected 3x3 matrix");
    }
  }
  return EssentialMatrix(m);
}

void write_essential(const EssentialMatrix& e, const std::string& path) {
  auto out = open_out(path, false);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out << format_double(e.matrix()(r, c)) << (c == 2 ? "\n" : " ");
    }
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter representations that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace epivo
