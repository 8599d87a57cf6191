#pragma once

#include <string>
#include <vector>

#include "epivo/field.hpp"
#include "epivo/geometry.hpp"

namespace epivo {

// PGM (P5) / PPM (P6), 8-bit, scaled to [0,1]. Chosen by magic on read and by
// channel count on write.
ScalarField read_image(const std::string& path);
void write_image(const ScalarField& img, const std::string& path);

// PFM, little-endian, scale -1.0. Rows stored bottom-to-top on disk.
ScalarField read_pfm(const std::string& path);
void write_pfm(const ScalarField& f, const std::string& path);

// 8-bit heatmap of a float map after linear min-max normalization.
void write_heatmap_pgm(const ScalarField& f, const std::string& path);

// One line: fx fy cx cy
CameraIntrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const CameraIntrinsics& k, const std::string& path);

// KITTI odometry style: one 3x4 row-major matrix (12 decimals) per line.
std::vector<Pose> read_trajectory(const std::string& path);
void write_trajectory(const std::vector<Pose>& poses, const std::string& path);

// CSV with header tx,ty,sx,sy in normalized coordinates.
std::vector<Correspondence> read_correspondences(const std::string& path);
void write_correspondences(const std::vector<Correspondence>& cs,
                           const std::string& path);

// 3x3 matrix, one row per line.
EssentialMatrix read_essential(const std::string& path);
void write_essential(const EssentialMatrix& e, const std::string& path);

// Shortest round-trippable representation of a double.
std::string format_double(double v);

}  // namespace epivo
